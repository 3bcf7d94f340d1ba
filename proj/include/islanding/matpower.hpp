#pragma once

#include <iosfwd>
#include <string>

#include "islanding/grid.hpp"

namespace islanding {

// Parses the MATPOWER case subset: mpc.baseMVA, mpc.bus (BUS_I, PD),
// mpc.gen (GEN_BUS, PG, PMAX, PMIN), mpc.branch (F_BUS, T_BUS, BR_X,
// RATE_A, BR_STATUS). '%' comments are tolerated; out-of-service branches
// are dropped; parallel branches merge. RATE_A = 0 follows the MATPOWER
// "unlimited" convention and maps to the widest flow the angle window
// admits. Buses get the default +/-0.6 rad angle window.
PowerNetwork parse_matpower_case(const std::string& text);
PowerNetwork parse_matpower_case(std::istream& in);

// Loads a case from disk, dispatching on extension: ".m" MATPOWER,
// ".json" native network format.
PowerNetwork load_case_file(const std::string& path);

}  // namespace islanding
