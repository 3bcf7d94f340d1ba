#include "islanding/milp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace islanding::milp {

int MilpModel::check(VariableRef v) const {
    if (v.index < 0 || v.index >= variable_count())
        throw UnknownVariableInTerm("variable handle " + std::to_string(v.index) +
                                    " is not registered with this model");
    return v.index;
}

VariableRef MilpModel::add_variable(VarKind kind, double lower, double upper,
                                    std::string name) {
    if (!(lower <= upper))
        throw MalformedCase("variable bounds must satisfy lower <= upper");
    if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
        throw MalformedCase("binary variable bounds must lie within [0,1]");
    if (!name.empty()) {
        for (const auto& existing : names_)
            if (existing == name)
                throw DuplicateVariableName("duplicate variable name '" + name + "'");
    }
    kinds_.push_back(kind);
    lowers_.push_back(lower);
    uppers_.push_back(upper);
    names_.push_back(std::move(name));
    return VariableRef{static_cast<int>(kinds_.size()) - 1};
}

void MilpModel::fix(VariableRef var, double value) { set_bounds(var, value, value); }

void MilpModel::set_bounds(VariableRef var, double lower, double upper) {
    int i = check(var);
    if (!(lower <= upper))
        throw MalformedCase("variable bounds must satisfy lower <= upper");
    if (kinds_[i] == VarKind::Binary && (lower < 0.0 || upper > 1.0))
        throw MalformedCase("binary variable bounds must lie within [0,1]");
    lowers_[i] = lower;
    uppers_[i] = upper;
}

std::vector<LinearTerm> MilpModel::normalize(std::vector<LinearTerm> terms) const {
    std::map<int, double> merged;
    for (const auto& t : terms) {
        if (!std::isfinite(t.coefficient))
            throw MalformedCase("non-finite coefficient in linear expression");
        merged[check(t.var)] += t.coefficient;
    }
    std::vector<LinearTerm> out;
    out.reserve(merged.size());
    for (auto [idx, coeff] : merged)
        if (coeff != 0.0) out.push_back({VariableRef{idx}, coeff});
    return out;
}

void MilpModel::add_constraint(std::vector<LinearTerm> terms, ConstraintSense sense,
                               double rhs) {
    if (!std::isfinite(rhs)) throw MalformedCase("non-finite constraint rhs");
    constraints_.push_back({normalize(std::move(terms)), sense, rhs});
}

void MilpModel::set_objective(std::vector<LinearTerm> terms, ObjectiveSense sense,
                              double constant) {
    objective_ = normalize(std::move(terms));
    sense_ = sense;
    objective_constant_ = constant;
}

std::vector<int> MilpModel::binary_indices() const {
    std::vector<int> out;
    for (int i = 0; i < variable_count(); ++i)
        if (kinds_[i] == VarKind::Binary) out.push_back(i);
    return out;
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        case SolveStatus::IterationLimit: return "IterationLimit";
    }
    return "Unknown";
}

std::vector<std::string> certify_solution(const MilpModel& model,
                                          const Eigen::VectorXd& assignment,
                                          double feasibility_tol,
                                          double integrality_tol) {
    std::vector<std::string> violations;
    if (assignment.size() != model.variable_count()) {
        violations.push_back("assignment size does not match variable count");
        return violations;
    }
    for (int i = 0; i < model.variable_count(); ++i) {
        VariableRef v{i};
        double x = assignment[i];
        if (!std::isfinite(x)) {
            violations.push_back("variable " + std::to_string(i) + " is not finite");
            continue;
        }
        if (x < model.lower(v) - feasibility_tol || x > model.upper(v) + feasibility_tol)
            violations.push_back("variable " + std::to_string(i) + " = " +
                                 std::to_string(x) + " violates its bounds");
        if (model.kind(v) == VarKind::Binary &&
            std::abs(x - std::round(x)) > integrality_tol)
            violations.push_back("binary variable " + std::to_string(i) + " = " +
                                 std::to_string(x) + " is fractional");
    }
    for (int c = 0; c < model.constraint_count(); ++c) {
        const auto& con = model.constraints()[c];
        double lhs = 0.0;
        for (const auto& t : con.terms) lhs += t.coefficient * assignment[t.var.index];
        double gap = lhs - con.rhs;
        bool ok = true;
        switch (con.sense) {
            case ConstraintSense::LessEqual: ok = gap <= feasibility_tol; break;
            case ConstraintSense::GreaterEqual: ok = gap >= -feasibility_tol; break;
            case ConstraintSense::Equal: ok = std::abs(gap) <= feasibility_tol; break;
        }
        if (!ok)
            violations.push_back("constraint " + std::to_string(c) + " violated by " +
                                 std::to_string(gap));
    }
    return violations;
}

namespace {

std::string lp_var_name(const MilpModel& model, int index) {
    const std::string& n = model.name(VariableRef{index});
    if (n.empty()) return "x" + std::to_string(index);
    std::string safe = n;
    for (char& c : safe)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    return safe;
}

void write_terms(std::ostream& out, const MilpModel& model,
                 const std::vector<LinearTerm>& terms) {
    if (terms.empty()) {
        out << " 0";
        return;
    }
    bool first = true;
    for (const auto& t : terms) {
        double c = t.coefficient;
        if (first) {
            out << (c < 0 ? " - " : " ");
            first = false;
        } else {
            out << (c < 0 ? " - " : " + ");
        }
        out << std::abs(c) << " " << lp_var_name(model, t.var.index);
    }
}

}  // namespace

void write_lp_format(const MilpModel& model, std::ostream& out) {
    out << (model.objective_sense() == ObjectiveSense::Minimize ? "Minimize" : "Maximize")
        << "\n obj:";
    write_terms(out, model, model.objective_terms());
    out << "\nSubject To\n";
    for (int c = 0; c < model.constraint_count(); ++c) {
        const auto& con = model.constraints()[c];
        out << " c" << c << ":";
        write_terms(out, model, con.terms);
        switch (con.sense) {
            case ConstraintSense::LessEqual: out << " <= "; break;
            case ConstraintSense::GreaterEqual: out << " >= "; break;
            case ConstraintSense::Equal: out << " = "; break;
        }
        out << con.rhs << "\n";
    }
    out << "Bounds\n";
    for (int i = 0; i < model.variable_count(); ++i) {
        VariableRef v{i};
        out << " " << model.lower(v) << " <= " << lp_var_name(model, i) << " <= "
            << model.upper(v) << "\n";
    }
    bool any_binary = false;
    for (int i = 0; i < model.variable_count(); ++i)
        if (model.kind(VariableRef{i}) == VarKind::Binary) any_binary = true;
    if (any_binary) {
        out << "Binary\n";
        for (int i = 0; i < model.variable_count(); ++i)
            if (model.kind(VariableRef{i}) == VarKind::Binary)
                out << " " << lp_var_name(model, i) << "\n";
    }
    out << "End\n";
}

}  // namespace islanding::milp
