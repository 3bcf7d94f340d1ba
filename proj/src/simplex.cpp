#include "simplex.hpp"

#include <cmath>
#include <limits>

namespace islanding::milp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDualTol = 1e-9;        // reduced-cost optimality tolerance
constexpr double kWarmDualTol = 1e-7;    // accepted dual infeasibility on warm start
constexpr double kBoundTol = 1e-9;       // primal bound tolerance inside the engine
constexpr double kPivotTol = 1e-9;       // smallest acceptable pivot magnitude
constexpr double kDegenerateStep = 1e-12;
constexpr int kRefactorInterval = 120;
constexpr long kBlandTrigger = 400;  // consecutive degenerate pivots before Bland's rule

class SimplexEngine {
public:
    explicit SimplexEngine(const StandardForm& sf)
        : sf_(sf),
          m_(sf.m),
          n_(sf.n_total()),
          lower_(sf.lower),
          upper_(sf.upper),
          x_(Eigen::VectorXd::Zero(sf.n_total())),
          status_(sf.n_total(), VarStatus::AtLower),
          feas_scale_(std::max(1.0, sf.b.size() ? sf.b.cwiseAbs().maxCoeff() : 1.0)) {}

    LpResult run_cold(long iteration_limit);
    LpResult run_warm(const Basis& start, long iteration_limit);

private:
    void place_nonbasic_at_bound(int j);
    bool refactor();
    void recompute_basic_values();
    double phase1_infeasibility() const;
    void pivot_update(int entering, int leaving_pos, const Eigen::VectorXd& ftran);

    LpStatus primal_loop(const Eigen::VectorXd& cost, bool phase1, long limit, long& iters);
    LpStatus dual_loop(const Eigen::VectorXd& cost, long limit, long& iters);

    LpResult finish(LpStatus status, long iters) const;

    const StandardForm& sf_;
    int m_, n_;
    Eigen::VectorXd lower_, upper_;  // engine-local (artificial bounds are solve state)
    Eigen::VectorXd x_;
    std::vector<VarStatus> status_;
    std::vector<int> basic_;
    Eigen::MatrixXd binv_;
    double feas_scale_;
    bool bland_ = false;
    long degenerate_streak_ = 0;
    int pivots_since_refactor_ = 0;
};

void SimplexEngine::place_nonbasic_at_bound(int j) {
    double l = lower_[j], u = upper_[j];
    if (std::isfinite(l) && std::isfinite(u)) {
        if (std::abs(l) <= std::abs(u)) {
            status_[j] = VarStatus::AtLower;
            x_[j] = l;
        } else {
            status_[j] = VarStatus::AtUpper;
            x_[j] = u;
        }
    } else if (std::isfinite(l)) {
        status_[j] = VarStatus::AtLower;
        x_[j] = l;
    } else if (std::isfinite(u)) {
        status_[j] = VarStatus::AtUpper;
        x_[j] = u;
    } else {
        status_[j] = VarStatus::Free;
        x_[j] = 0.0;
    }
}

bool SimplexEngine::refactor() {
    Eigen::MatrixXd basis_matrix(m_, m_);
    for (int p = 0; p < m_; ++p) basis_matrix.col(p) = sf_.A.col(basic_[p]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
    // PartialPivLU has no rank query; check the inverse for blow-ups instead.
    binv_ = lu.inverse();
    if (!binv_.allFinite()) return false;
    double growth = binv_.cwiseAbs().maxCoeff();
    if (growth > 1e14) return false;
    pivots_since_refactor_ = 0;
    return true;
}

void SimplexEngine::recompute_basic_values() {
    Eigen::VectorXd x_nonbasic = x_;
    for (int p = 0; p < m_; ++p) x_nonbasic[basic_[p]] = 0.0;
    Eigen::VectorXd residual = sf_.b - sf_.A * x_nonbasic;
    Eigen::VectorXd xb = binv_ * residual;
    for (int p = 0; p < m_; ++p) x_[basic_[p]] = xb[p];
}

double SimplexEngine::phase1_infeasibility() const {
    double total = 0.0;
    for (int j = sf_.artificial_begin(); j < n_; ++j) total += std::abs(x_[j]);
    return total;
}

void SimplexEngine::pivot_update(int entering, int leaving_pos,
                                 const Eigen::VectorXd& ftran) {
    const double pivot = ftran[leaving_pos];
    Eigen::RowVectorXd pivot_row = binv_.row(leaving_pos) / pivot;
    Eigen::VectorXd scaled = ftran;
    scaled[leaving_pos] = 0.0;
    binv_.noalias() -= scaled * pivot_row;
    binv_.row(leaving_pos) = pivot_row;
    basic_[leaving_pos] = entering;
    status_[entering] = VarStatus::Basic;
    if (++pivots_since_refactor_ >= kRefactorInterval) {
        refactor();
        recompute_basic_values();
    }
}

LpStatus SimplexEngine::primal_loop(const Eigen::VectorXd& cost, bool phase1, long limit,
                                    long& iters) {
    Eigen::VectorXd cb(m_);
    while (true) {
        if (iters >= limit) return LpStatus::IterationLimit;
        ++iters;

        if (phase1 && phase1_infeasibility() <= 1e-11 * feas_scale_)
            return LpStatus::Optimal;

        for (int p = 0; p < m_; ++p) cb[p] = cost[basic_[p]];
        Eigen::VectorXd y = binv_.transpose() * cb;
        Eigen::VectorXd rc = cost - sf_.A.transpose() * y;

        // entering variable
        int entering = -1;
        double best_score = kDualTol;
        for (int j = 0; j < n_; ++j) {
            if (status_[j] == VarStatus::Basic) continue;
            if (upper_[j] - lower_[j] <= 0.0) continue;  // fixed
            double score = 0.0;
            if (status_[j] == VarStatus::AtLower)
                score = -rc[j];
            else if (status_[j] == VarStatus::AtUpper)
                score = rc[j];
            else
                score = std::abs(rc[j]);  // free
            if (score > best_score) {
                entering = j;
                best_score = score;
                if (bland_) break;  // lowest eligible index
            }
        }
        if (entering < 0) return LpStatus::Optimal;

        const double dir =
            (status_[entering] == VarStatus::AtUpper ||
             (status_[entering] == VarStatus::Free && rc[entering] > 0.0))
                ? -1.0
                : 1.0;

        Eigen::VectorXd d = binv_ * sf_.A.col(entering);

        // ratio test over basic variables plus the entering variable's own range
        double best_t = upper_[entering] - lower_[entering];  // may be +inf
        int leaving_pos = -1;                                  // -1 marks a bound flip
        for (int p = 0; p < m_; ++p) {
            double delta = -d[p] * dir;  // change of x_B[p] per unit step
            if (std::abs(d[p]) <= kPivotTol) continue;
            int bj = basic_[p];
            double t;
            if (delta > 0) {
                if (!std::isfinite(upper_[bj])) continue;
                t = (upper_[bj] - x_[bj]) / delta;
            } else {
                if (!std::isfinite(lower_[bj])) continue;
                t = (lower_[bj] - x_[bj]) / delta;
            }
            if (t < -kBoundTol) t = 0.0;  // tiny bound violation from roundoff
            t = std::max(t, 0.0);
            if (t < best_t - 1e-12 ||
                (t < best_t + 1e-12 && leaving_pos >= 0 && bj < basic_[leaving_pos])) {
                best_t = t;
                leaving_pos = p;
            }
        }

        if (!std::isfinite(best_t)) return phase1 ? LpStatus::Numerical : LpStatus::Unbounded;

        if (best_t <= kDegenerateStep) {
            if (++degenerate_streak_ > kBlandTrigger) bland_ = true;
        } else {
            degenerate_streak_ = 0;
        }

        const double step = dir * best_t;
        x_[entering] += step;
        for (int p = 0; p < m_; ++p) x_[basic_[p]] -= d[p] * step;

        if (leaving_pos < 0) {
            // bound flip: entering moved across its range, basis unchanged
            status_[entering] =
                status_[entering] == VarStatus::AtLower ? VarStatus::AtUpper
                                                        : VarStatus::AtLower;
            x_[entering] = status_[entering] == VarStatus::AtLower ? lower_[entering]
                                                                   : upper_[entering];
            continue;
        }

        int leaving = basic_[leaving_pos];
        double delta_leaving = -d[leaving_pos] * dir;
        if (delta_leaving > 0) {
            status_[leaving] = VarStatus::AtUpper;
            x_[leaving] = upper_[leaving];
        } else {
            status_[leaving] = VarStatus::AtLower;
            x_[leaving] = lower_[leaving];
        }
        pivot_update(entering, leaving_pos, d);
    }
}

LpStatus SimplexEngine::dual_loop(const Eigen::VectorXd& cost, long limit, long& iters) {
    Eigen::VectorXd cb(m_);
    long dual_pivots = 0;
    const long dual_cap = 4L * (m_ + n_) + 200;
    while (true) {
        if (iters >= limit) return LpStatus::IterationLimit;
        if (++dual_pivots > dual_cap) return LpStatus::Numerical;
        ++iters;

        // most infeasible basic variable leaves
        int leaving_pos = -1;
        double worst = 10.0 * kBoundTol;
        bool below = false;
        for (int p = 0; p < m_; ++p) {
            int bj = basic_[p];
            double viol_low = lower_[bj] - x_[bj];
            double viol_up = x_[bj] - upper_[bj];
            if (viol_low > worst) {
                worst = viol_low;
                leaving_pos = p;
                below = true;
            }
            if (viol_up > worst) {
                worst = viol_up;
                leaving_pos = p;
                below = false;
            }
        }
        if (leaving_pos < 0) return LpStatus::Optimal;  // primal feasible

        for (int p = 0; p < m_; ++p) cb[p] = cost[basic_[p]];
        Eigen::VectorXd y = binv_.transpose() * cb;
        Eigen::VectorXd rc = cost - sf_.A.transpose() * y;
        Eigen::VectorXd rho = binv_.row(leaving_pos).transpose();
        Eigen::VectorXd alpha = sf_.A.transpose() * rho;

        const int leaving = basic_[leaving_pos];
        const double target = below ? lower_[leaving] : upper_[leaving];

        int entering = -1;
        double best_ratio = kInf;
        for (int j = 0; j < n_; ++j) {
            if (status_[j] == VarStatus::Basic) continue;
            if (upper_[j] - lower_[j] <= 0.0) continue;
            double a = alpha[j];
            if (std::abs(a) <= kPivotTol) continue;
            bool eligible;
            if (status_[j] == VarStatus::Free)
                eligible = true;
            else if (below)
                eligible = (status_[j] == VarStatus::AtLower && a < 0.0) ||
                           (status_[j] == VarStatus::AtUpper && a > 0.0);
            else
                eligible = (status_[j] == VarStatus::AtLower && a > 0.0) ||
                           (status_[j] == VarStatus::AtUpper && a < 0.0);
            if (!eligible) continue;
            double ratio = std::abs(rc[j]) / std::abs(a);
            if (ratio < best_ratio - 1e-12 ||
                (ratio < best_ratio + 1e-12 && (entering < 0 || j < entering))) {
                best_ratio = ratio;
                entering = j;
            }
        }
        if (entering < 0) return LpStatus::Infeasible;  // no column can restore the bound

        Eigen::VectorXd d = binv_ * sf_.A.col(entering);
        double pivot = d[leaving_pos];
        if (std::abs(pivot) <= kPivotTol) return LpStatus::Numerical;

        double e = target - x_[leaving];
        double step = -e / pivot;  // change of the entering variable
        x_[entering] += step;
        for (int p = 0; p < m_; ++p) x_[basic_[p]] -= d[p] * step;
        x_[leaving] = target;
        status_[leaving] = below ? VarStatus::AtLower : VarStatus::AtUpper;
        pivot_update(entering, leaving_pos, d);
    }
}

LpResult SimplexEngine::finish(LpStatus status, long iters) const {
    LpResult result;
    result.status = status;
    result.iterations = iters;
    result.x = x_;
    result.basis.basic = basic_;
    result.basis.status = status_;
    if (status == LpStatus::Optimal) {
        double obj = 0.0;
        for (int j = 0; j < sf_.n_struct; ++j) obj += sf_.cost[j] * x_[j];
        result.objective = obj;
    }
    return result;
}

LpResult SimplexEngine::run_cold(long iteration_limit) {
    long iters = 0;

    if (m_ == 0) {
        // unconstrained: every variable sits at its cost-optimal bound
        for (int j = 0; j < n_; ++j) {
            double c = sf_.cost[j];
            if (c > 0.0) {
                if (!std::isfinite(lower_[j])) return finish(LpStatus::Unbounded, iters);
                x_[j] = lower_[j];
                status_[j] = VarStatus::AtLower;
            } else if (c < 0.0) {
                if (!std::isfinite(upper_[j])) return finish(LpStatus::Unbounded, iters);
                x_[j] = upper_[j];
                status_[j] = VarStatus::AtUpper;
            } else {
                place_nonbasic_at_bound(j);
            }
        }
        return finish(LpStatus::Optimal, iters);
    }

    // nonbasic structurals and slacks at their bound closest to zero
    for (int j = 0; j < sf_.artificial_begin(); ++j) place_nonbasic_at_bound(j);

    // artificials carry the initial residual
    Eigen::VectorXd x_ns = x_;
    for (int j = sf_.artificial_begin(); j < n_; ++j) x_ns[j] = 0.0;
    Eigen::VectorXd residual = sf_.b - sf_.A * x_ns;

    basic_.resize(m_);
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < m_; ++i) {
        int aj = sf_.artificial_begin() + i;
        basic_[i] = aj;
        status_[aj] = VarStatus::Basic;
        double r = residual[i];
        x_[aj] = r;
        lower_[aj] = std::min(0.0, r);
        upper_[aj] = std::max(0.0, r);
        phase1_cost[aj] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    }
    binv_ = Eigen::MatrixXd::Identity(m_, m_);

    LpStatus p1 = primal_loop(phase1_cost, true, iteration_limit, iters);
    if (p1 == LpStatus::IterationLimit) return finish(p1, iters);
    if (p1 == LpStatus::Numerical) return finish(LpStatus::Numerical, iters);
    if (phase1_infeasibility() > 1e-7 * feas_scale_)
        return finish(LpStatus::Infeasible, iters);

    // artificial variables are pinned at zero for phase 2
    for (int j = sf_.artificial_begin(); j < n_; ++j) {
        lower_[j] = 0.0;
        upper_[j] = 0.0;
        if (status_[j] != VarStatus::Basic) {
            status_[j] = VarStatus::AtLower;
            x_[j] = 0.0;
        }
    }

    bland_ = false;
    degenerate_streak_ = 0;
    LpStatus p2 = primal_loop(sf_.cost, false, iteration_limit, iters);
    if (p2 == LpStatus::Optimal && pivots_since_refactor_ > 0) {
        refactor();
        recompute_basic_values();
    }
    return finish(p2, iters);
}

LpResult SimplexEngine::run_warm(const Basis& start, long iteration_limit) {
    long iters = 0;
    if (m_ == 0) return run_cold(iteration_limit);
    if (static_cast<int>(start.basic.size()) != m_ ||
        static_cast<int>(start.status.size()) != n_)
        return finish(LpStatus::Numerical, iters);

    basic_ = start.basic;
    status_ = start.status;

    // artificials stay pinned at zero
    for (int j = sf_.artificial_begin(); j < n_; ++j) {
        lower_[j] = 0.0;
        upper_[j] = 0.0;
    }
    for (int j = 0; j < n_; ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        if (status_[j] == VarStatus::AtLower)
            x_[j] = lower_[j];
        else if (status_[j] == VarStatus::AtUpper)
            x_[j] = upper_[j];
        else
            x_[j] = 0.0;
        if (upper_[j] - lower_[j] <= 0.0 && status_[j] == VarStatus::AtUpper) {
            status_[j] = VarStatus::AtLower;  // canonical side for fixed variables
            x_[j] = lower_[j];
        }
    }

    if (!refactor()) return finish(LpStatus::Numerical, iters);
    recompute_basic_values();

    // require near-dual-feasibility, otherwise restart cold
    {
        Eigen::VectorXd cb(m_);
        for (int p = 0; p < m_; ++p) cb[p] = sf_.cost[basic_[p]];
        Eigen::VectorXd y = binv_.transpose() * cb;
        Eigen::VectorXd rc = sf_.cost - sf_.A.transpose() * y;
        for (int j = 0; j < n_; ++j) {
            if (status_[j] == VarStatus::Basic) continue;
            if (upper_[j] - lower_[j] <= 0.0) continue;
            bool ok = true;
            if (status_[j] == VarStatus::AtLower)
                ok = rc[j] >= -kWarmDualTol;
            else if (status_[j] == VarStatus::AtUpper)
                ok = rc[j] <= kWarmDualTol;
            else
                ok = std::abs(rc[j]) <= kWarmDualTol;
            if (!ok) return finish(LpStatus::Numerical, iters);
        }
    }

    LpStatus restored = dual_loop(sf_.cost, iteration_limit, iters);
    if (restored == LpStatus::Infeasible || restored == LpStatus::IterationLimit ||
        restored == LpStatus::Numerical)
        return finish(restored, iters);

    LpStatus polished = primal_loop(sf_.cost, false, iteration_limit, iters);
    if (polished == LpStatus::Optimal && pivots_since_refactor_ > 0) {
        refactor();
        recompute_basic_values();
    }
    return finish(polished, iters);
}

}  // namespace

StandardForm build_standard_form(const MilpModel& model) {
    StandardForm sf;
    sf.m = model.constraint_count();
    sf.n_struct = model.variable_count();
    const int n = sf.n_total();

    sf.A = Eigen::MatrixXd::Zero(sf.m, n);
    sf.b = Eigen::VectorXd::Zero(sf.m);
    sf.cost = Eigen::VectorXd::Zero(n);
    sf.lower = Eigen::VectorXd::Zero(n);
    sf.upper = Eigen::VectorXd::Zero(n);

    for (int j = 0; j < sf.n_struct; ++j) {
        VariableRef v{j};
        sf.lower[j] = model.lower(v);
        sf.upper[j] = model.upper(v);
    }
    const double sign = model.objective_sense() == ObjectiveSense::Minimize ? 1.0 : -1.0;
    for (const auto& t : model.objective_terms()) sf.cost[t.var.index] = sign * t.coefficient;

    for (int i = 0; i < sf.m; ++i) {
        const auto& con = model.constraints()[i];
        for (const auto& t : con.terms) sf.A(i, t.var.index) = t.coefficient;
        sf.b[i] = con.rhs;
        int slack = sf.slack_begin() + i;
        sf.A(i, slack) = 1.0;
        switch (con.sense) {
            case ConstraintSense::LessEqual:
                sf.lower[slack] = 0.0;
                sf.upper[slack] = std::numeric_limits<double>::infinity();
                break;
            case ConstraintSense::GreaterEqual:
                sf.lower[slack] = -std::numeric_limits<double>::infinity();
                sf.upper[slack] = 0.0;
                break;
            case ConstraintSense::Equal:
                sf.lower[slack] = 0.0;
                sf.upper[slack] = 0.0;
                break;
        }
        int art = sf.artificial_begin() + i;
        sf.A(i, art) = 1.0;  // bounds assigned per solve
    }
    return sf;
}

LpResult solve_lp_cold(const StandardForm& sf, long iteration_limit) {
    SimplexEngine engine(sf);
    return engine.run_cold(iteration_limit);
}

LpResult solve_lp_warm(const StandardForm& sf, const Basis& start, long iteration_limit) {
    SimplexEngine engine(sf);
    return engine.run_warm(start, iteration_limit);
}

}  // namespace islanding::milp::detail
