#pragma once

// Deliberately naive two-phase tableau simplex with Bland's rule, used as an
// independent oracle for the engine under test. Handles finite lower bounds
// only; upper bounds become rows. Slow and simple on purpose.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace islanding::testing {

class RefLp {
public:
    enum class Status { Optimal, Infeasible, Unbounded };
    struct Result {
        Status status = Status::Infeasible;
        double objective = 0.0;
        std::vector<double> x;
    };

    int add_var(double lower, double upper) {
        if (!std::isfinite(lower)) throw std::runtime_error("RefLp needs finite lower bounds");
        lowers_.push_back(lower);
        uppers_.push_back(upper);
        return static_cast<int>(lowers_.size()) - 1;
    }

    void add_row(std::vector<std::pair<int, double>> terms, char sense, double rhs) {
        rows_.push_back({std::move(terms), sense, rhs});
    }

    void set_objective(std::vector<std::pair<int, double>> terms, bool maximize) {
        objective_ = std::move(terms);
        maximize_ = maximize;
    }

    Result solve() const {
        const int n = static_cast<int>(lowers_.size());
        // shift x = y + l, upper bounds become rows
        std::vector<Row> rows = rows_;
        for (int j = 0; j < n; ++j)
            if (std::isfinite(uppers_[j])) rows.push_back({{{j, 1.0}}, '<', uppers_[j]});

        const int m = static_cast<int>(rows.size());
        int slack_count = 0;
        for (const auto& r : rows)
            if (r.sense != '=') ++slack_count;
        const int cols = n + slack_count + m;  // structurals, slacks, artificials

        std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols + 1, 0.0));
        std::vector<int> basis(m, -1);

        int next_slack = n;
        for (int i = 0; i < m; ++i) {
            double rhs = rows[i].rhs;
            for (auto [j, a] : rows[i].terms) {
                t[i][j] += a;
                rhs -= a * lowers_[j];  // shift to y-space
            }
            if (rows[i].sense == '<') t[i][next_slack++] = 1.0;
            if (rows[i].sense == '>') t[i][next_slack++] = -1.0;
            t[i][cols] = rhs;
            if (t[i][cols] < 0.0)
                for (int j = 0; j <= cols; ++j) t[i][j] = -t[i][j];
            int art = n + slack_count + i;
            t[i][art] = 1.0;
            basis[i] = art;
        }

        // phase 1: minimize the artificial sum
        for (int i = 0; i < m; ++i)
            for (int j = 0; j <= cols; ++j) t[m][j] -= t[i][j];
        for (int i = 0; i < m; ++i) {
            int art = n + slack_count + i;
            t[m][art] = 0.0;
        }
        if (!run(t, basis, cols, n + slack_count)) throw std::runtime_error("phase-1 cycle");
        if (-t[m][cols] > 1e-7) return {Status::Infeasible, 0.0, {}};

        // phase 2: real costs in y-space (minimization)
        std::vector<double> cost(cols + 1, 0.0);
        double shift_cost = 0.0;
        for (auto [j, c] : objective_) {
            double signed_c = maximize_ ? -c : c;
            cost[j] += signed_c;
            shift_cost += signed_c * lowers_[j];
        }
        for (int j = 0; j <= cols; ++j) t[m][j] = cost[j];
        for (int i = 0; i < m; ++i) {
            if (t[m][basis[i]] == 0.0) continue;
            double f = t[m][basis[i]];
            for (int j = 0; j <= cols; ++j) t[m][j] -= f * t[i][j];
        }
        // artificials are done; forbid re-entry by pricing them out
        if (!run(t, basis, cols, n + slack_count)) return {Status::Unbounded, 0.0, {}};

        Result out;
        out.status = Status::Optimal;
        out.x.assign(n, 0.0);
        for (int i = 0; i < m; ++i)
            if (basis[i] < n) out.x[basis[i]] = t[i][cols];
        for (int j = 0; j < n; ++j) out.x[j] += lowers_[j];
        double value = -t[m][cols] - shift_cost;  // y-space objective plus shift
        out.objective = maximize_ ? -value : value;
        return out;
    }

private:
    struct Row {
        std::vector<std::pair<int, double>> terms;
        char sense = '<';
        double rhs = 0.0;
    };

    // Bland tableau iteration over the first `priceable` columns.
    static bool run(std::vector<std::vector<double>>& t, std::vector<int>& basis,
                    int cols, int priceable) {
        const int m = static_cast<int>(basis.size());
        for (long iter = 0; iter < 200000; ++iter) {
            int entering = -1;
            for (int j = 0; j < priceable; ++j)
                if (t[m][j] < -1e-9) {
                    entering = j;
                    break;
                }
            if (entering < 0) return true;

            int leaving = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                if (t[i][entering] <= 1e-9) continue;
                double ratio = t[i][cols] / t[i][entering];
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 &&
                     (leaving < 0 || basis[i] < basis[leaving]))) {
                    best = ratio;
                    leaving = i;
                }
            }
            if (leaving < 0) return false;  // unbounded

            double pivot = t[leaving][entering];
            for (int j = 0; j <= cols; ++j) t[leaving][j] /= pivot;
            for (int i = 0; i <= m; ++i) {
                if (i == leaving || t[i][entering] == 0.0) continue;
                double f = t[i][entering];
                for (int j = 0; j <= cols; ++j) t[i][j] -= f * t[leaving][j];
            }
            basis[leaving] = entering;
        }
        throw std::runtime_error("reference LP iteration cap");
    }

    std::vector<double> lowers_, uppers_;
    std::vector<Row> rows_;
    std::vector<std::pair<int, double>> objective_;
    bool maximize_ = false;
};

}  // namespace islanding::testing
