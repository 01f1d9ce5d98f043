#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "polystab/errors.hpp"

namespace polystab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Maximize, Minimize };
enum class Relation { LessEq, Equal, GreaterEq };
enum class LpStatus { Optimal, Unbounded, Infeasible };

struct Constraint {
    std::vector<double> coeffs;
    Relation rel = Relation::LessEq;
    double rhs = 0.0;
};

struct Bounds {
    double lower = -kInf;
    double upper = kInf;
};

/// Dense linear program. Variables are indexed 0..n-1; bounds default to free.
struct LinearProgram {
    Sense sense = Sense::Maximize;
    std::vector<double> objective;
    std::vector<Constraint> constraints;
    std::vector<Bounds> bounds;  // one per variable; may be left empty for all-free

    int num_vars() const { return static_cast<int>(objective.size()); }

    int add_var(double lo = -kInf, double hi = kInf, double obj = 0.0) {
        objective.push_back(obj);
        bounds.push_back({lo, hi});
        return num_vars() - 1;
    }
    void add_constraint(std::vector<double> coeffs, Relation rel, double rhs) {
        constraints.push_back({std::move(coeffs), rel, rhs});
    }
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;              // meaningful iff Optimal
    std::vector<double> point;       // meaningful iff Optimal
};

struct SolverOptions {
    double eps = 1e-8;       // feasibility / optimality tolerance
    int max_iters = 50000;   // pivot cap shared by both phases
};

/// Largest absolute constraint/bound violation of `point`.
inline double max_violation(const LinearProgram& lp, const std::vector<double>& point) {
    double worst = 0.0;
    for (const auto& c : lp.constraints) {
        double lhs = 0.0;
        for (int j = 0; j < lp.num_vars(); ++j) lhs += c.coeffs[j] * point[j];
        switch (c.rel) {
            case Relation::LessEq: worst = std::max(worst, lhs - c.rhs); break;
            case Relation::GreaterEq: worst = std::max(worst, c.rhs - lhs); break;
            case Relation::Equal: worst = std::max(worst, std::fabs(lhs - c.rhs)); break;
        }
    }
    for (int j = 0; j < static_cast<int>(lp.bounds.size()); ++j) {
        if (lp.bounds[j].lower > -kInf) worst = std::max(worst, lp.bounds[j].lower - point[j]);
        if (lp.bounds[j].upper < kInf) worst = std::max(worst, point[j] - lp.bounds[j].upper);
    }
    return worst;
}

namespace detail {

// Standard-form tableau: maximize c'x, Ax = b, x >= 0, b >= 0.
// Bland's pivoting rule throughout, so no cycling.
class SimplexTableau {
  public:
    SimplexTableau(int rows, int cols) : m_(rows), n_(cols), t_(rows, std::vector<double>(cols + 1, 0.0)), basis_(rows, -1) {}

    std::vector<std::vector<double>>& rows() { return t_; }
    std::vector<int>& basis() { return basis_; }

    // Runs simplex on the current tableau for objective `obj` (maximization,
    // reduced costs computed from scratch). Only columns below `usable_cols`
    // may enter the basis. Returns false on unboundedness.
    bool optimize(const std::vector<double>& obj, const SolverOptions& opt, int& iters, int usable_cols = -1) {
        if (usable_cols < 0) usable_cols = n_;
        while (true) {
            if (++iters > opt.max_iters) throw NumericalFailure("simplex: iteration cap exceeded");
            std::vector<double> red = reduced_costs(obj);
            int enter = -1;
            for (int j = 0; j < usable_cols; ++j) {
                if (red[j] > opt.eps) { enter = j; break; }  // Bland: lowest index
            }
            if (enter < 0) return true;
            int leave = -1;
            double best_ratio = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (t_[i][enter] > opt.eps) {
                    double ratio = t_[i][n_] / t_[i][enter];
                    if (leave < 0 || ratio < best_ratio - opt.eps ||
                        (ratio < best_ratio + opt.eps && basis_[i] < basis_[leave])) {
                        leave = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }

    void pivot(int row, int col) {
        const double inv = 1.0 / t_[row][col];
        for (int c = 0; c <= n_; ++c) t_[row][c] *= inv;
        t_[row][col] = 1.0;
        for (int r = 0; r < m_; ++r) {
            if (r == row) continue;
            const double f = t_[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c <= n_; ++c) t_[r][c] -= f * t_[row][c];
            t_[r][col] = 0.0;
        }
        basis_[row] = col;
    }

    std::vector<double> reduced_costs(const std::vector<double>& obj) const {
        std::vector<double> red = obj;
        for (int i = 0; i < m_; ++i) {
            const double cb = obj[basis_[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j < n_; ++j) red[j] -= cb * t_[i][j];
        }
        // Basic columns read exactly zero.
        for (int i = 0; i < m_; ++i) red[basis_[i]] = 0.0;
        return red;
    }

    std::vector<double> basic_solution() const {
        std::vector<double> x(n_, 0.0);
        for (int i = 0; i < m_; ++i) x[basis_[i]] = t_[i][n_];
        return x;
    }

    int m_, n_;
    std::vector<std::vector<double>> t_;
    std::vector<int> basis_;
};

}  // namespace detail

/// Two-phase primal simplex. Status classification is exact for the given
/// tolerances; optimal points are primal-feasible within opt.eps.
inline LpSolution solve(const LinearProgram& lp, const SolverOptions& opt = {}) {
    const int n = lp.num_vars();
    if (!lp.bounds.empty() && static_cast<int>(lp.bounds.size()) != n)
        throw MalformedProgram("bounds size disagrees with variable count");
    for (const auto& c : lp.constraints) {
        if (static_cast<int>(c.coeffs.size()) != n)
            throw MalformedProgram("constraint length disagrees with variable count");
        if (!std::isfinite(c.rhs)) throw MalformedProgram("non-finite right-hand side");
        for (double v : c.coeffs)
            if (!std::isfinite(v)) throw MalformedProgram("non-finite coefficient");
    }
    for (double v : lp.objective)
        if (!std::isfinite(v)) throw MalformedProgram("non-finite objective coefficient");

    std::vector<Bounds> bounds = lp.bounds;
    if (bounds.empty()) bounds.assign(n, Bounds{});
    for (const auto& b : bounds) {
        if (b.lower > b.upper) return {LpStatus::Infeasible, 0.0, {}};
    }

    if (n == 0) {
        for (const auto& c : lp.constraints) {
            const bool ok = (c.rel == Relation::LessEq && 0.0 <= c.rhs + opt.eps) ||
                            (c.rel == Relation::GreaterEq && 0.0 >= c.rhs - opt.eps) ||
                            (c.rel == Relation::Equal && std::fabs(c.rhs) <= opt.eps);
            if (!ok) return {LpStatus::Infeasible, 0.0, {}};
        }
        return {LpStatus::Optimal, 0.0, {}};
    }

    // Substitute each variable by nonnegative ones:
    //   lower finite:        x = lo + u,        u >= 0  (u <= hi-lo added if hi finite)
    //   upper finite only:   x = hi - u,        u >= 0
    //   free:                x = u+ - u-,       u+, u- >= 0
    struct VarMap {
        int col_pos;   // column of the positive part
        int col_neg;   // column of the negated part (free vars), else -1
        double shift;  // additive constant
        double sign;   // +1 or -1 applied to col_pos
    };
    std::vector<VarMap> vmap(n);
    int cols = 0;
    for (int j = 0; j < n; ++j) {
        const Bounds& b = bounds[j];
        if (b.lower > -kInf) {
            vmap[j] = {cols++, -1, b.lower, 1.0};
        } else if (b.upper < kInf) {
            vmap[j] = {cols++, -1, b.upper, -1.0};
        } else {
            vmap[j] = {cols, cols + 1, 0.0, 1.0};
            cols += 2;
        }
    }

    struct Row {
        std::vector<double> a;
        Relation rel;
        double rhs;
    };
    std::vector<Row> rows;
    auto add_row = [&](const std::vector<double>& coeffs, Relation rel, double rhs) {
        Row r{std::vector<double>(cols, 0.0), rel, rhs};
        for (int j = 0; j < n; ++j) {
            const double a = coeffs[j];
            if (a == 0.0) continue;
            r.a[vmap[j].col_pos] += a * vmap[j].sign;
            if (vmap[j].col_neg >= 0) r.a[vmap[j].col_neg] -= a;
            r.rhs -= a * vmap[j].shift;
        }
        rows.push_back(std::move(r));
    };
    for (const auto& c : lp.constraints) add_row(c.coeffs, c.rel, c.rhs);
    for (int j = 0; j < n; ++j) {
        if (bounds[j].lower > -kInf && bounds[j].upper < kInf) {
            std::vector<double> unit(n, 0.0);
            unit[j] = 1.0;
            add_row(unit, Relation::LessEq, bounds[j].upper);
        }
    }

    const int m = static_cast<int>(rows.size());
    // Columns: structural | slack/surplus | artificial.
    int num_slack = 0;
    for (const auto& r : rows)
        if (r.rel != Relation::Equal) ++num_slack;
    const int total = cols + num_slack + m;  // one artificial per row, unused ones stay zero
    detail::SimplexTableau tab(m, total);

    std::vector<double> phase1_obj(total, 0.0);
    int slack_at = cols;
    const int art_base = cols + num_slack;
    for (int i = 0; i < m; ++i) {
        Row r = rows[i];
        if (r.rhs < 0) {
            for (double& v : r.a) v = -v;
            r.rhs = -r.rhs;
            if (r.rel == Relation::LessEq) r.rel = Relation::GreaterEq;
            else if (r.rel == Relation::GreaterEq) r.rel = Relation::LessEq;
        }
        auto& row = tab.rows()[i];
        for (int j = 0; j < cols; ++j) row[j] = r.a[j];
        row[total] = r.rhs;
        if (r.rel == Relation::LessEq) {
            row[slack_at] = 1.0;
            // Slack can start basic; no artificial needed.
            tab.basis()[i] = slack_at;
            ++slack_at;
        } else {
            if (r.rel == Relation::GreaterEq) row[slack_at++] = -1.0;
            row[art_base + i] = 1.0;
            tab.basis()[i] = art_base + i;
            phase1_obj[art_base + i] = -1.0;
        }
    }

    int iters = 0;
    bool any_artificial = false;
    for (int j = art_base; j < total; ++j)
        if (phase1_obj[j] != 0.0) any_artificial = true;

    if (any_artificial) {
        tab.optimize(phase1_obj, opt, iters);  // bounded above by 0
        double art_sum = 0.0;
        for (int i = 0; i < m; ++i)
            if (tab.basis()[i] >= art_base) art_sum += tab.rows()[i][total];
        if (art_sum > opt.eps) return {LpStatus::Infeasible, 0.0, {}};
        // Drive remaining (degenerate) artificials out of the basis.
        for (int i = 0; i < m; ++i) {
            if (tab.basis()[i] < art_base) continue;
            int enter = -1;
            for (int j = 0; j < art_base; ++j) {
                if (std::fabs(tab.rows()[i][j]) > opt.eps) { enter = j; break; }
            }
            if (enter >= 0) tab.pivot(i, enter);
            // else: redundant row; its artificial stays basic at zero, harmless.
        }
    }

    const double sgn = (lp.sense == Sense::Maximize) ? 1.0 : -1.0;
    std::vector<double> phase2_obj(total, 0.0);
    for (int j = 0; j < n; ++j) {
        const double c = sgn * lp.objective[j];
        if (c == 0.0) continue;
        phase2_obj[vmap[j].col_pos] += c * vmap[j].sign;
        if (vmap[j].col_neg >= 0) phase2_obj[vmap[j].col_neg] -= c;
    }
    // Artificial columns are barred from re-entering; any artificial still
    // basic sits on an inert (redundant) row with zero cost.
    if (!tab.optimize(phase2_obj, opt, iters, art_base)) return {LpStatus::Unbounded, 0.0, {}};

    const std::vector<double> u = tab.basic_solution();
    std::vector<double> x(n, 0.0);
    for (int j = 0; j < n; ++j) {
        x[j] = vmap[j].shift + vmap[j].sign * u[vmap[j].col_pos];
        if (vmap[j].col_neg >= 0) x[j] -= u[vmap[j].col_neg];
    }
    double value = 0.0;
    for (int j = 0; j < n; ++j) value += lp.objective[j] * x[j];
    return {LpStatus::Optimal, value, std::move(x)};
}

}  // namespace polystab
