#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "guessbound/lp.hpp"

// Dense bounded-variable two-phase primal simplex. The LPs in this project
// have very few rows (budget + Good-Turing bands + mass + c-coupling), so a
// full basis refactorization per iteration is cheap and keeps the numerics
// honest. Phase 1 drives out-of-bound basic variables back into their boxes
// with a composite infeasibility objective.

namespace guessbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum VarStatus : std::int8_t { AT_LOWER, AT_UPPER, BASIC, FREE_ZERO };

struct Tableau {
    std::size_t m = 0;       // rows
    std::size_t ns = 0;      // structural vars
    std::size_t nt = 0;      // structural + slack
    // Column-major structural matrix; slack column r is -e_r.
    const LpProblem* prob = nullptr;
    std::vector<double> lo, up;     // nt
    std::vector<double> cost;       // nt (phase-2 costs, minimize)
    std::vector<VarStatus> status;  // nt
    std::vector<std::size_t> basis; // m
    std::vector<double> x_basic;    // m
    std::vector<double> lu;         // m*m factor
    std::vector<std::size_t> piv;   // m

    double col(std::size_t var, std::size_t row) const {
        if (var < ns) return prob->rows[row].coeffs[var];
        return var - ns == row ? -1.0 : 0.0;
    }

    double nonbasic_value(std::size_t var) const {
        switch (status[var]) {
            case AT_LOWER: return lo[var];
            case AT_UPPER: return up[var];
            default: return 0.0;
        }
    }

    bool factorize() {
        lu.assign(m * m, 0.0);
        piv.resize(m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) lu[r * m + c] = col(basis[c], r);
        // LU with partial pivoting
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t best = k;
            double best_abs = std::fabs(lu[k * m + k]);
            for (std::size_t r = k + 1; r < m; ++r) {
                const double a = std::fabs(lu[r * m + k]);
                if (a > best_abs) { best_abs = a; best = r; }
            }
            if (best_abs < 1e-13) return false;
            piv[k] = best;
            if (best != k)
                for (std::size_t c = 0; c < m; ++c)
                    std::swap(lu[k * m + c], lu[best * m + c]);
            const double pivot = lu[k * m + k];
            for (std::size_t r = k + 1; r < m; ++r) {
                const double f = lu[r * m + k] / pivot;
                lu[r * m + k] = f;
                for (std::size_t c = k + 1; c < m; ++c) lu[r * m + c] -= f * lu[k * m + c];
            }
        }
        return true;
    }

    void solve_lu(std::vector<double>& b) const {  // B z = b
        // Rows were swapped in full during factorization, so the whole
        // permutation must be applied before the forward elimination.
        for (std::size_t k = 0; k < m; ++k)
            if (piv[k] != k) std::swap(b[k], b[piv[k]]);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t r = k + 1; r < m; ++r) b[r] -= lu[r * m + k] * b[k];
        for (std::size_t k = m; k-- > 0;) {
            for (std::size_t c = k + 1; c < m; ++c) b[k] -= lu[k * m + c] * b[c];
            b[k] /= lu[k * m + k];
        }
    }

    void solve_lu_transposed(std::vector<double>& b) const {  // B^T z = b
        // (P A)^T = A^T P^T; solve U^T y = b, then L^T z = y, then undo pivots.
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t c = 0; c < k; ++c) b[k] -= lu[c * m + k] * b[c];
            b[k] /= lu[k * m + k];
        }
        for (std::size_t k = m; k-- > 0;)
            for (std::size_t r = k + 1; r < m; ++r) b[k] -= lu[r * m + k] * b[r];
        for (std::size_t k = m; k-- > 0;)
            if (piv[k] != k) std::swap(b[k], b[piv[k]]);
    }

    void compute_basics() {
        std::vector<double> rhs(m, 0.0);
        for (std::size_t v = 0; v < nt; ++v) {
            if (status[v] == BASIC) continue;
            const double val = nonbasic_value(v);
            if (val == 0.0) continue;
            if (v < ns) {
                for (std::size_t r = 0; r < m; ++r)
                    rhs[r] -= prob->rows[r].coeffs[v] * val;
            } else {
                rhs[v - ns] += val;
            }
        }
        solve_lu(rhs);
        x_basic = std::move(rhs);
    }
};

struct SolveResult {
    LpStatus status = LpStatus::numerical_failure;
    double value = 0.0;
    std::vector<double> solution;
    std::vector<std::size_t> violated_rows;
};

SolveResult run_simplex(const LpProblem& prob, double feas_tol) {
    Tableau t;
    t.m = prob.rows.size();
    t.ns = prob.num_vars();
    t.nt = t.ns + t.m;
    t.prob = &prob;

    t.lo.resize(t.nt);
    t.up.resize(t.nt);
    t.cost.assign(t.nt, 0.0);
    const double sign = prob.sense == LpSense::minimize ? 1.0 : -1.0;
    for (std::size_t v = 0; v < t.ns; ++v) {
        t.lo[v] = prob.var_lo[v];
        t.up[v] = prob.var_up[v];
        t.cost[v] = sign * prob.objective[v];
    }
    for (std::size_t r = 0; r < t.m; ++r) {
        t.lo[t.ns + r] = prob.rows[r].lo;
        t.up[t.ns + r] = prob.rows[r].up;
    }

    t.status.assign(t.nt, AT_LOWER);
    for (std::size_t v = 0; v < t.nt; ++v) {
        if (std::isfinite(t.lo[v])) t.status[v] = AT_LOWER;
        else if (std::isfinite(t.up[v])) t.status[v] = AT_UPPER;
        else t.status[v] = FREE_ZERO;
    }
    t.basis.resize(t.m);
    for (std::size_t r = 0; r < t.m; ++r) {
        t.basis[r] = t.ns + r;
        t.status[t.ns + r] = BASIC;
    }

    const std::size_t max_iters = 20000;
    const double rc_tol = 1e-9;
    std::size_t stall = 0;
    double last_merit = kInf;
    bool last_phase1 = true;

    std::vector<double> cb(t.m), y, w, col_cache(t.m);

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        if (!t.factorize()) return {LpStatus::numerical_failure, 0.0, {}, {}};
        t.compute_basics();

        // Infeasibility of the current basic solution.
        double infeas = 0.0;
        for (std::size_t r = 0; r < t.m; ++r) {
            const std::size_t v = t.basis[r];
            const double x = t.x_basic[r];
            if (x < t.lo[v] - feas_tol) infeas += t.lo[v] - x;
            else if (x > t.up[v] + feas_tol) infeas += x - t.up[v];
        }
        const bool phase1 = infeas > 0.0;

        // Objective for this phase (minimize), costs on basics only in phase 1.
        double merit;
        if (phase1) {
            for (std::size_t r = 0; r < t.m; ++r) {
                const std::size_t v = t.basis[r];
                const double x = t.x_basic[r];
                cb[r] = (x > t.up[v] + feas_tol) ? 1.0
                        : (x < t.lo[v] - feas_tol) ? -1.0 : 0.0;
            }
            merit = infeas;
        } else {
            for (std::size_t r = 0; r < t.m; ++r) cb[r] = t.cost[t.basis[r]];
            merit = 0.0;
            for (std::size_t r = 0; r < t.m; ++r) merit += cb[r] * t.x_basic[r];
            for (std::size_t v = 0; v < t.nt; ++v)
                if (t.status[v] != BASIC) merit += t.cost[v] * t.nonbasic_value(v);
        }
        if (phase1 != last_phase1) { stall = 0; last_merit = kInf; }
        last_phase1 = phase1;
        const bool use_bland = stall > 60;
        if (merit < last_merit - 1e-12 * (1.0 + std::fabs(last_merit))) stall = 0;
        else ++stall;
        last_merit = merit;

        // Reduced costs: y solves B^T y = c_B; rc_j = c_j - y . a_j.
        y = cb;
        t.solve_lu_transposed(y);

        std::size_t enter = t.nt;
        int enter_dir = 0;  // +1 increase, -1 decrease
        double best_score = rc_tol;
        for (std::size_t v = 0; v < t.nt; ++v) {
            if (t.status[v] == BASIC) continue;
            double dot = 0.0;
            if (v < t.ns) {
                for (std::size_t r = 0; r < t.m; ++r)
                    dot += y[r] * prob.rows[r].coeffs[v];
            } else {
                dot = -y[v - t.ns];
            }
            const double cj = phase1 ? 0.0 : t.cost[v];
            const double rc = cj - dot;
            int dir = 0;
            if (t.status[v] == AT_LOWER && rc < -best_score) dir = +1;
            else if (t.status[v] == AT_UPPER && rc > best_score) dir = -1;
            else if (t.status[v] == FREE_ZERO && std::fabs(rc) > best_score)
                dir = rc < 0 ? +1 : -1;
            if (dir != 0) {
                enter = v;
                enter_dir = dir;
                if (use_bland) break;
                best_score = std::fabs(rc);
            }
        }

        if (enter == t.nt) {
            if (phase1) {
                // Optimal for the infeasibility objective but still infeasible.
                SolveResult res;
                res.status = LpStatus::infeasible;
                for (std::size_t r = 0; r < t.m; ++r) {
                    const std::size_t v = t.basis[r];
                    if (t.x_basic[r] < t.lo[v] - feas_tol ||
                        t.x_basic[r] > t.up[v] + feas_tol) {
                        res.violated_rows.push_back(v >= t.ns ? v - t.ns : r);
                    }
                }
                return res;
            }
            // Optimal.
            SolveResult res;
            res.status = LpStatus::optimal;
            res.solution.assign(t.ns, 0.0);
            for (std::size_t v = 0; v < t.ns; ++v)
                if (t.status[v] != BASIC) res.solution[v] = t.nonbasic_value(v);
            for (std::size_t r = 0; r < t.m; ++r)
                if (t.basis[r] < t.ns) res.solution[t.basis[r]] = t.x_basic[r];
            double obj = 0.0;
            for (std::size_t v = 0; v < t.ns; ++v)
                obj += prob.objective[v] * res.solution[v];
            res.value = obj;
            return res;
        }

        // Direction of basic variables: dx_B = -B^-1 a_enter * step * dir.
        for (std::size_t r = 0; r < t.m; ++r) col_cache[r] = t.col(enter, r);
        w = col_cache;
        t.solve_lu(w);

        // Ratio test. Entering moves by step >= 0 in direction enter_dir;
        // basic r moves at rate -w[r] * enter_dir. In phase 1 a basic beyond
        // its violated bound does not block while moving further away (its
        // cost is already counted); it blocks when it reaches the violated
        // bound moving back in.
        double step = kInf;
        std::size_t leave = t.nt;  // t.nt => bound flip of entering var
        bool leave_to_upper = false;
        const double bound_span = t.up[enter] - t.lo[enter];
        if (std::isfinite(bound_span) && t.status[enter] != FREE_ZERO)
            step = bound_span;
        const double piv_tol = 1e-11;
        for (std::size_t r = 0; r < t.m; ++r) {
            const double rate = -w[r] * double(enter_dir);
            if (std::fabs(rate) < piv_tol) continue;
            const std::size_t v = t.basis[r];
            const double x = t.x_basic[r];
            const bool below = x < t.lo[v] - feas_tol;
            const bool above = x > t.up[v] + feas_tol;
            double limit = kInf;
            bool to_upper = false;
            if (rate > 0) {
                if (below) { limit = (t.lo[v] - x) / rate; }
                else if (above) { continue; }  // moving further up, no block
                else if (std::isfinite(t.up[v])) { limit = (t.up[v] - x) / rate; to_upper = true; }
            } else {
                if (above) { limit = (t.up[v] - x) / rate; to_upper = true; }
                else if (below) { continue; }
                else if (std::isfinite(t.lo[v])) { limit = (t.lo[v] - x) / rate; }
            }
            limit = std::max(limit, 0.0);
            const bool tie = leave != t.nt && limit < step + 1e-12 &&
                             std::fabs(w[r]) > std::fabs(w[leave]);
            if (limit < step - 1e-12 || tie) {
                step = std::min(step, limit);
                leave = r;
                leave_to_upper = to_upper;
            }
        }

        if (!std::isfinite(step)) {
            if (phase1) return {LpStatus::numerical_failure, 0.0, {}, {}};
            // Unbounded objective; treat as a solver failure for this artifact's
            // problem class (all shipped LPs are bounded by construction).
            return {LpStatus::numerical_failure, 0.0, {}, {}};
        }

        if (leave == t.nt) {
            // Bound flip: entering travels to its other bound.
            t.status[enter] = enter_dir > 0 ? AT_UPPER : AT_LOWER;
            continue;
        }

        // Pivot: entering becomes basic; leaving rests at the bound it hit.
        const std::size_t leaving_var = t.basis[leave];
        t.status[leaving_var] = leave_to_upper ? AT_UPPER : AT_LOWER;
        if (!std::isfinite(leave_to_upper ? t.up[leaving_var] : t.lo[leaving_var]))
            t.status[leaving_var] = FREE_ZERO;  // cannot happen for boxed leave
        t.basis[leave] = enter;
        t.status[enter] = BASIC;
    }
    return {LpStatus::numerical_failure, 0.0, {}, {}};
}

}  // namespace

double LpProblem::max_violation(const std::vector<double>& assignment) const {
    double worst = 0.0;
    for (std::size_t v = 0; v < num_vars(); ++v) {
        if (std::isfinite(var_lo[v])) worst = std::max(worst, var_lo[v] - assignment[v]);
        if (std::isfinite(var_up[v])) worst = std::max(worst, assignment[v] - var_up[v]);
    }
    for (const auto& row : rows) {
        double lhs = 0.0;
        for (std::size_t v = 0; v < num_vars(); ++v) lhs += row.coeffs[v] * assignment[v];
        if (std::isfinite(row.lo)) worst = std::max(worst, row.lo - lhs);
        if (std::isfinite(row.up)) worst = std::max(worst, lhs - row.up);
    }
    return worst;
}

LpOutcome SimplexSolver::solve(const LpProblem& problem) const {
    SolveResult res = run_simplex(problem, feas_tol_);
    if (res.status != LpStatus::optimal) {
        // One retry at a relaxed tolerance before reporting the verdict;
        // guards against false non-IID calls on marginal numerics.
        res = run_simplex(problem, feas_tol_ * 10.0);
    }
    LpOutcome out;
    out.status = res.status;
    out.value = res.value;
    out.solution = std::move(res.solution);
    out.violated_rows = std::move(res.violated_rows);
    return out;
}

}  // namespace guessbound
