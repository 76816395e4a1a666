#include "guessbound/lp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace guessbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GUESSBOUND_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

// Per-(mesh, n, params) band coefficients: coef[i][j] = x_j * bpdf(i, n, x_j)
// plus the scalar bpdf values used in the slack terms.
struct BandCache {
    std::vector<std::vector<double>> coef;
    std::vector<double> bp_xl, bp_qxl, bp_xhat, bp_qxhat;
};

BandCache make_cache(const Mesh& mesh, std::uint64_t n, const LpParams& params) {
    BandCache cache;
    const std::size_t bands = params.i_max + 1;
    cache.coef.assign(bands, std::vector<double>(mesh.l, 0.0));
    cache.bp_xl.resize(bands);
    cache.bp_qxl.resize(bands);
    cache.bp_xhat.resize(bands);
    cache.bp_qxhat.resize(bands);
    const double xl = mesh.floor_value();
    for (std::size_t i = 0; i < bands; ++i) {
        for (std::size_t j = 0; j < mesh.l; ++j)
            cache.coef[i][j] = mesh.values[j] * bpdf(i, n, mesh.values[j]);
        cache.bp_xl[i] = bpdf(i, n, xl);
        cache.bp_qxl[i] = bpdf(i, n, mesh.q * xl);
        if (i < params.xhat3.size()) {
            cache.bp_xhat[i] = bpdf(i, n, params.xhat3[i]);
            cache.bp_qxhat[i] = bpdf(i, n, std::min(1.0, mesh.q * params.xhat3[i]));
        }
    }
    return cache;
}

double good_turing_target(const FrequencyEncoding& enc, std::size_t i) {
    return double(i + 1) * double(enc.at(i + 1)) / double(enc.n - i);
}

enum class Task { lp1, lp1a, lp_lower, lp_upper };

const char* task_name(Task task) {
    switch (task) {
        case Task::lp1: return "lp1";
        case Task::lp1a: return "lp1a";
        case Task::lp_lower: return "lp_lower";
        case Task::lp_upper: return "lp_upper";
    }
    return "?";
}

// Shared transcription of Tasks 1 / 1a / 2 / 3. Variable layout:
// [0..l-1] = h_1..h_l, [l] = c, [l+1] = p (absent for Task 1).
// b = +1 lower-bound objective, -1 upper-bound (Tasks 2/3 fix b internally).
LpProblem build_task(Task task, std::uint64_t g, int b, const Mesh& mesh,
                     const FrequencyEncoding& enc, std::size_t idx,
                     const LpParams& params, const BandCache& cache) {
    const std::size_t l = mesh.l;
    const std::size_t max_idx = task == Task::lp1 ? l : l + 1;
    if (idx < 1 || idx > max_idx)
        throw std::invalid_argument("idx out of range for " + std::string(task_name(task)));
    if (b != 1 && b != -1) throw std::invalid_argument("b must be +1 or -1");
    if (enc.n <= params.i_max)
        throw std::invalid_argument("corpus too small for the requested i'");

    const bool has_p = task != Task::lp1;
    const double n = double(enc.n);
    const double q = mesh.q;
    const std::size_t nc = l;  // c index
    const std::size_t np = l + 1;

    LpProblem prob;
    prob.g = g;
    prob.idx = idx;
    prob.task = task_name(task);
    prob.sense = task == Task::lp_upper ? LpSense::maximize : LpSense::minimize;
    const std::size_t nvars = has_p ? l + 2 : l + 1;
    prob.objective.assign(nvars, 0.0);
    prob.var_lo.assign(nvars, 0.0);
    prob.var_up.assign(nvars, kInf);
    prob.var_names.resize(nvars);
    for (std::size_t j = 0; j < l; ++j) prob.var_names[j] = "h" + std::to_string(j + 1);
    prob.var_names[nc] = "c";
    if (has_p) {
        prob.var_names[np] = "p";
        prob.var_up[np] = 1.0;
    }

    // x_idx, including the idx = l+1 extension where h_{l+1} = G is fixed and
    // x_{l+1} depends on the bound direction.
    double x_idx;
    const bool virtual_idx = idx == l + 1;
    if (!virtual_idx) {
        x_idx = mesh.x(idx);
    } else if (task == Task::lp_upper || (task == Task::lp1a && b == -1)) {
        x_idx = mesh.floor_value();
    } else {
        x_idx = 0.0;
    }
    if (virtual_idx) prob.var_up[nc] = double(g);  // c <= h_{l+1} = G

    // Objective: sum_{j<idx} h_j x_j + c * x_idx (times b for Tasks 1/1a).
    const double obj_sign = task == Task::lp1 || task == Task::lp1a ? double(b) : 1.0;
    for (std::size_t j = 1; j < idx && j <= l; ++j)
        prob.objective[j - 1] = obj_sign * mesh.x(j);
    prob.objective[nc] = obj_sign * x_idx;

    // Constraint 1: sum_{j<idx} h_j + c = G.
    {
        LpRow row;
        row.coeffs.assign(nvars, 0.0);
        for (std::size_t j = 1; j < idx && j <= l; ++j) row.coeffs[j - 1] = 1.0;
        row.coeffs[nc] = 1.0;
        row.lo = row.up = double(g);
        prob.rows.push_back(std::move(row));
    }

    // Constraint 2: Good-Turing bands, scaled by N/(i+1) for conditioning.
    for (std::size_t i = 0; i <= params.i_max; ++i) {
        const double gt = good_turing_target(enc, i);
        const double eps2 = params.eps2[i];
        const double drop = double(i + 1) / (n - double(i));
        const double scale = n / double(i + 1);
        const double band_lo = gt - eps2 - drop;
        const double band_up = gt + eps2;

        auto base_row = [&] {
            LpRow row;
            row.coeffs.assign(nvars, 0.0);
            for (std::size_t j = 0; j < l; ++j) row.coeffs[j] = scale * cache.coef[i][j];
            row.lo = -kInf;
            row.up = kInf;
            return row;
        };

        if (task == Task::lp1) {
            LpRow row = base_row();
            row.lo = scale * band_lo;
            row.up = scale * band_up;
            prob.rows.push_back(std::move(row));
            continue;
        }

        // Lower side.
        {
            LpRow row = base_row();
            double p_coef = 0.0, rhs = band_lo;
            switch (task) {
                case Task::lp1a:
                    p_coef = i == 0 ? 1.0 : cache.bp_xl[i];
                    break;
                case Task::lp_lower: {
                    const double qf = std::pow(q, -double(i + 1));
                    p_coef = qf * (i == 0 ? 1.0 : cache.bp_qxl[i]);
                    rhs = qf * band_lo;
                    break;
                }
                case Task::lp_upper: {
                    const double inv = 1.0 / (1.0 + params.eps3[i]);
                    p_coef = inv * (i == 0 ? 1.0 : cache.bp_xl[i]);
                    rhs = inv * (band_lo - cache.bp_qxhat[i]);
                    break;
                }
                default: break;
            }
            row.coeffs[np] = scale * p_coef;
            row.lo = scale * rhs;
            prob.rows.push_back(std::move(row));
        }
        // Upper side.
        {
            LpRow row = base_row();
            double p_coef = 0.0, rhs = band_up;
            switch (task) {
                case Task::lp1a:
                    p_coef = i == 0 ? cache.bp_xl[i] : 0.0;
                    break;
                case Task::lp_lower: {
                    const double sf = 1.0 + params.eps3[i];
                    p_coef = i == 0 ? sf * cache.bp_qxl[i] : 0.0;
                    rhs = sf * band_up + cache.bp_xhat[i];
                    break;
                }
                case Task::lp_upper: {
                    const double qf = std::pow(q, double(i + 1));
                    p_coef = i == 0 ? q * cache.bp_xl[i] : 0.0;
                    rhs = qf * band_up;
                    break;
                }
                default: break;
            }
            row.coeffs[np] = scale * p_coef;
            row.up = scale * rhs;
            prob.rows.push_back(std::move(row));
        }
    }

    // Constraint 3: total mass.
    auto mass_row = [&] {
        LpRow row;
        row.coeffs.assign(nvars, 0.0);
        for (std::size_t j = 0; j < l; ++j) row.coeffs[j] = mesh.values[j];
        row.lo = -kInf;
        row.up = kInf;
        return row;
    };
    switch (task) {
        case Task::lp1: {
            LpRow row = mass_row();
            row.lo = row.up = 1.0;
            prob.rows.push_back(std::move(row));
            break;
        }
        case Task::lp1a: {
            LpRow row = mass_row();
            row.coeffs[np] = 1.0;
            row.lo = row.up = 1.0;
            prob.rows.push_back(std::move(row));
            break;
        }
        case Task::lp_lower: {
            LpRow lo_row = mass_row();  // (1-p)/q <= sum h x
            lo_row.coeffs[np] = 1.0 / q;
            lo_row.lo = 1.0 / q;
            prob.rows.push_back(std::move(lo_row));
            LpRow up_row = mass_row();  // sum h x <= 1 - p
            up_row.coeffs[np] = 1.0;
            up_row.up = 1.0;
            prob.rows.push_back(std::move(up_row));
            break;
        }
        case Task::lp_upper: {
            LpRow lo_row = mass_row();  // 1 - p <= sum h x
            lo_row.coeffs[np] = 1.0;
            lo_row.lo = 1.0;
            prob.rows.push_back(std::move(lo_row));
            LpRow up_row = mass_row();  // sum h x <= q (1 - p)
            up_row.coeffs[np] = q;
            up_row.up = q;
            prob.rows.push_back(std::move(up_row));
            break;
        }
    }

    // Constraint 4: c <= h_idx (a simple bound when idx = l+1).
    if (!virtual_idx) {
        LpRow row;
        row.coeffs.assign(nvars, 0.0);
        row.coeffs[nc] = 1.0;
        row.coeffs[idx - 1] = -1.0;
        row.lo = -kInf;
        row.up = 0.0;
        prob.rows.push_back(std::move(row));
    }
    return prob;
}

struct SweepResult {
    bool any_optimal = false;
    double best = 0.0;
    std::size_t best_idx = 0;
    std::vector<std::size_t> failed_idx;
};

SweepResult sweep_idx(Task task, int b, std::uint64_t g, const Mesh& mesh,
                      const FrequencyEncoding& enc, const LpParams& params,
                      const LpSolver& solver, const LpSweepOptions& opts,
                      bool take_min) {
    const BandCache cache = make_cache(mesh, enc.n, params);
    const std::size_t max_idx = task == Task::lp1 ? mesh.l : mesh.l + 1;

    SweepResult result;
    std::mutex mtx;
    std::atomic<std::size_t> next{1};
    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx > max_idx) break;
            LpProblem prob = build_task(task, g, b, mesh, enc, idx, params, cache);
            if (!opts.dump_dir.empty()) {
                std::ofstream out(opts.dump_dir + "/" + prob.task + "_g" +
                                  std::to_string(g) + "_idx" + std::to_string(idx) + ".lp");
                out << to_lp_format(prob);
            }
            const LpOutcome outcome = solver.solve(prob);
            std::lock_guard<std::mutex> lock(mtx);
            if (outcome.status == LpStatus::numerical_failure) {
                result.failed_idx.push_back(idx);
            } else if (outcome.status == LpStatus::optimal) {
                // Tasks 1/1a encode the upper bound as min of the negated
                // objective; undo the sign here. Tasks 2/3 carry their own sense.
                const bool negated =
                    (task == Task::lp1 || task == Task::lp1a) && b == -1;
                const double value = negated ? -outcome.value : outcome.value;
                if (!result.any_optimal || (take_min ? value < result.best
                                                     : value > result.best)) {
                    result.any_optimal = true;
                    result.best = value;
                    result.best_idx = idx;
                }
            }
        }
    };

    const int threads = std::min<int>(resolve_threads(opts.threads), int(max_idx));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (!result.failed_idx.empty()) {
        std::sort(result.failed_idx.begin(), result.failed_idx.end());
        std::ostringstream msg;
        msg << task_name(task) << " solver failure at idx:";
        for (auto i : result.failed_idx) msg << ' ' << i;
        throw std::runtime_error(msg.str());
    }
    return result;
}

BoundPoint sweep_to_point(const SweepResult& result, std::uint64_t g,
                          BoundMethod method, BoundKind kind, double delta,
                          const char* task) {
    if (!result.any_optimal)
        throw IidInconsistency{std::string(task) +
                               ": every idx instance infeasible; the corpus is "
                               "inconsistent with IID sampling"};
    BoundPoint pt;
    pt.g = g;
    pt.kind = kind;
    pt.method = method;
    pt.target = BoundTarget::distribution_lambda;
    pt.raw_value = result.best;
    pt.value = std::min(1.0, std::max(0.0, result.best));
    pt.delta = delta;
    pt.provenance = "idx=" + std::to_string(result.best_idx);
    return pt;
}

}  // namespace

LpParams LpParams::make(std::uint64_t n, double q, std::size_t i_max,
                        const std::vector<double>& delta4,
                        const std::vector<double>& xhat_multipliers) {
    if (delta4.size() != i_max + 1 || xhat_multipliers.size() != i_max + 1)
        throw std::invalid_argument("delta4/xhat_multipliers must have i_max+1 entries");
    LpParams params;
    params.i_max = i_max;
    for (std::size_t i = 0; i <= i_max; ++i) {
        const double nd = double(n);
        // eps2 with exp(-2 (n-i)^2 eps^2 / (n (i+1)^2)) == delta4[i]
        params.eps2.push_back(std::sqrt(nd * double(i + 1) * double(i + 1) *
                                        std::log(1.0 / delta4[i]) /
                                        (2.0 * (nd - double(i)) * (nd - double(i)))));
        const double xhat = xhat_multipliers[i] / nd;
        params.xhat3.push_back(xhat);
        params.eps3.push_back(derive_eps3(q, xhat, n, i));
    }
    params.delta = params.recompute_delta(n);
    return params;
}

double LpParams::recompute_delta(std::uint64_t n) const {
    double total = 0.0;
    const double nd = double(n);
    for (std::size_t i = 0; i <= i_max; ++i) {
        const double num = 2.0 * (nd - double(i)) * (nd - double(i)) * eps2[i] * eps2[i];
        total += std::exp(-num / (nd * double(i + 1) * double(i + 1)));
    }
    return 2.0 * total;
}

LpProblem build_lp1(std::uint64_t g, int b, const Mesh& mesh,
                    const FrequencyEncoding& enc, std::size_t idx,
                    const LpParams& params) {
    return build_task(Task::lp1, g, b, mesh, enc, idx, params,
                      make_cache(mesh, enc.n, params));
}

LpProblem build_lp1a(std::uint64_t g, int b, const Mesh& mesh,
                     const FrequencyEncoding& enc, std::size_t idx,
                     const LpParams& params) {
    return build_task(Task::lp1a, g, b, mesh, enc, idx, params,
                      make_cache(mesh, enc.n, params));
}

LpProblem build_lp_lower(std::uint64_t g, const Mesh& mesh,
                         const FrequencyEncoding& enc, std::size_t idx,
                         const LpParams& params) {
    return build_task(Task::lp_lower, g, 1, mesh, enc, idx, params,
                      make_cache(mesh, enc.n, params));
}

LpProblem build_lp_upper(std::uint64_t g, const Mesh& mesh,
                         const FrequencyEncoding& enc, std::size_t idx,
                         const LpParams& params) {
    return build_task(Task::lp_upper, g, -1, mesh, enc, idx, params,
                      make_cache(mesh, enc.n, params));
}

BoundPoint lp_lower_bound(std::uint64_t g, const Mesh& mesh,
                          const FrequencyEncoding& enc, const LpParams& params,
                          const LpSolver& solver, const LpSweepOptions& opts) {
    const auto result =
        sweep_idx(Task::lp_lower, 1, g, mesh, enc, params, solver, opts, true);
    return sweep_to_point(result, g, BoundMethod::lp_lb, BoundKind::lower,
                          params.delta, "lp_lower");
}

BoundPoint lp_upper_bound(std::uint64_t g, const Mesh& mesh,
                          const FrequencyEncoding& enc, const LpParams& params,
                          const LpSolver& solver, const LpSweepOptions& opts) {
    const auto result =
        sweep_idx(Task::lp_upper, -1, g, mesh, enc, params, solver, opts, false);
    BoundPoint pt = sweep_to_point(result, g, BoundMethod::lp_ub, BoundKind::upper,
                                   params.delta, "lp_upper");
    return pt;
}

BoundPoint lp1_lower_bound(std::uint64_t g, const Mesh& mesh,
                           const FrequencyEncoding& enc, const LpParams& params,
                           const LpSolver& solver, const LpSweepOptions& opts) {
    const auto result =
        sweep_idx(Task::lp1, 1, g, mesh, enc, params, solver, opts, true);
    return sweep_to_point(result, g, BoundMethod::lp_lb, BoundKind::lower,
                          params.delta, "lp1");
}

BoundPoint lp1_upper_bound(std::uint64_t g, const Mesh& mesh,
                           const FrequencyEncoding& enc, const LpParams& params,
                           const LpSolver& solver, const LpSweepOptions& opts) {
    const auto result =
        sweep_idx(Task::lp1, -1, g, mesh, enc, params, solver, opts, false);
    return sweep_to_point(result, g, BoundMethod::lp_ub, BoundKind::upper,
                          params.delta, "lp1");
}

IidReport check_iid_consistency(const FrequencyEncoding& enc, const Mesh& mesh,
                                const LpParams& params, const LpSolver& solver) {
    if (enc.n == 0) throw std::invalid_argument("empty corpus");
    const BandCache cache = make_cache(mesh, enc.n, params);
    // Non-binding budget: the mass row already caps sum(h) at 1/x_l = 1e4*n.
    const std::uint64_t g_cap = std::uint64_t(2e4 * double(enc.n));

    IidReport report;
    report.consistent = true;
    for (Task task : {Task::lp_lower, Task::lp_upper}) {
        LpProblem prob = build_task(task, g_cap, task == Task::lp_lower ? 1 : -1,
                                    mesh, enc, mesh.l + 1, params, cache);
        std::fill(prob.objective.begin(), prob.objective.end(), 0.0);  // feasibility only
        LpOutcome outcome = solver.solve(prob);
        if (outcome.status == LpStatus::infeasible) {
            // Second attempt at a 10x relaxed feasibility tolerance before
            // declaring the corpus inconsistent.
            const auto* simplex = dynamic_cast<const SimplexSolver*>(&solver);
            SimplexSolver relaxed((simplex ? simplex->feasibility_tolerance() : 1e-9) *
                                  10.0);
            outcome = relaxed.solve(prob);
        }
        if (outcome.status == LpStatus::infeasible) {
            report.consistent = false;
            report.detail += std::string(prob.task) + " constraint system infeasible; ";
            report.violated_rows = outcome.violated_rows;
        } else if (outcome.status == LpStatus::numerical_failure) {
            throw std::runtime_error("iid check: solver failure on " + prob.task);
        }
    }
    if (report.consistent) report.detail = "feasible under both constraint systems";
    return report;
}

std::string to_lp_format(const LpProblem& problem) {
    std::ostringstream out;
    out.precision(17);
    out << "\\ task=" << problem.task << " g=" << problem.g << " idx=" << problem.idx
        << "\n";
    out << (problem.sense == LpSense::minimize ? "Minimize" : "Maximize") << "\n obj:";
    for (std::size_t v = 0; v < problem.num_vars(); ++v)
        if (problem.objective[v] != 0.0)
            out << " + " << problem.objective[v] << ' ' << problem.var_names[v];
    out << "\nSubject To\n";
    for (std::size_t r = 0; r < problem.rows.size(); ++r) {
        const auto& row = problem.rows[r];
        auto write_lhs = [&] {
            for (std::size_t v = 0; v < problem.num_vars(); ++v)
                if (row.coeffs[v] != 0.0)
                    out << " + " << row.coeffs[v] << ' ' << problem.var_names[v];
        };
        if (std::isfinite(row.lo) && row.lo == row.up) {
            out << " r" << r << ":";
            write_lhs();
            out << " = " << row.lo << "\n";
            continue;
        }
        if (std::isfinite(row.lo)) {
            out << " r" << r << "l:";
            write_lhs();
            out << " >= " << row.lo << "\n";
        }
        if (std::isfinite(row.up)) {
            out << " r" << r << "u:";
            write_lhs();
            out << " <= " << row.up << "\n";
        }
    }
    out << "Bounds\n";
    for (std::size_t v = 0; v < problem.num_vars(); ++v) {
        out << ' ' << problem.var_lo[v] << " <= " << problem.var_names[v];
        if (std::isfinite(problem.var_up[v])) out << " <= " << problem.var_up[v];
        out << "\n";
    }
    out << "End\n";
    return out.str();
}

}  // namespace guessbound
