#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "guessbound/bounds.hpp"
#include "guessbound/corpus.hpp"
#include "guessbound/mesh.hpp"

namespace guessbound {

// Slack parameters for the Good-Turing band constraints. eps2[i] controls
// the concentration band for count i, eps3[i] the mesh-rounding slack.
struct LpParams {
    std::size_t i_max = 0;       // i' (bands run i = 0..i_max)
    std::vector<double> eps2;    // size i_max+1
    std::vector<double> xhat3;   // size i_max+1
    std::vector<double> eps3;    // derived from xhat3
    double delta = 0.0;          // 2 * sum_i exp(-2 (n-i)^2 eps2_i^2 / (n (i+1)^2))

    // Builds the parameter set from per-band error probabilities delta4 and
    // xhat multipliers (applied as multiplier / n).
    static LpParams make(std::uint64_t n, double q, std::size_t i_max,
                         const std::vector<double>& delta4,
                         const std::vector<double>& xhat_multipliers);

    double recompute_delta(std::uint64_t n) const;
};

enum class LpSense { minimize, maximize };

struct LpRow {
    std::vector<double> coeffs;  // dense, one per variable
    double lo = 0.0;             // -inf allowed
    double up = 0.0;             // +inf allowed
};

// Boxed-variable, boxed-row linear program. Variables are h_1..h_l, then c,
// then (tasks 1a/2/3) the tail mass p.
struct LpProblem {
    LpSense sense = LpSense::minimize;
    std::vector<double> objective;
    std::vector<double> var_lo, var_up;
    std::vector<std::string> var_names;
    std::vector<LpRow> rows;
    // metadata
    std::uint64_t g = 0;
    std::size_t idx = 0;
    std::string task;

    std::size_t num_vars() const { return objective.size(); }
    // Max row residual of an assignment against row and variable boxes.
    double max_violation(const std::vector<double>& assignment) const;
};

enum class LpStatus { optimal, infeasible, numerical_failure };

struct LpOutcome {
    LpStatus status = LpStatus::numerical_failure;
    double value = 0.0;
    std::vector<double> solution;
    std::vector<std::size_t> violated_rows;  // best available certificate
};

class LpSolver {
public:
    virtual ~LpSolver() = default;
    virtual LpOutcome solve(const LpProblem& problem) const = 0;
};

// Dense bounded-variable two-phase simplex. Feasibility tolerance is
// absolute on row residuals; one automatic retry at 10x the tolerance
// before reporting infeasible or failure.
class SimplexSolver : public LpSolver {
public:
    explicit SimplexSolver(double feas_tol = 1e-9) : feas_tol_(feas_tol) {}
    LpOutcome solve(const LpProblem& problem) const override;
    double feasibility_tolerance() const { return feas_tol_; }

private:
    double feas_tol_;
};

// LP builders. idx ranges over 1..l for Task 1 and 1..l+1 for Tasks 1a/2/3.
// b = +1 builds the lower-bound objective, b = -1 the upper-bound one.
LpProblem build_lp1(std::uint64_t g, int b, const Mesh& mesh,
                    const FrequencyEncoding& enc, std::size_t idx,
                    const LpParams& params);
LpProblem build_lp1a(std::uint64_t g, int b, const Mesh& mesh,
                     const FrequencyEncoding& enc, std::size_t idx,
                     const LpParams& params);
LpProblem build_lp_lower(std::uint64_t g, const Mesh& mesh,
                         const FrequencyEncoding& enc, std::size_t idx,
                         const LpParams& params);
LpProblem build_lp_upper(std::uint64_t g, const Mesh& mesh,
                         const FrequencyEncoding& enc, std::size_t idx,
                         const LpParams& params);

struct LpSweepOptions {
    int threads = 0;          // 0 = GUESSBOUND_THREADS or hardware
    std::string dump_dir;     // when set, every instance is dumped as .lp text
};

// min / max over the idx sweep of Tasks 2 / 3. Infeasible idx instances are
// skipped; if every instance is infeasible the corpus is flagged as
// inconsistent with IID sampling (throws IidInconsistency).
BoundPoint lp_lower_bound(std::uint64_t g, const Mesh& mesh,
                          const FrequencyEncoding& enc, const LpParams& params,
                          const LpSolver& solver, const LpSweepOptions& opts = {});
BoundPoint lp_upper_bound(std::uint64_t g, const Mesh& mesh,
                          const FrequencyEncoding& enc, const LpParams& params,
                          const LpSolver& solver, const LpSweepOptions& opts = {});

// Idealized-mesh bounds (Task 1); valid when the distribution is known to be
// mesh-consistent. Used for the LP1-vs-final comparison.
BoundPoint lp1_lower_bound(std::uint64_t g, const Mesh& mesh,
                           const FrequencyEncoding& enc, const LpParams& params,
                           const LpSolver& solver, const LpSweepOptions& opts = {});
BoundPoint lp1_upper_bound(std::uint64_t g, const Mesh& mesh,
                           const FrequencyEncoding& enc, const LpParams& params,
                           const LpSolver& solver, const LpSweepOptions& opts = {});

struct IidInconsistency {
    std::string detail;
};

struct IidReport {
    bool consistent = false;
    std::string detail;
    std::vector<std::size_t> violated_rows;
};

// Feasibility-only solve of the LPlower/LPupper constraint systems.
// Inconsistent is reported only after a retry at 10x relaxed tolerance
// also finds no feasible point.
IidReport check_iid_consistency(const FrequencyEncoding& enc, const Mesh& mesh,
                                const LpParams& params, const LpSolver& solver);

// Writes a problem in CPLEX LP text format (offline debugging aid).
std::string to_lp_format(const LpProblem& problem);

}  // namespace guessbound
