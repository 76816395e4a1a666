#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guessbound/corpus.hpp"

namespace guessbound {

enum class BoundKind { upper, lower };
enum class BoundMethod { frequency_ub, prior_lb, sampling_lb, extended_lb, lp_lb, lp_ub };
// distribution_lambda bounds the population guessing curve; sample_lambda
// bounds the fraction of this concrete sample covered by the true top-G set.
enum class BoundTarget { distribution_lambda, sample_lambda };

const char* to_string(BoundKind kind);
const char* to_string(BoundMethod method);
const char* to_string(BoundTarget target);
BoundKind bound_kind_from_string(const std::string& s);
BoundMethod bound_method_from_string(const std::string& s);
BoundTarget bound_target_from_string(const std::string& s);

struct BoundPoint {
    std::uint64_t g = 0;
    double value = 0.0;      // clamped to [0,1]
    double raw_value = 0.0;  // pre-clamp formula output, may leave [0,1]
    BoundKind kind = BoundKind::lower;
    BoundMethod method = BoundMethod::sampling_lb;
    double delta = 0.0;  // total error probability
    BoundTarget target = BoundTarget::distribution_lambda;
    std::string provenance;  // winning j / idx, sub-deltas, ...
};

struct GuessingCurve {
    std::vector<BoundPoint> points;  // strictly increasing g
    std::string provenance;
};

// Ranked guesses from an external cracking model, best guess first.
struct ModelGuessList {
    std::vector<std::string> guesses;  // no duplicates
    std::string source_label;
};

// One token per line in rank order; lines starting with '#' are comments
// (an optional "# source:" header sets the label). Duplicate tokens rejected.
ModelGuessList load_model_guess_list(const std::string& path);

struct SplitBoundParams {
    std::uint64_t d = 0;
    double t = 0.0;
    double delta = 0.0;  // exp(-2 t^2 / d)

    static SplitBoundParams from_delta(std::uint64_t d, double delta);
    static SplitBoundParams from_t(std::uint64_t d, double t);
};

// epsilon with exp(-2 n eps^2) == delta, i.e. sqrt(ln(1/delta) / (2n)).
double mcdiarmid_epsilon(std::uint64_t n, double delta);

// t with exp(-2 t^2 / d) == delta, i.e. sqrt((d/2) ln(1/delta)).
double slack_t(std::uint64_t d, double delta);

// Upper bound from the empirical distribution. For sample_lambda the bound
// is deterministic (delta recorded as 0); for distribution_lambda a
// McDiarmid shift epsilon(n, delta) is added.
BoundPoint frequency_ub(const FrequencyTable& table, std::uint64_t g, double delta,
                        BoundTarget target = BoundTarget::distribution_lambda);

// Number of samples in d2 that land in the top-g set of d1.
std::uint64_t h_count(const Partition& part, std::uint64_t g);

BoundPoint sampling_lb(const Partition& part, std::uint64_t g,
                       const SplitBoundParams& params,
                       BoundTarget target = BoundTarget::distribution_lambda,
                       double delta_eps = 0.0);

// Lower bound at G = ceil(N*L) from the frequency encoding alone.
// delta_t and delta_eps are the two union-bound components; for
// sample_lambda delta_eps is ignored.
BoundPoint prior_lb(const FrequencyEncoding& enc, double L, std::uint64_t j,
                    double delta_t, double delta_eps,
                    BoundTarget target = BoundTarget::distribution_lambda);

// Maximizes prior_lb over j in [j_min, j_max] (default [2,1000]),
// recomputing t per j at fixed delta_t.
BoundPoint prior_lb_best(const FrequencyEncoding& enc, double L,
                         double delta_t, double delta_eps,
                         BoundTarget target = BoundTarget::distribution_lambda,
                         std::uint64_t j_min = 2, std::uint64_t j_max = 1000);

// Sampling lower bound extended with an external guess list: for
// g > Distinct(d1) the guesser appends the first g - Distinct(d1) model
// guesses not already present in d1.
BoundPoint extended_lb(const Partition& part, const ModelGuessList& model,
                       std::uint64_t g, const SplitBoundParams& params,
                       BoundTarget target = BoundTarget::distribution_lambda,
                       double delta_eps = 0.0);

}  // namespace guessbound
