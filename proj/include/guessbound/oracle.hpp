#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "guessbound/bounds.hpp"
#include "guessbound/corpus.hpp"
#include "guessbound/mesh.hpp"

namespace guessbound {

// Synthetic ground-truth distribution with exactly computable guessing
// curve. Only the test/simulation side of the artifact sees this.
struct KnownDistribution {
    std::vector<double> probs;  // non-increasing, sums to 1 (within 1e-9)
    std::size_t k = 0;

    std::string token(std::size_t index) const;  // deterministic label per rank
};

KnownDistribution make_uniform(std::size_t k);
KnownDistribution make_zipf(std::size_t k, double s);

// Distribution with exactly hist[j] tokens at probability mesh.x(j+1).
// Requires sum_j hist[j] * x_j == 1 within 1e-9.
KnownDistribution make_mesh_aligned(const Mesh& mesh,
                                    const std::vector<std::uint64_t>& hist);

double exact_lambda(const KnownDistribution& dist, std::uint64_t g);

// n iid draws via the alias method; deterministic per seed.
SampleCorpus sample(const KnownDistribution& dist, std::size_t n, std::uint64_t seed);

// CDF-Zipf model curve min(y * g^r, 1).
double cdf_zipf(double y, double r, std::uint64_t g);

struct CoverageMethodStats {
    std::uint64_t violations = 0;  // trials where the bound excluded lambda_G
    std::uint64_t trials = 0;
    double rate() const { return trials ? double(violations) / double(trials) : 0.0; }
};

struct CoverageReport {
    std::uint64_t trials = 0;
    std::uint64_t base_seed = 0;
    std::map<std::string, CoverageMethodStats> per_method;
    // mean upper-lower bracket width per G over non-violating trials
    std::map<std::uint64_t, double> bracket_width;
    std::string to_json() const;
};

struct CoverageConfig {
    std::vector<std::uint64_t> g_grid;
    std::uint64_t trials = 0;
    std::uint64_t base_seed = 1;
    int threads = 0;  // 0 = GUESSBOUND_THREADS or hardware
};

// Per-trial hook: given the fresh sample, return bound points to audit.
// A violation is a lower bound strictly above lambda_G or an upper bound
// strictly below it.
using TrialBounds =
    std::function<std::vector<BoundPoint>(const SampleCorpus&, std::uint64_t trial_seed)>;

CoverageReport coverage_trial(const KnownDistribution& dist, std::size_t n,
                              const CoverageConfig& config, const TrialBounds& bounds);

}  // namespace guessbound
