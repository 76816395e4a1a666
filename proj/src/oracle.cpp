#include "guessbound/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace guessbound {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GUESSBOUND_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

void validate(const KnownDistribution& dist, double mass_tol) {
    double sum = 0.0;
    double prev = 1.0;
    for (double p : dist.probs) {
        if (!(p > 0.0)) throw std::invalid_argument("probabilities must be positive");
        if (p > prev + 1e-15) throw std::invalid_argument("probabilities must be non-increasing");
        prev = p;
        sum += p;
    }
    if (std::fabs(sum - 1.0) > mass_tol)
        throw std::invalid_argument("probabilities sum to " + std::to_string(sum));
}

// Walker/Vose alias tables for O(1) draws.
struct AliasTable {
    std::vector<double> prob;
    std::vector<std::uint32_t> alias;

    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t k = weights.size();
        prob.resize(k);
        alias.resize(k);
        double total = 0.0;
        for (double w : weights) total += w;
        std::vector<double> scaled(k);
        for (std::size_t i = 0; i < k; ++i) scaled[i] = weights[i] * double(k) / total;
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < k; ++i)
            (scaled[i] < 1.0 ? small : large).push_back(std::uint32_t(i));
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            small.pop_back();
            const std::uint32_t g = large.back();
            prob[s] = scaled[s];
            alias[s] = g;
            scaled[g] = scaled[g] + scaled[s] - 1.0;
            if (scaled[g] < 1.0) {
                large.pop_back();
                small.push_back(g);
            }
        }
        for (auto i : large) prob[i] = 1.0;
        for (auto i : small) prob[i] = 1.0;
    }

    std::size_t draw(std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const std::size_t k = prob.size();
        const std::size_t slot = std::min<std::size_t>(k - 1, std::size_t(unif(rng) * double(k)));
        return unif(rng) < prob[slot] ? slot : alias[slot];
    }
};

}  // namespace

std::string KnownDistribution::token(std::size_t index) const {
    return "w" + std::to_string(index);
}

KnownDistribution make_uniform(std::size_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    KnownDistribution dist;
    dist.k = k;
    dist.probs.assign(k, 1.0 / double(k));
    return dist;
}

KnownDistribution make_zipf(std::size_t k, double s) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (s < 0.0) throw std::invalid_argument("exponent must be >= 0");
    KnownDistribution dist;
    dist.k = k;
    dist.probs.resize(k);
    double norm = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        dist.probs[i] = std::pow(double(i + 1), -s);
        norm += dist.probs[i];
    }
    for (double& p : dist.probs) p /= norm;
    return dist;
}

KnownDistribution make_mesh_aligned(const Mesh& mesh,
                                    const std::vector<std::uint64_t>& hist) {
    if (hist.size() != mesh.l)
        throw std::invalid_argument("histogram must have one entry per mesh level");
    double mass = 0.0;
    std::size_t support = 0;
    for (std::size_t j = 0; j < mesh.l; ++j) {
        mass += double(hist[j]) * mesh.values[j];
        support += hist[j];
    }
    if (std::fabs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("histogram mass is " + std::to_string(mass) +
                                    ", expected 1 within 1e-9");
    KnownDistribution dist;
    dist.k = support;
    dist.probs.reserve(support);
    for (std::size_t j = 0; j < mesh.l; ++j)
        for (std::uint64_t c = 0; c < hist[j]; ++c) dist.probs.push_back(mesh.values[j]);
    validate(dist, 1e-9);
    return dist;
}

double exact_lambda(const KnownDistribution& dist, std::uint64_t g) {
    const std::uint64_t take = std::min<std::uint64_t>(g, dist.probs.size());
    if (take == dist.probs.size()) return 1.0;
    double sum = 0.0;
    for (std::uint64_t i = 0; i < take; ++i) sum += dist.probs[i];
    return std::min(1.0, sum);
}

SampleCorpus sample(const KnownDistribution& dist, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    validate(dist, 1e-9);
    AliasTable table(dist.probs);
    std::mt19937_64 rng(seed);
    SampleCorpus corpus;
    corpus.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        corpus.samples.push_back(dist.token(table.draw(rng)));
    return corpus;
}

double cdf_zipf(double y, double r, std::uint64_t g) {
    if (!(y > 0.0) || r < 0.0 || g < 1)
        throw std::invalid_argument("cdf_zipf requires y > 0, r >= 0, g >= 1");
    return std::min(1.0, y * std::pow(double(g), r));
}

std::string CoverageReport::to_json() const {
    nlohmann::json j;
    j["trials"] = trials;
    j["base_seed"] = base_seed;
    for (const auto& [method, stats] : per_method) {
        j["methods"][method] = {{"violations", stats.violations},
                                {"trials", stats.trials},
                                {"rate", stats.rate()}};
    }
    for (const auto& [g, width] : bracket_width)
        j["bracket_width"][std::to_string(g)] = width;
    return j.dump(2);
}

CoverageReport coverage_trial(const KnownDistribution& dist, std::size_t n,
                              const CoverageConfig& config, const TrialBounds& bounds) {
    if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
    validate(dist, 1e-9);

    // Exact lambda_G per grid point, shared across trials.
    std::map<std::uint64_t, double> truth;
    for (auto g : config.g_grid) truth[g] = exact_lambda(dist, g);

    CoverageReport report;
    report.trials = config.trials;
    report.base_seed = config.base_seed;

    struct PerG {
        double width_sum = 0.0;
        std::uint64_t width_count = 0;
    };
    std::map<std::uint64_t, PerG> widths;
    std::mutex mtx;
    std::atomic<std::uint64_t> next{0};

    auto run_trial = [&](std::uint64_t trial) {
        const std::uint64_t seed = config.base_seed + trial;
        const SampleCorpus corpus = sample(dist, n, seed);
        const auto points = bounds(corpus, seed);

        std::map<std::string, CoverageMethodStats> local;
        std::map<std::uint64_t, std::pair<double, double>> bracket;  // lo, up per G
        for (auto g : config.g_grid) bracket[g] = {0.0, 1.0};
        std::map<std::string, bool> violated;
        for (const auto& pt : points) {
            auto it = truth.find(pt.g);
            const double lambda = it != truth.end() ? it->second : exact_lambda(dist, pt.g);
            const std::string method = to_string(pt.method);
            // Strict inequality: ties count for the bound (theorems are non-strict).
            const bool violation = pt.kind == BoundKind::lower ? pt.value > lambda
                                                               : pt.value < lambda;
            violated[method] = violated[method] || violation;
            if (!violation && bracket.count(pt.g)) {
                auto& [lo, up] = bracket[pt.g];
                if (pt.kind == BoundKind::lower) lo = std::max(lo, pt.value);
                else up = std::min(up, pt.value);
            }
        }
        std::lock_guard<std::mutex> lock(mtx);
        for (const auto& [method, bad] : violated) {
            auto& stats = report.per_method[method];
            stats.trials += 1;
            if (bad) stats.violations += 1;
        }
        for (const auto& [g, lo_up] : bracket) {
            auto& w = widths[g];
            w.width_sum += lo_up.second - lo_up.first;
            w.width_count += 1;
        }
    };

    const int threads = std::min<int>(resolve_threads(config.threads),
                                      int(config.trials));
    auto worker = [&] {
        for (;;) {
            const std::uint64_t trial = next.fetch_add(1);
            if (trial >= config.trials) break;
            run_trial(trial);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (const auto& [g, w] : widths)
        report.bracket_width[g] = w.width_count ? w.width_sum / double(w.width_count) : 0.0;
    return report;
}

}  // namespace guessbound
