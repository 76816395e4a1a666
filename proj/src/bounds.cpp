#include "guessbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace guessbound {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// delta == 1 is allowed: it corresponds to a zero-slack (t = 0) bound with
// no confidence statement, useful for raw empirical comparisons.
void require_delta(double delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("delta must lie in (0,1]");
}

}  // namespace

const char* to_string(BoundKind kind) {
    return kind == BoundKind::upper ? "upper" : "lower";
}

const char* to_string(BoundMethod method) {
    switch (method) {
        case BoundMethod::frequency_ub: return "frequency_ub";
        case BoundMethod::prior_lb: return "prior_lb";
        case BoundMethod::sampling_lb: return "sampling_lb";
        case BoundMethod::extended_lb: return "extended_lb";
        case BoundMethod::lp_lb: return "lp_lb";
        case BoundMethod::lp_ub: return "lp_ub";
    }
    return "?";
}

const char* to_string(BoundTarget target) {
    return target == BoundTarget::distribution_lambda ? "distribution_lambda"
                                                      : "sample_lambda";
}

BoundKind bound_kind_from_string(const std::string& s) {
    if (s == "upper") return BoundKind::upper;
    if (s == "lower") return BoundKind::lower;
    throw std::invalid_argument("unknown bound kind: " + s);
}

BoundMethod bound_method_from_string(const std::string& s) {
    for (auto m : {BoundMethod::frequency_ub, BoundMethod::prior_lb,
                   BoundMethod::sampling_lb, BoundMethod::extended_lb,
                   BoundMethod::lp_lb, BoundMethod::lp_ub})
        if (s == to_string(m)) return m;
    throw std::invalid_argument("unknown bound method: " + s);
}

BoundTarget bound_target_from_string(const std::string& s) {
    if (s == "distribution_lambda") return BoundTarget::distribution_lambda;
    if (s == "sample_lambda") return BoundTarget::sample_lambda;
    throw std::invalid_argument("unknown bound target: " + s);
}

ModelGuessList load_model_guess_list(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    ModelGuessList list;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == '#') {
            const std::string prefix = "# source:";
            if (line.rfind(prefix, 0) == 0) {
                auto label = line.substr(prefix.size());
                label.erase(0, label.find_first_not_of(' '));
                list.source_label = label;
            }
            continue;
        }
        if (line.empty()) continue;
        if (!seen.insert(line).second)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": duplicate guess '" + line + "'");
        list.guesses.push_back(line);
    }
    return list;
}

SplitBoundParams SplitBoundParams::from_delta(std::uint64_t d, double delta) {
    SplitBoundParams p;
    p.d = d;
    p.t = slack_t(d, delta);
    p.delta = delta;
    return p;
}

SplitBoundParams SplitBoundParams::from_t(std::uint64_t d, double t) {
    if (t < 0) throw std::invalid_argument("slack t must be >= 0");
    SplitBoundParams p;
    p.d = d;
    p.t = t;
    p.delta = std::exp(-2.0 * t * t / double(d));
    return p;
}

double mcdiarmid_epsilon(std::uint64_t n, double delta) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    require_delta(delta);
    return std::sqrt(std::log(1.0 / delta) / (2.0 * double(n)));
}

double slack_t(std::uint64_t d, double delta) {
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    require_delta(delta);
    return std::sqrt(double(d) / 2.0 * std::log(1.0 / delta));
}

BoundPoint frequency_ub(const FrequencyTable& table, std::uint64_t g, double delta,
                        BoundTarget target) {
    BoundPoint pt;
    pt.g = g;
    pt.kind = BoundKind::upper;
    pt.method = BoundMethod::frequency_ub;
    pt.target = target;
    const double mass = top_g_mass(table, g);
    if (target == BoundTarget::sample_lambda) {
        // Deterministic: the top-G-by-frequency mass dominates any G-subset.
        pt.raw_value = mass;
        pt.delta = 0.0;
    } else {
        pt.raw_value = mass + mcdiarmid_epsilon(table.n, delta);
        pt.delta = delta;
    }
    pt.value = clamp01(pt.raw_value);
    return pt;
}

std::uint64_t h_count(const Partition& part, std::uint64_t g) {
    const std::uint64_t take = std::min<std::uint64_t>(g, part.d1.distinct());
    std::unordered_set<std::string> top;
    top.reserve(take);
    for (std::uint64_t i = 0; i < take; ++i) top.insert(part.d1.entries[i].first);
    std::uint64_t h = 0;
    for (const auto& s : part.d2.samples)
        if (top.count(s)) ++h;
    return h;
}

BoundPoint sampling_lb(const Partition& part, std::uint64_t g,
                       const SplitBoundParams& params, BoundTarget target,
                       double delta_eps) {
    if (params.d != part.d)
        throw std::invalid_argument("SplitBoundParams.d does not match partition");
    BoundPoint pt;
    pt.g = g;
    pt.kind = BoundKind::lower;
    pt.method = BoundMethod::sampling_lb;
    pt.target = target;
    const double h = double(h_count(part, g));
    pt.raw_value = (h - params.t) / double(params.d);
    pt.delta = params.delta;
    if (target == BoundTarget::distribution_lambda) {
        const std::uint64_t n = part.d1.n + part.d2.n();
        pt.raw_value -= mcdiarmid_epsilon(n, delta_eps);
        pt.delta += delta_eps;  // union bound across the two events
        pt.provenance = "delta_t=" + std::to_string(params.delta) +
                        " delta_eps=" + std::to_string(delta_eps);
    }
    pt.value = clamp01(pt.raw_value);
    return pt;
}

BoundPoint prior_lb(const FrequencyEncoding& enc, double L, std::uint64_t j,
                    double delta_t, double delta_eps, BoundTarget target) {
    if (L < 1.0)
        throw std::invalid_argument("prior_lb requires L >= 1 (G = N*L >= N)");
    if (j < 2) throw std::invalid_argument("prior_lb requires j >= 2");
    require_delta(delta_t);
    const double n = double(enc.n);
    // t with exp(-2 t^2 / (N j^2)) == delta_t
    const double t = std::sqrt(n * double(j) * double(j) * std::log(1.0 / delta_t) / 2.0);
    // mass of tokens seen at least j times
    double heavy = 0.0;
    for (const auto& [i, fi] : enc.f_of_f)
        if (i >= j) heavy += double(i) * double(fi);
    // N / ((j-1)! L^(j-1)) in log space; j up to 1000 overflows otherwise
    const double log_penalty =
        std::log(n) - (std::lgamma(double(j)) + (double(j) - 1.0) * std::log(L));
    const double penalty = std::exp(log_penalty);

    BoundPoint pt;
    pt.g = std::uint64_t(std::ceil(n * L));
    pt.kind = BoundKind::lower;
    pt.method = BoundMethod::prior_lb;
    pt.target = target;
    pt.raw_value = (heavy - penalty - t) / n;
    pt.delta = delta_t;
    if (target == BoundTarget::distribution_lambda) {
        pt.raw_value -= mcdiarmid_epsilon(enc.n, delta_eps);
        pt.delta += delta_eps;
    }
    pt.value = clamp01(pt.raw_value);
    pt.provenance = "j=" + std::to_string(j);
    return pt;
}

BoundPoint prior_lb_best(const FrequencyEncoding& enc, double L, double delta_t,
                         double delta_eps, BoundTarget target, std::uint64_t j_min,
                         std::uint64_t j_max) {
    BoundPoint best;
    bool have = false;
    for (std::uint64_t j = j_min; j <= j_max; ++j) {
        BoundPoint pt = prior_lb(enc, L, j, delta_t, delta_eps, target);
        if (!have || pt.raw_value > best.raw_value) {
            best = pt;
            have = true;
        }
    }
    return best;
}

BoundPoint extended_lb(const Partition& part, const ModelGuessList& model,
                       std::uint64_t g, const SplitBoundParams& params,
                       BoundTarget target, double delta_eps) {
    if (params.d != part.d)
        throw std::invalid_argument("SplitBoundParams.d does not match partition");
    const std::uint64_t k = part.d1.distinct();
    if (g <= k) {
        BoundPoint pt = sampling_lb(part, g, params, target, delta_eps);
        pt.method = BoundMethod::extended_lb;
        return pt;
    }
    // M*: all of D1 first, then the first g-k model guesses not in D1.
    std::unordered_set<std::string> guessed;
    guessed.reserve(part.d1.entries.size());
    for (const auto& [tok, cnt] : part.d1.entries) guessed.insert(tok);
    std::uint64_t budget = g - k;
    for (const auto& guess : model.guesses) {
        if (budget == 0) break;
        if (guessed.insert(guess).second) --budget;
    }
    std::uint64_t hits = 0;
    for (const auto& s : part.d2.samples)
        if (guessed.count(s)) ++hits;

    BoundPoint pt;
    pt.g = g;
    pt.kind = BoundKind::lower;
    pt.method = BoundMethod::extended_lb;
    pt.target = target;
    pt.raw_value = (double(hits) - params.t) / double(params.d);
    pt.delta = params.delta;
    if (target == BoundTarget::distribution_lambda) {
        const std::uint64_t n = part.d1.n + part.d2.n();
        pt.raw_value -= mcdiarmid_epsilon(n, delta_eps);
        pt.delta += delta_eps;
    }
    pt.value = clamp01(pt.raw_value);
    pt.provenance = "model=" + model.source_label;
    return pt;
}

}  // namespace guessbound
