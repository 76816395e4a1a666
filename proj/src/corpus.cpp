#include "guessbound/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace guessbound {

namespace {

void sort_entries(std::vector<std::pair<std::string, std::uint64_t>>& entries) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Hypergeometric draw: number of marked items in a sample of `draws` from a
// population of `total` containing `marked`. Inverse-transform walk over the
// pmf starting at the log of P[k = max(0, draws - (total - marked))].
std::uint64_t hypergeometric(std::uint64_t total, std::uint64_t marked,
                             std::uint64_t draws, std::mt19937_64& rng) {
    if (marked == 0 || draws == 0) return 0;
    if (marked == total) return draws;
    if (draws == total) return marked;
    const auto lchoose = [](double n, double k) {
        return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
    };
    const std::uint64_t k_min =
        (draws + marked > total) ? draws + marked - total : 0;
    const std::uint64_t k_max = std::min(marked, draws);
    double log_pk = lchoose(double(marked), double(k_min)) +
                    lchoose(double(total - marked), double(draws - k_min)) -
                    lchoose(double(total), double(draws));
    double pk = std::exp(log_pk);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    std::uint64_t k = k_min;
    while (k < k_max && u > pk) {
        u -= pk;
        // pmf ratio P[k+1]/P[k]
        const double num = double(marked - k) * double(draws - k);
        const double den = double(k + 1) * double(total - marked - draws + k + 1);
        pk *= num / den;
        ++k;
    }
    return k;
}

}  // namespace

std::optional<std::uint64_t> FrequencyTable::count_of(const std::string& token) const {
    for (const auto& [tok, cnt] : entries)
        if (tok == token) return cnt;
    return std::nullopt;
}

FrequencyTable FrequencyTable::from_samples(const SampleCorpus& corpus) {
    std::unordered_map<std::string, std::uint64_t> counts;
    counts.reserve(corpus.samples.size());
    for (const auto& s : corpus.samples) ++counts[s];
    std::vector<std::pair<std::string, std::uint64_t>> entries(counts.begin(),
                                                               counts.end());
    sort_entries(entries);
    FrequencyTable table;
    table.entries = std::move(entries);
    table.n = corpus.n();
    return table;
}

FrequencyTable FrequencyTable::from_counts(
    std::vector<std::pair<std::string, std::uint64_t>> counts) {
    FrequencyTable table;
    for (const auto& [tok, cnt] : counts) {
        if (cnt == 0) throw std::invalid_argument("zero count for token " + tok);
        table.n += cnt;
    }
    sort_entries(counts);
    table.entries = std::move(counts);
    return table;
}

Corpus load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::size_t line_no = 0;

    if (format == CorpusFormat::plain) {
        SampleCorpus corpus;
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            corpus.samples.push_back(line);
        }
        return corpus;
    }

    if (format == CorpusFormat::counted) {
        std::vector<std::pair<std::string, std::uint64_t>> counts;
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                parse_fail(path, line_no, "expected 'count<TAB>token'");
            long long cnt;
            try {
                cnt = std::stoll(line.substr(0, tab));
            } catch (const std::exception&) {
                parse_fail(path, line_no, "bad count field");
            }
            if (cnt <= 0) parse_fail(path, line_no, "count must be positive");
            counts.emplace_back(line.substr(tab + 1), std::uint64_t(cnt));
        }
        return FrequencyTable::from_counts(std::move(counts));
    }

    // counts_only: synthesize tokens "#0","#1",... in descending-count order.
    std::vector<std::uint64_t> raw;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        long long cnt;
        try {
            cnt = std::stoll(line);
        } catch (const std::exception&) {
            parse_fail(path, line_no, "expected a positive integer");
        }
        if (cnt <= 0) parse_fail(path, line_no, "count must be positive");
        raw.push_back(std::uint64_t(cnt));
    }
    std::sort(raw.rbegin(), raw.rend());
    std::vector<std::pair<std::string, std::uint64_t>> counts;
    counts.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        counts.emplace_back("#" + std::to_string(i), raw[i]);
    return FrequencyTable::from_counts(std::move(counts));
}

FrequencyTable as_table(const Corpus& corpus) {
    if (const auto* samples = std::get_if<SampleCorpus>(&corpus))
        return FrequencyTable::from_samples(*samples);
    return std::get<FrequencyTable>(corpus);
}

FrequencyEncoding frequency_encoding(const FrequencyTable& table) {
    if (table.entries.empty()) throw std::invalid_argument("empty frequency table");
    FrequencyEncoding enc;
    enc.n = table.n;
    for (const auto& [tok, cnt] : table.entries) ++enc.f_of_f[cnt];
    for (const auto& [i, fi] : enc.f_of_f) enc.distinct += fi;
    enc.unique = enc.at(1);
    return enc;
}

double top_g_mass(const FrequencyTable& table, std::uint64_t g) {
    if (g >= table.distinct()) return table.entries.empty() ? 0.0 : 1.0;
    std::uint64_t sum = 0;
    for (std::uint64_t i = 0; i < g; ++i) sum += table.entries[i].second;
    return double(sum) / double(table.n);
}

std::vector<std::string> top_g_set(const FrequencyTable& table, std::uint64_t g) {
    const std::uint64_t take = std::min<std::uint64_t>(g, table.distinct());
    std::vector<std::string> out;
    out.reserve(take);
    for (std::uint64_t i = 0; i < take; ++i) out.push_back(table.entries[i].first);
    return out;
}

Partition partition(const SampleCorpus& corpus, std::uint64_t d, std::uint64_t seed) {
    if (d == 0 || d >= corpus.n())
        throw std::invalid_argument("split size d must satisfy 0 < d < n");
    std::vector<std::string> shuffled = corpus.samples;
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    Partition part;
    part.d = d;
    part.seed = seed;
    part.d2.samples.assign(shuffled.end() - std::ptrdiff_t(d), shuffled.end());
    shuffled.resize(shuffled.size() - d);
    SampleCorpus d1_samples;
    d1_samples.samples = std::move(shuffled);
    part.d1 = FrequencyTable::from_samples(d1_samples);
    return part;
}

Partition partition(const FrequencyTable& table, std::uint64_t d, std::uint64_t seed) {
    if (d == 0 || d >= table.n)
        throw std::invalid_argument("split size d must satisfy 0 < d < n");
    std::mt19937_64 rng(seed);

    Partition part;
    part.d = d;
    part.seed = seed;
    std::uint64_t remaining_total = table.n;
    std::uint64_t remaining_draws = d;
    std::vector<std::pair<std::string, std::uint64_t>> d1_counts;
    d1_counts.reserve(table.entries.size());
    for (const auto& [tok, cnt] : table.entries) {
        const std::uint64_t to_d2 =
            hypergeometric(remaining_total, cnt, remaining_draws, rng);
        remaining_total -= cnt;
        remaining_draws -= to_d2;
        for (std::uint64_t i = 0; i < to_d2; ++i) part.d2.samples.push_back(tok);
        if (cnt > to_d2) d1_counts.emplace_back(tok, cnt - to_d2);
    }
    // D2 order carries no information; shuffle so it matches the
    // shuffle-and-split law exactly.
    std::shuffle(part.d2.samples.begin(), part.d2.samples.end(), rng);
    part.d1 = FrequencyTable::from_counts(std::move(d1_counts));
    return part;
}

Partition partition(const Corpus& corpus, std::uint64_t d, std::uint64_t seed) {
    if (const auto* samples = std::get_if<SampleCorpus>(&corpus))
        return partition(*samples, d, seed);
    return partition(std::get<FrequencyTable>(corpus), d, seed);
}

FrequencyTable merge(const Partition& part) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& [tok, cnt] : part.d1.entries) counts[tok] += cnt;
    for (const auto& s : part.d2.samples) ++counts[s];
    std::vector<std::pair<std::string, std::uint64_t>> entries(counts.begin(),
                                                               counts.end());
    return FrequencyTable::from_counts(std::move(entries));
}

}  // namespace guessbound
