#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace guessbound {

// A multiset of password samples kept in arrival order. Tokens are opaque
// byte strings; no normalization is ever applied.
struct SampleCorpus {
    std::vector<std::string> samples;

    std::uint64_t n() const { return samples.size(); }
};

// token -> count map with a deterministic descending-count order
// (ties broken lexicographically on token bytes).
struct FrequencyTable {
    // Sorted by (count desc, token asc). This is the canonical guess order.
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    std::uint64_t n = 0;

    std::uint64_t distinct() const { return entries.size(); }
    std::optional<std::uint64_t> count_of(const std::string& token) const;

    static FrequencyTable from_samples(const SampleCorpus& corpus);
    static FrequencyTable from_counts(
        std::vector<std::pair<std::string, std::uint64_t>> counts);
};

// Frequency-of-frequencies vector: f_of_f[i] = number of distinct tokens
// appearing exactly i times.
struct FrequencyEncoding {
    std::map<std::uint64_t, std::uint64_t> f_of_f;
    std::uint64_t n = 0;
    std::uint64_t distinct = 0;
    std::uint64_t unique = 0;  // tokens appearing exactly once

    std::uint64_t at(std::uint64_t i) const {
        auto it = f_of_f.find(i);
        return it == f_of_f.end() ? 0 : it->second;
    }
};

// Seeded random split of a corpus into a large training part (d1) and a
// small holdout (d2) of exactly d samples.
struct Partition {
    FrequencyTable d1;
    SampleCorpus d2;
    std::uint64_t d = 0;
    std::uint64_t seed = 0;
};

enum class CorpusFormat { plain, counted, counts_only };

using Corpus = std::variant<SampleCorpus, FrequencyTable>;

// plain: one token per line -> SampleCorpus.
// counted: "count<TAB>token" -> FrequencyTable.
// counts_only: one positive integer per line; anonymous tokens "#0","#1",...
// are synthesized in descending-count order -> FrequencyTable.
// Throws std::runtime_error with a line number on malformed input.
Corpus load_corpus(const std::string& path, CorpusFormat format);

FrequencyTable as_table(const Corpus& corpus);

FrequencyEncoding frequency_encoding(const FrequencyTable& table);

// Sum of the g largest counts divided by n; 1.0 once g >= distinct.
double top_g_mass(const FrequencyTable& table, std::uint64_t g);

// The g highest-count tokens (lexicographic tie-break).
std::vector<std::string> top_g_set(const FrequencyTable& table, std::uint64_t g);

// Uniform split without replacement, deterministic per seed. The
// frequency-table overload draws per-token multivariate hypergeometric
// counts, equal in law to shuffle-and-split.
Partition partition(const SampleCorpus& corpus, std::uint64_t d, std::uint64_t seed);
Partition partition(const FrequencyTable& table, std::uint64_t d, std::uint64_t seed);
Partition partition(const Corpus& corpus, std::uint64_t d, std::uint64_t seed);

// Recombines d1 and d2 into one table (multiset union).
FrequencyTable merge(const Partition& part);

}  // namespace guessbound
