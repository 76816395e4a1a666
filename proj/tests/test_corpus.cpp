#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "guessbound/corpus.hpp"

using namespace guessbound;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = "gb_test_" + name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("plain format loads in arrival order") {
    auto path = write_temp("plain.txt", "123456\npassword\n123456\n\nabc\n");
    auto corpus = load_corpus(path, CorpusFormat::plain);
    auto* s = std::get_if<SampleCorpus>(&corpus);
    REQUIRE(s != nullptr);
    CHECK(s->n() == 5);  // empty line is a legal (empty) token
    CHECK(s->samples[0] == "123456");
    CHECK(s->samples[3] == "");
    std::remove(path.c_str());
}

TEST_CASE("counted format parses count<TAB>token and sorts deterministically") {
    auto path = write_temp("counted.txt", "3\tpassword\n5\t123456\n3\tabc\n");
    auto corpus = load_corpus(path, CorpusFormat::counted);
    auto table = as_table(corpus);
    CHECK(table.n == 11);
    REQUIRE(table.distinct() == 3);
    CHECK(table.entries[0].first == "123456");
    // tie at count 3 broken lexicographically
    CHECK(table.entries[1].first == "abc");
    CHECK(table.entries[2].first == "password");
    std::remove(path.c_str());
}

TEST_CASE("counted format rejects malformed lines with a line number") {
    auto path = write_temp("bad_counted.txt", "3\tok\nnot_a_count\tx\n");
    CHECK_THROWS_WITH_AS(load_corpus(path, CorpusFormat::counted),
                         doctest::Contains(":2:"), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("counts_only synthesizes anonymous tokens in descending order") {
    auto path = write_temp("counts.txt", "2\n7\n2\n1\n");
    auto table = as_table(load_corpus(path, CorpusFormat::counts_only));
    CHECK(table.n == 12);
    REQUIRE(table.distinct() == 4);
    CHECK(table.entries[0].second == 7);
    CHECK(table.entries[3].second == 1);
    // synthetic names carry no information beyond rank
    CHECK(table.entries[0].first == "#0");
    std::remove(path.c_str());
}

TEST_CASE("counts_only rejects zero and negative counts") {
    auto path = write_temp("counts_zero.txt", "3\n0\n");
    CHECK_THROWS_AS(load_corpus(path, CorpusFormat::counts_only), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("frequency encoding from hand counts") {
    // counts {5,3,3,1,1,1,1}: F_1=4, F_3=2, F_5=1
    auto table = FrequencyTable::from_counts(
        {{"a", 5}, {"b", 3}, {"c", 3}, {"d", 1}, {"e", 1}, {"f", 1}, {"g", 1}});
    auto enc = frequency_encoding(table);
    CHECK(enc.n == 15);
    CHECK(enc.distinct == 7);
    CHECK(enc.unique == 4);
    CHECK(enc.at(1) == 4);
    CHECK(enc.at(2) == 0);
    CHECK(enc.at(3) == 2);
    CHECK(enc.at(5) == 1);
}

TEST_CASE("top_g_mass and top_g_set") {
    auto table = FrequencyTable::from_counts({{"a", 5}, {"b", 3}, {"c", 2}});
    CHECK(top_g_mass(table, 0) == doctest::Approx(0.0));
    CHECK(top_g_mass(table, 1) == doctest::Approx(0.5));
    CHECK(top_g_mass(table, 2) == doctest::Approx(0.8));
    CHECK(top_g_mass(table, 3) == doctest::Approx(1.0));
    CHECK(top_g_mass(table, 100) == doctest::Approx(1.0));
    auto set = top_g_set(table, 2);
    REQUIRE(set.size() == 2);
    CHECK(set[0] == "a");
    CHECK(set[1] == "b");
}

TEST_CASE("partition is deterministic per seed and differs across seeds") {
    SampleCorpus corpus;
    for (int i = 0; i < 500; ++i) corpus.samples.push_back("tok" + std::to_string(i % 37));
    auto p1 = partition(corpus, 100, 42);
    auto p2 = partition(corpus, 100, 42);
    auto p3 = partition(corpus, 100, 43);
    CHECK(p1.d2.samples == p2.d2.samples);
    CHECK(p1.d1.entries == p2.d1.entries);
    CHECK(p1.d2.samples != p3.d2.samples);
    CHECK(p1.d2.n() == 100);
    CHECK(p1.d1.n == 400);
}

TEST_CASE("merge restores the original multiset") {
    SampleCorpus corpus;
    for (int i = 0; i < 300; ++i) corpus.samples.push_back("w" + std::to_string(i % 23));
    auto original = FrequencyTable::from_samples(corpus);
    for (std::uint64_t seed : {1ull, 9ull, 77ull}) {
        auto part = partition(corpus, 60, seed);
        CHECK(merge(part).entries == original.entries);
    }
}

TEST_CASE("frequency-table partition matches shuffle-and-split in law") {
    // One token at count 400 among n=1000, d=250: D2 hits are
    // Hypergeometric(N=1000, K=400, d=250), mean 100, sd ~ sqrt(250*0.4*0.6*750/999) ~ 6.7.
    FrequencyTable table = FrequencyTable::from_counts({{"big", 400}, {"rest", 600}});
    double total = 0.0;
    const int reps = 200;
    for (int seed = 0; seed < reps; ++seed) {
        auto part = partition(table, 250, std::uint64_t(seed));
        std::uint64_t hits = 0;
        for (const auto& s : part.d2.samples) hits += (s == "big");
        total += double(hits);
        CHECK(part.d2.n() == 250);
        CHECK(merge(part).n == 1000);
    }
    const double mean = total / reps;
    // 3 sigma of the sample mean: 3 * 6.7 / sqrt(200) ~ 1.4
    CHECK(std::abs(mean - 100.0) < 1.5);
}

TEST_CASE("corpus-variant partition dispatches both alternatives") {
    SampleCorpus sc;
    for (int i = 0; i < 100; ++i) sc.samples.push_back(std::to_string(i % 7));
    Corpus as_samples = sc;
    Corpus as_counts = FrequencyTable::from_samples(sc);
    auto pa = partition(as_samples, 20, 5);
    auto pb = partition(as_counts, 20, 5);
    CHECK(pa.d2.n() == 20);
    CHECK(pb.d2.n() == 20);
    CHECK(merge(pa).entries == merge(pb).entries);
}
