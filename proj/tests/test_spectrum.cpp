#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "asgk/spectrum.hpp"

using namespace asgk;

namespace {

// independent oracle: per-subset re-encoding into a plain map, no
// shared accumulation and no packing shortcuts
std::map<FeatureKey, std::uint64_t> naive_spectrum(const Graph& g, EncodingKind kind) {
    std::map<FeatureKey, std::uint64_t> m;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << g.num_vertices()); ++x)
        ++m[encode_subgraph(g, x, kind)];
    return m;
}

std::map<FeatureKey, std::uint64_t> unpacked(const FeatureSpectrum& s) {
    std::map<FeatureKey, std::uint64_t> m;
    for (const auto& [packed, count] : s.counts) m[key_unpack(packed)] = count;
    return m;
}

}  // namespace

TEST_CASE("toy spectra match the listed kets exactly") {
    const FeatureSpectrum sg = enumerate_spectrum(toy_triangle(), EncodingKind::VED);
    const std::map<FeatureKey, std::uint64_t> expect_g = {
        {{0, 0, 0, 0, 0}, 1}, {{1, 0, 0, 0, 0}, 3}, {{2, 1, 2, 0, 0}, 3}, {{3, 3, 0, 3, 0}, 1}};
    CHECK(unpacked(sg) == expect_g);
    CHECK(sg.sum_counts == 8);
    CHECK(static_cast<std::uint64_t>(sg.sum_sq_counts) == 20);

    const FeatureSpectrum sp = enumerate_spectrum(toy_star(), EncodingKind::VED);
    const std::map<FeatureKey, std::uint64_t> expect_p = {{{0, 0, 0, 0, 0}, 1},
                                                          {{1, 0, 0, 0, 0}, 3},
                                                          {{2, 0, 0, 0, 0}, 1},
                                                          {{2, 1, 2, 0, 0}, 2},
                                                          {{3, 2, 2, 1, 0}, 1}};
    CHECK(unpacked(sp) == expect_p);
    CHECK(static_cast<std::uint64_t>(sp.sum_sq_counts) == 16);
}

TEST_CASE("single vertex spectrum") {
    const FeatureSpectrum s = enumerate_spectrum(Graph(1), EncodingKind::VE);
    const std::map<FeatureKey, std::uint64_t> expect = {{{0, 0, 0, 0, 0}, 1},
                                                        {{1, 0, 0, 0, 0}, 1}};
    CHECK(unpacked(s) == expect);
    CHECK(success_probability(s) == 0.5);
}

TEST_CASE("resource guard") {
    EnumerateOptions opts;
    opts.max_n = 10;
    CHECK_THROWS_AS(enumerate_spectrum(random_graph(11, 0.3, 1), EncodingKind::VE, opts),
                    std::invalid_argument);
}

TEST_CASE("enumeration equals the naive per-subset oracle") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 12);
        const Graph g = random_graph(n, 0.4, rng());
        for (EncodingKind kind : {EncodingKind::VE, EncodingKind::VED}) {
            const FeatureSpectrum s = enumerate_spectrum(g, kind);
            const auto oracle = naive_spectrum(g, kind);
            REQUIRE(unpacked(s) == oracle);
            CHECK(s.sum_counts == std::uint64_t{1} << n);
        }
    }
}

TEST_CASE("parallel and serial enumeration agree bitwise") {
    const Graph g = random_graph(17, 0.3, 99);
    EnumerateOptions serial;
    serial.threads = 1;
    EnumerateOptions parallel;
    parallel.threads = 4;
    const FeatureSpectrum a = enumerate_spectrum(g, EncodingKind::VED, serial);
    const FeatureSpectrum b = enumerate_spectrum(g, EncodingKind::VED, parallel);
    CHECK(a.counts == b.counts);
    CHECK(static_cast<std::uint64_t>(a.sum_sq_counts) ==
          static_cast<std::uint64_t>(b.sum_sq_counts));
}

TEST_CASE("spectrum is invariant under vertex relabeling") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 9);
        const Graph g = random_graph(n, 0.5, rng());
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const Graph h = permute_vertices(g, perm);
        CHECK(enumerate_spectrum(g, EncodingKind::VED).counts ==
              enumerate_spectrum(h, EncodingKind::VED).counts);
    }
}

TEST_CASE("success probability: toy value, exact rational and bound") {
    const FeatureSpectrum s = enumerate_spectrum(toy_triangle(), EncodingKind::VED);
    CHECK(success_probability(s) == 0.3125);
    CHECK(static_cast<std::uint64_t>(s.success_numerator()) == 20);
    CHECK(s.success_denominator_log2() == 6);
    CHECK(success_lower_bound(s) == 0.25);
    CHECK(success_probability(s) >= success_lower_bound(s));

    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 8);
        const FeatureSpectrum r = enumerate_spectrum(random_graph(n, 0.5, rng()),
                                                     trial % 2 ? EncodingKind::VE
                                                               : EncodingKind::VED);
        CHECK(success_probability(r) >= success_lower_bound(r) - 1e-15);
    }
}

TEST_CASE("VED spectrum refines the VE spectrum") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 10);
        const Graph g = random_graph(n, 0.4, rng());
        const FeatureSpectrum ve = enumerate_spectrum(g, EncodingKind::VE);
        const FeatureSpectrum projected = project_to_ve(enumerate_spectrum(g, EncodingKind::VED));
        CHECK(ve.counts == projected.counts);
    }
}

TEST_CASE("spectrum file round-trip") {
    {
        const FeatureSpectrum ve = enumerate_spectrum(random_graph(7, 0.5, 4), EncodingKind::VE);
        std::stringstream buf;
        write_spectrum(buf, ve);
        std::stringstream in(buf.str());
        const FeatureSpectrum back = read_spectrum(in);
        CHECK(back.kind == EncodingKind::VE);
        CHECK(back.counts == ve.counts);
    }
    const FeatureSpectrum s = enumerate_spectrum(random_graph(8, 0.4, 3), EncodingKind::VED);
    std::stringstream buf;
    write_spectrum(buf, s);
    const std::string text = buf.str();
    CHECK(text.rfind("# n=8 kind=VED sum=256", 0) == 0);
    std::stringstream in(text);
    const FeatureSpectrum back = read_spectrum(in);
    CHECK(back.n == s.n);
    CHECK(back.kind == s.kind);
    CHECK(back.counts == s.counts);

    // lines are in canonical order: packed keys strictly increase
    std::stringstream in2(text);
    std::string line;
    std::getline(in2, line);
    std::uint64_t prev = 0;
    bool first = true;
    while (std::getline(in2, line)) {
        const auto key = key_from_string(line.substr(0, line.find(' ')), EncodingKind::VED);
        const std::uint64_t packed = key_pack(key);
        if (!first) CHECK(packed > prev);
        prev = packed;
        first = false;
    }
}

TEST_CASE("range growth report buckets by n") {
    SECTION("toy graph alone") {
        const auto rows = range_growth_report({enumerate_spectrum(toy_triangle(),
                                                                  EncodingKind::VED)});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].n == 3);
        CHECK(rows[0].graphs == 1);
        CHECK(rows[0].mean_distinct_keys == 4.0);
        CHECK(rows[0].mean_success_probability == 0.3125);
    }
    SECTION("two single-vertex graphs") {
        const FeatureSpectrum s = enumerate_spectrum(Graph(1), EncodingKind::VE);
        const auto rows = range_growth_report({s, s});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].n == 1);
        CHECK(rows[0].graphs == 2);
        CHECK(rows[0].mean_distinct_keys == 2.0);
        CHECK(rows[0].mean_success_probability == 0.5);
    }
    SECTION("empty input rejected") {
        CHECK_THROWS_AS(range_growth_report({}), std::invalid_argument);
    }
}
