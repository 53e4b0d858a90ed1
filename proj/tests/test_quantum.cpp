#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "asgk/quantum.hpp"

using namespace asgk;
using Catch::Approx;

TEST_CASE("indexed state construction") {
    const SparseState s = build_indexed_state(toy_triangle(), EncodingKind::VED);
    CHECK(s.amp.size() == 8);
    for (const auto& [label, a] : s.amp) CHECK(a == Approx(1.0 / std::sqrt(8.0)));
    CHECK(s.norm_sq() == Approx(1.0).margin(1e-12));

    const SparseState one = build_indexed_state(Graph(1), EncodingKind::VE);
    CHECK(one.amp.size() == 2);
    for (const auto& [label, a] : one.amp) CHECK(a == Approx(1.0 / std::sqrt(2.0)));

    CHECK_THROWS_AS(build_indexed_state(random_graph(15, 0.3, 1), EncodingKind::VE),
                    std::invalid_argument);
}

TEST_CASE("index Hadamard and post-selection on the toy graph") {
    const PostselectResult r =
        hadamard_index_and_postselect(build_indexed_state(toy_triangle(), EncodingKind::VED));
    CHECK(r.probability == Approx(0.3125).margin(1e-14));
    REQUIRE(r.state.size() == 4);
    // amplitudes proportional to the multiplicities (1,3,3,1)/sqrt(20),
    // in canonical key order
    const double inv = 1.0 / std::sqrt(20.0);
    CHECK(r.state[0].amplitude == Approx(1.0 * inv));
    CHECK(r.state[1].amplitude == Approx(3.0 * inv));
    CHECK(r.state[2].amplitude == Approx(3.0 * inv));
    CHECK(r.state[3].amplitude == Approx(1.0 * inv));
    double norm = 0.0;
    for (const auto& e : r.state) norm += e.amplitude * e.amplitude;
    CHECK(norm == Approx(1.0).margin(1e-12));
}

TEST_CASE("single-vertex post-selection") {
    const PostselectResult r =
        hadamard_index_and_postselect(build_indexed_state(Graph(1), EncodingKind::VE));
    CHECK(r.probability == Approx(0.5).margin(1e-14));
    REQUIRE(r.state.size() == 2);
    CHECK(r.state[0].amplitude == Approx(r.state[1].amplitude));
}

TEST_CASE("post-selection probability matches the exact spectrum integers") {
    std::mt19937_64 rng(311);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 8);
        const Graph g = random_graph(n, 0.5, rng());
        const EncodingKind kind = trial % 2 ? EncodingKind::VE : EncodingKind::VED;
        const FeatureSpectrum s = enumerate_spectrum(g, kind);
        const PostselectResult r = hadamard_index_and_postselect(build_indexed_state(g, kind));
        CHECK(r.probability == Approx(success_probability(s)).margin(1e-13));
        CHECK(r.probability >= success_lower_bound(s) - 1e-12);
    }
}

TEST_CASE("swap test") {
    const PostselectResult a =
        hadamard_index_and_postselect(build_indexed_state(toy_triangle(), EncodingKind::VED));
    const PostselectResult b =
        hadamard_index_and_postselect(build_indexed_state(toy_star(), EncodingKind::VED));
    SECTION("toy pair reproduces (1 + BH^2)/2") {
        CHECK(swap_test_prob(a, b) == Approx(0.9).margin(1e-12));
    }
    SECTION("identical states accept with certainty") {
        CHECK(swap_test_prob(a, a) == Approx(1.0).margin(1e-12));
    }
    SECTION("orthogonal states accept with probability 1/2") {
        PostselectResult x, y;
        x.state = {{-1, key_pack(FeatureKey{1, 0, 0, 0, 0}), 1.0}};
        y.state = {{-1, key_pack(FeatureKey{2, 0, 0, 0, 0}), 1.0}};
        CHECK(swap_test_prob(x, y) == Approx(0.5).margin(1e-12));
    }
}

TEST_CASE("switch state preparation") {
    const SparseState s = build_switch_state(toy_triangle(), toy_star(), EncodingKind::VED);
    CHECK(s.amp.size() == 16);
    CHECK(s.norm_sq() == Approx(1.0).margin(1e-12));
    for (const auto& [label, a] : s.amp)
        CHECK(a == Approx(1.0 / std::sqrt(2.0) / std::sqrt(8.0)));

    CHECK_THROWS_AS(build_switch_state(Graph(2), toy_triangle(), EncodingKind::VE),
                    std::invalid_argument);
}

TEST_CASE("controlled Hadamard post-selection") {
    const PostselectResult r = controlled_hadamard_postselect(
        build_switch_state(toy_triangle(), toy_star(), EncodingKind::VED));
    CHECK(r.probability == Approx(0.28125).margin(1e-14));  // (20/64 + 16/64)/2
    CHECK(r.norm_constant == Approx(std::sqrt(20.0 / 64.0 + 16.0 / 64.0)).margin(1e-14));
    double norm = 0.0;
    for (const auto& e : r.state) norm += e.amplitude * e.amplitude;
    CHECK(norm == Approx(1.0).margin(1e-12));

    SECTION("pairwise bound (1/a + 1/a')/2 on random pairs") {
        std::mt19937_64 rng(313);
        for (int trial = 0; trial < 40; ++trial) {
            const int n = 1 + static_cast<int>(rng() % 8);
            const int np = 1 + static_cast<int>(rng() % n);
            const Graph g = random_graph(n, 0.5, rng());
            const Graph gp = random_graph(np, 0.5, rng());
            const EncodingKind kind = trial % 2 ? EncodingKind::VE : EncodingKind::VED;
            const PostselectResult sw =
                controlled_hadamard_postselect(build_switch_state(g, gp, kind));
            const double bound = 0.5 * (success_lower_bound(enumerate_spectrum(g, kind)) +
                                        success_lower_bound(enumerate_spectrum(gp, kind)));
            CHECK(sw.probability >= bound - 1e-12);
        }
    }
    SECTION("equal graphs match the single-graph probability") {
        const PostselectResult same = controlled_hadamard_postselect(
            build_switch_state(toy_triangle(), toy_triangle(), EncodingKind::VED));
        CHECK(same.probability == Approx(0.3125).margin(1e-13));
    }
}

TEST_CASE("switch test") {
    const PostselectResult r = controlled_hadamard_postselect(
        build_switch_state(toy_triangle(), toy_star(), EncodingKind::VED));
    CHECK(switch_test_prob(r) == Approx((1.0 + 8.0 / 9.0) / 2.0).margin(1e-12));

    const PostselectResult same = controlled_hadamard_postselect(
        build_switch_state(toy_triangle(), toy_triangle(), EncodingKind::VED));
    CHECK(switch_test_prob(same) == Approx(1.0).margin(1e-12));
}

TEST_CASE("circuit probabilities match the closed-form kernels") {
    std::mt19937_64 rng(317);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 8);
        const int np = 1 + static_cast<int>(rng() % 8);
        const Graph a = random_graph(n, 0.5, rng());
        const Graph b = random_graph(np, 0.5, rng());
        const EncodingKind kind = trial % 2 ? EncodingKind::VE : EncodingKind::VED;
        const PairVerification v = verify_pair(a, b, kind);
        CHECK(std::abs(2.0 * v.swap_pr0 - 1.0 - v.bh_closed * v.bh_closed) < 1e-10);
        CHECK(std::abs(2.0 * v.switch_pr0 - 1.0 - v.sh_closed) < 1e-10);
        CHECK(v.p_postselect >= v.p_bound - 1e-12);
        CHECK(v.max_abs_dev < 1e-10);
    }
}

TEST_CASE("amplitude amplification") {
    const double p = 0.3125;
    SECTION("t = 0 is the bare success probability") {
        CHECK(aa_amplitude(toy_triangle(), EncodingKind::VED, 0) == Approx(p).margin(1e-13));
    }
    SECTION("toy values are exact rationals") {
        CHECK(aa_amplitude(toy_triangle(), EncodingKind::VED, 1) ==
              Approx(245.0 / 256.0).margin(1e-12));  // sin^2(3 theta)
        CHECK(aa_amplitude(toy_triangle(), EncodingKind::VED, 2) ==
              Approx(125.0 / 4096.0).margin(1e-12));  // sin^2(5 theta)
    }
    SECTION("matches sin^2((2t+1) theta) for t = 0..10 on random graphs") {
        std::mt19937_64 rng(331);
        for (int trial = 0; trial < 12; ++trial) {
            const int n = 2 + static_cast<int>(rng() % 9);
            const Graph g = random_graph(n, 0.4, rng());
            const EncodingKind kind = trial % 2 ? EncodingKind::VE : EncodingKind::VED;
            const double p0 = aa_amplitude(g, kind, 0);
            const double th = std::asin(std::sqrt(p0));
            for (int t = 0; t <= 10; ++t) {
                const double expected = std::pow(std::sin((2 * t + 1) * th), 2);
                CHECK(aa_amplitude(g, kind, t) == Approx(expected).margin(1e-9));
            }
        }
    }
    SECTION("periodicity: no drift over many iterations") {
        // sin^2((2t+1) theta) is pi/(2 theta)-periodic in t; the iterated
        // reflections must track it without accumulating error, so the
        // closed form still holds after a period-scale number of steps
        const Graph g = random_graph(6, 0.5, 77);
        const double p0 = aa_amplitude(g, EncodingKind::VED, 0);
        const double th = std::asin(std::sqrt(p0));
        const int period = std::max(1, static_cast<int>(std::round(M_PI / (2.0 * th))));
        for (int t : {1 + period, 1 + 2 * period, 50}) {
            const double expected = std::pow(std::sin((2.0 * t + 1.0) * th), 2);
            CHECK(aa_amplitude(g, EncodingKind::VED, t) == Approx(expected).margin(1e-9));
        }
    }
}

TEST_CASE("sampled shots approximate the post-selected state") {
    const PostselectResult r =
        hadamard_index_and_postselect(build_indexed_state(toy_triangle(), EncodingKind::VED));
    const auto hits = sample_shots(r, 100000, 9);
    REQUIRE(hits.size() == 4);
    std::uint64_t total = 0;
    for (const auto& [key, c] : hits) total += c;
    CHECK(total == 100000);
    // (1,9,9,1)/20 distribution
    CHECK(static_cast<double>(hits[0].second) / 100000 == Approx(0.05).margin(0.005));
    CHECK(static_cast<double>(hits[1].second) / 100000 == Approx(0.45).margin(0.01));
}
