#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "asgk/sampling.hpp"

using namespace asgk;
using Catch::Approx;

TEST_CASE("sample_spectrum basics") {
    const Graph toy = toy_triangle();
    SECTION("a single draw concentrates on one key") {
        const EmpiricalSpectrum e = sample_spectrum(toy, EncodingKind::VED, 1, 7);
        REQUIRE(e.probs.size() == 1);
        CHECK(e.probs[0].second == 1.0);
    }
    SECTION("identical arguments reproduce the spectrum exactly") {
        const EmpiricalSpectrum a = sample_spectrum(toy, EncodingKind::VED, 5000, 11);
        const EmpiricalSpectrum b = sample_spectrum(toy, EncodingKind::VED, 5000, 11);
        CHECK(a.probs == b.probs);
    }
    SECTION("different seeds differ") {
        const EmpiricalSpectrum a = sample_spectrum(toy, EncodingKind::VED, 5000, 11);
        const EmpiricalSpectrum b = sample_spectrum(toy, EncodingKind::VED, 5000, 12);
        CHECK(a.probs != b.probs);
    }
    SECTION("S = 0 rejected") {
        CHECK_THROWS_AS(sample_spectrum(toy, EncodingKind::VED, 0, 1), std::invalid_argument);
    }
    SECTION("probabilities sum to one") {
        const EmpiricalSpectrum e = sample_spectrum(toy, EncodingKind::VED, 12345, 3);
        double sum = 0.0;
        for (const auto& [key, p] : e.probs) sum += p;
        CHECK(sum == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("toy golden L1 at S = 1e5") {
    const Graph toy = toy_triangle();
    const FeatureSpectrum exact = enumerate_spectrum(toy, EncodingKind::VED);
    const EmpiricalSpectrum e = sample_spectrum(toy, EncodingKind::VED, 100000, 1);
    const double l1 = l1_distance(true_distribution(exact), e.probs);
    CHECK(l1 == Approx(0.0055800000000000016).epsilon(1e-12));  // recorded deterministic value
    CHECK(l1 < 0.02);
}

TEST_CASE("true_distribution") {
    const FeatureSpectrum s = enumerate_spectrum(toy_triangle(), EncodingKind::VED);
    const KeyDistribution d = true_distribution(s);
    REQUIRE(d.size() == 4);
    double sum = 0.0;
    for (const auto& [key, p] : d) sum += p;
    CHECK(sum == 1.0);  // dyadic probabilities add exactly
    CHECK(max_key_probability(s) == 0.375);

    const FeatureSpectrum one = enumerate_spectrum(Graph(1), EncodingKind::VE);
    for (const auto& [key, p] : true_distribution(one)) CHECK(p == 0.5);
}

TEST_CASE("l1_distance") {
    const FeatureSpectrum s = enumerate_spectrum(toy_triangle(), EncodingKind::VED);
    const KeyDistribution p = true_distribution(s);
    SECTION("identical distributions") { CHECK(l1_distance(p, p) == 0.0); }
    SECTION("disjoint supports") {
        const KeyDistribution q = {{key_pack(FeatureKey{4, 0, 0, 0, 0}), 1.0}};
        CHECK(l1_distance(p, q) == 2.0);
    }
    SECTION("single-sample union sum") {
        const KeyDistribution q = {{key_pack(FeatureKey{1, 0, 0, 0, 0}), 1.0}};
        CHECK(l1_distance(p, q) == 1.25);
    }
}

TEST_CASE("phi and the Weissman bound") {
    CHECK(phi_weissman(0.375) == Approx(4.0 * std::log(5.0 / 3.0)).epsilon(1e-15));
    CHECK_THROWS_AS(phi_weissman(0.5), std::domain_error);
    CHECK_THROWS_AS(phi_weissman(0.0), std::domain_error);

    const double expected = 14.0 * std::exp(-100.0 * phi_weissman(0.375) * 0.25 / 4.0);
    CHECK(weissman_bound(4, 0.375, 100, 0.5) == Approx(expected).epsilon(1e-12));

    // monotone to zero in S (underflows to exactly 0 for huge S)
    CHECK(weissman_bound(4, 0.375, 20, 0.5) < weissman_bound(4, 0.375, 10, 0.5));
    double prev = weissman_bound(4, 0.375, 10, 0.5);
    for (std::uint64_t S = 100; S <= 100000; S *= 10) {
        const double b = weissman_bound(4, 0.375, S, 0.5);
        CHECK(b <= prev);
        prev = b;
    }
    CHECK(prev < 1e-100);

    CHECK_THROWS_AS(weissman_bound(4, 0.6, 10, 0.5), std::domain_error);
    CHECK_THROWS_AS(weissman_bound(1, 0.375, 10, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(weissman_bound(4, 0.375, 10, 0.0), std::invalid_argument);
}

TEST_CASE("sample_size_for scaling") {
    const auto base = sample_size_for(8, 0.2, 0.05, 10, 0.3);
    SECTION("roughly linear in a") {
        const auto doubled = sample_size_for(16, 0.2, 0.05, 10, 0.3);
        const double ratio = static_cast<double>(doubled.samples) /
                             static_cast<double>(base.samples);
        CHECK(ratio > 1.5);
        CHECK(ratio < 2.0 + 1e-9);  // the -log(delta) offset keeps it under 2
    }
    SECTION("quadratic in 1/epsilon") {
        const auto fine = sample_size_for(8, 0.1, 0.05, 10, 0.3);
        const double ratio = static_cast<double>(fine.samples) /
                             static_cast<double>(base.samples);
        CHECK(ratio == Approx(4.0).margin(0.01));
    }
    SECTION("invalid inputs") {
        CHECK_THROWS_AS(sample_size_for(8, 0.0, 0.05, 10, 0.3), std::invalid_argument);
        CHECK_THROWS_AS(sample_size_for(8, 0.2, 1.5, 10, 0.3), std::invalid_argument);
    }
}

TEST_CASE("recommended sample size keeps the violation rate below delta") {
    // exact multinomial enumeration gives Pr(L1 >= 0.5) = 0.0067 at the
    // recommended S = 40; 10^4 seeded trials stay comfortably below 0.1
    const Graph toy = toy_triangle();
    const FeatureSpectrum exact = enumerate_spectrum(toy, EncodingKind::VED);
    const KeyDistribution truth = true_distribution(exact);
    const double epsilon = 0.5, delta = 0.1;
    const auto est = sample_size_for(static_cast<int>(exact.distinct_keys()), epsilon, delta, 3,
                                     max_key_probability(exact));
    CHECK(est.samples == 40);
    int violations = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const EmpiricalSpectrum e = sample_spectrum(toy, EncodingKind::VED, est.samples,
                                                    900000 + static_cast<std::uint64_t>(t));
        violations += l1_distance(truth, e.probs) >= epsilon;
    }
    CHECK(static_cast<double>(violations) / trials <= delta);
}

TEST_CASE("empirical violation frequency respects the Weissman bound") {
    const Graph g = random_graph(6, 0.5, 555);
    const FeatureSpectrum exact = enumerate_spectrum(g, EncodingKind::VED);
    const KeyDistribution truth = true_distribution(exact);
    const double pi = max_key_probability(exact);
    REQUIRE(pi < 0.5);
    const double epsilon = 0.6;
    const std::uint64_t S = 400;
    const double bound = weissman_bound(static_cast<int>(exact.distinct_keys()), pi, S, epsilon);
    REQUIRE(bound <= 1.0);
    int violations = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const EmpiricalSpectrum e =
            sample_spectrum(g, EncodingKind::VED, S, 70000 + static_cast<std::uint64_t>(t));
        violations += l1_distance(truth, e.probs) >= epsilon;
    }
    CHECK(static_cast<double>(violations) / trials <= bound + 1e-12);
}

TEST_CASE("median L1 is non-increasing across the S ladder") {
    const Graph toy = toy_triangle();
    const FeatureSpectrum exact = enumerate_spectrum(toy, EncodingKind::VED);
    const KeyDistribution truth = true_distribution(exact);
    double prev_median = 2.0;
    for (std::uint64_t S : {100ull, 1000ull, 10000ull, 100000ull}) {
        std::vector<double> l1s;
        for (int t = 0; t < 101; ++t)
            l1s.push_back(l1_distance(
                truth,
                sample_spectrum(toy, EncodingKind::VED, S, 4200 + static_cast<std::uint64_t>(t))
                    .probs));
        std::nth_element(l1s.begin(), l1s.begin() + 50, l1s.end());
        const double median = l1s[50];
        CHECK(median <= prev_median);
        prev_median = median;
    }
}

TEST_CASE("large fixed-seed samples approximate S = infinity") {
    // At S = 2^n * 16384 the recorded L1 values sit below 0.01; the
    // 2^n * 64 budget only reaches the 0.03..0.1 range.
    for (int n : {3, 5, 8}) {
        const Graph g = n == 3 ? toy_triangle() : random_graph(n, 0.5, 1000 + n);
        const FeatureSpectrum exact = enumerate_spectrum(g, EncodingKind::VED);
        const std::uint64_t S = (std::uint64_t{1} << n) * 16384;
        const EmpiricalSpectrum e = sample_spectrum(g, EncodingKind::VED, S, 1);
        CHECK(l1_distance(true_distribution(exact), e.probs) < 0.01);
    }
}

TEST_CASE("concentration report") {
    const Graph toy = toy_triangle();
    const FeatureSpectrum exact = enumerate_spectrum(toy, EncodingKind::VED);
    const EmpiricalSpectrum e = sample_spectrum(toy, EncodingKind::VED, 1000, 5);
    const ConcentrationReport r = concentration_report(exact, e, 0.5, 0.1);
    CHECK(r.pi_P == 0.375);
    CHECK(r.phi == Approx(phi_weissman(0.375)));
    CHECK(r.bound <= 1.0);
    CHECK(r.l1 >= 0.0);
}
