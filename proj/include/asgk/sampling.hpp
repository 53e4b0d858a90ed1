#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "asgk/encoding.hpp"
#include "asgk/graph.hpp"
#include "asgk/spectrum.hpp"

namespace asgk {

/// Stateless counter-based generator: value i of a stream is a mix of
/// (seed, i), so parallel trials with distinct seeds are reproducible
/// without shared state. The mix is the splitmix64 finalizer.
struct CounterRng {
    std::uint64_t seed = 0;

    std::uint64_t operator()(std::uint64_t i) const {
        std::uint64_t z = seed + (i + 1) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// Sparse probability vector over packed feature keys, sorted by key.
using KeyDistribution = std::vector<std::pair<std::uint64_t, double>>;

struct EmpiricalSpectrum {
    int n = 0;
    EncodingKind kind = EncodingKind::VE;
    std::uint64_t sample_size = 0;
    std::uint64_t seed = 0;
    KeyDistribution probs;  // only keys with positive empirical frequency
};

/// Draws S subgraph masks i.i.d. uniform over {0,1}^n (with replacement)
/// and returns the empirical feature distribution.
inline EmpiricalSpectrum sample_spectrum(const Graph& g, EncodingKind kind, std::uint64_t S,
                                         std::uint64_t seed) {
    if (S == 0) throw std::invalid_argument("sample_spectrum: sample size must be >= 1");
    const int n = g.num_vertices();
    if (n > 63) throw std::invalid_argument("sample_spectrum: n must be <= 63");
    const std::uint64_t mask = (n == 63) ? ~std::uint64_t{0} >> 1 : (std::uint64_t{1} << n) - 1;
    const CounterRng rng{seed};
    detail::KeyAccumulator acc(256);
    for (std::uint64_t i = 0; i < S; ++i) {
        const std::uint64_t x = rng(i) & mask;
        acc.add(key_pack(encode_subgraph(g, x, kind)));
    }
    EmpiricalSpectrum e;
    e.n = n;
    e.kind = kind;
    e.sample_size = S;
    e.seed = seed;
    for (const auto& [key, count] : acc.sorted_entries())
        e.probs.emplace_back(key, static_cast<double>(count) / static_cast<double>(S));
    return e;
}

/// P(y_k) = |X_k| / 2^n from the exact spectrum.
inline KeyDistribution true_distribution(const FeatureSpectrum& s) {
    KeyDistribution out;
    out.reserve(s.counts.size());
    const double denom = std::exp2(static_cast<double>(s.n));
    for (const auto& [key, count] : s.counts)
        out.emplace_back(key, static_cast<double>(count) / denom);
    return out;
}

/// pi_P = max_k P(y_k); the Weissman bound requires pi_P < 1/2.
inline double max_key_probability(const FeatureSpectrum& s) {
    std::uint64_t best = 0;
    for (const auto& [key, count] : s.counts) best = std::max(best, count);
    return static_cast<double>(best) * std::exp2(-static_cast<double>(s.n));
}

/// L1 distance over the union of keys; missing keys count as zero.
inline double l1_distance(const KeyDistribution& p, const KeyDistribution& q) {
    double d = 0.0;
    auto ip = p.begin();
    auto iq = q.begin();
    while (ip != p.end() || iq != q.end()) {
        if (iq == q.end() || (ip != p.end() && ip->first < iq->first)) {
            d += std::abs(ip->second);
            ++ip;
        } else if (ip == p.end() || iq->first < ip->first) {
            d += std::abs(iq->second);
            ++iq;
        } else {
            d += std::abs(ip->second - iq->second);
            ++ip;
            ++iq;
        }
    }
    return d;
}

/// phi(p) = ln((1-p)/p) / (1-2p), the exponent constant of the Weissman
/// L1 concentration inequality.
inline double phi_weissman(double p) {
    if (!(p > 0.0 && p < 0.5))
        throw std::domain_error("phi_weissman: p must lie in (0, 1/2)");
    return std::log((1.0 - p) / p) / (1.0 - 2.0 * p);
}

/// Tail bound (2^a - 2) exp(-S phi(pi_P) eps^2 / 4) on Pr(L1 >= eps).
/// Evaluated in log space; callers clamp to 1 when quoting it as a
/// probability.
inline double weissman_bound(int a, double pi_P, std::uint64_t S, double epsilon) {
    if (a < 2) throw std::invalid_argument("weissman_bound: a must be >= 2");
    if (S < 1) throw std::invalid_argument("weissman_bound: S must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("weissman_bound: epsilon must be > 0");
    if (!(pi_P > 0.0 && pi_P < 0.5))
        throw std::domain_error("weissman_bound: pi_P must lie in (0, 1/2)");
    const long double log_count =
        static_cast<long double>(a) * 0.6931471805599453094L +
        std::log1p(-std::exp2l(static_cast<long double>(1 - a)));
    const long double log_bound =
        log_count - static_cast<long double>(S) * phi_weissman(pi_P) * epsilon * epsilon / 4.0L;
    return static_cast<double>(std::exp(log_bound));
}

struct SampleSizeEstimate {
    std::uint64_t samples = 0;      // smallest S with bound <= delta
    double asymptotic_scale = 0.0;  // (a ln2 - ln delta) / (eps^2 ln n)
};

/// Inverts the Weissman bound: smallest S with
/// (2^a) exp(-S phi(pi_P) eps^2 / 4) <= delta, i.e.
/// ceil(4 (a ln2 - ln delta) / (eps^2 phi(pi_P))).
inline SampleSizeEstimate sample_size_for(int a, double epsilon, double delta, int n,
                                          double pi_P) {
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("sample_size_for: epsilon and delta must lie in (0,1)");
    if (n < 2) throw std::invalid_argument("sample_size_for: n must be >= 2");
    const double phi = phi_weissman(pi_P);
    const double numerator = a * std::log(2.0) - std::log(delta);
    SampleSizeEstimate est;
    est.samples = static_cast<std::uint64_t>(
        std::ceil(4.0 * numerator / (epsilon * epsilon * phi)));
    est.asymptotic_scale = numerator / (epsilon * epsilon * std::log(static_cast<double>(n)));
    return est;
}

struct ConcentrationReport {
    double epsilon = 0.0;
    double delta = 0.0;
    double l1 = 0.0;
    double bound = 0.0;  // clamped to [0, 1]
    double phi = 0.0;
    double pi_P = 0.0;
};

inline ConcentrationReport concentration_report(const FeatureSpectrum& exact,
                                                const EmpiricalSpectrum& empirical,
                                                double epsilon, double delta) {
    const double pi = max_key_probability(exact);
    ConcentrationReport r;
    r.epsilon = epsilon;
    r.delta = delta;
    r.pi_P = pi;
    r.phi = phi_weissman(pi);
    r.l1 = l1_distance(true_distribution(exact), empirical.probs);
    r.bound = std::min(1.0, weissman_bound(static_cast<int>(exact.distinct_keys()), pi,
                                           empirical.sample_size, epsilon));
    return r;
}

}  // namespace asgk
