#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "asgk/encoding.hpp"
#include "asgk/graph.hpp"
#include "asgk/kernels.hpp"
#include "asgk/parallel.hpp"
#include "asgk/spectrum.hpp"

namespace asgk {

/// Basis label of the sparse simulator: an optional control bit, the
/// index register value and the feature register content. The feature
/// register only ever holds basis states, so it is tracked as a packed
/// feature key rather than as qubits.
struct BasisLabel {
    std::int8_t flag = -1;    // -1 when the state has no control qubit
    std::uint64_t index = 0;  // bit i = vertex i
    std::uint64_t key = 0;    // packed feature key

    friend auto operator<=>(const BasisLabel&, const BasisLabel&) = default;
};

/// Real-amplitude sparse state; every circuit simulated here is real.
struct SparseState {
    int n = 0;        // index register width
    int n2 = -1;      // second register width for switch-prepared states
    EncodingKind kind = EncodingKind::VE;
    bool has_flag = false;
    std::map<BasisLabel, double> amp;

    double norm_sq() const {
        double s = 0.0;
        for (const auto& [label, a] : amp) s += a * a;
        return s;
    }
};

struct FeatureAmplitude {
    int flag = -1;
    std::uint64_t key = 0;
    double amplitude = 0.0;
};

/// Outcome of post-selecting the all-zeros index register: the success
/// probability, the renormalized feature-register state and the
/// pre-normalization constant of the feature-register expression.
struct PostselectResult {
    double probability = 0.0;
    double norm_constant = 0.0;
    bool has_flag = false;
    std::vector<FeatureAmplitude> state;  // sorted by (flag, key)
};

inline constexpr int kSimMaxVertices = 14;

/// |G-bar> = 2^{-n/2} sum_x |x>|E(G,x)>; the oracle is realized by
/// evaluating the encoding classically for each basis index.
inline SparseState build_indexed_state(const Graph& g, EncodingKind kind) {
    const int n = g.num_vertices();
    if (n > kSimMaxVertices)
        throw std::invalid_argument("build_indexed_state: n exceeds simulation budget");
    SparseState s;
    s.n = n;
    s.kind = kind;
    const double a = std::exp2(-0.5 * n);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t x = 0; x < total; ++x)
        s.amp[{-1, x, key_pack(encode_subgraph(g, x, kind))}] = a;
    return s;
}

namespace detail {

// In-place unnormalized fast Walsh-Hadamard butterfly.
inline void walsh_hadamard(std::vector<double>& v) {
    const std::size_t size = v.size();
    for (std::size_t len = 1; len < size; len <<= 1)
        for (std::size_t i = 0; i < size; i += len << 1)
            for (std::size_t j = i; j < i + len; ++j) {
                const double a = v[j], b = v[j + len];
                v[j] = a + b;
                v[j + len] = a - b;
            }
}

// Groups a flag-slice of the state by feature key into dense index
// vectors of width 2^bits.
inline std::map<std::uint64_t, std::vector<double>> group_by_key(const SparseState& s, int flag,
                                                                 int bits) {
    std::map<std::uint64_t, std::vector<double>> groups;
    const std::uint64_t width = std::uint64_t{1} << bits;
    for (const auto& [label, a] : s.amp) {
        if (label.flag != flag) continue;
        if (label.index >= width)
            throw std::logic_error("group_by_key: index outside register width");
        auto [it, inserted] = groups.try_emplace(label.key);
        if (inserted) it->second.assign(width, 0.0);
        it->second[label.index] += a;
    }
    return groups;
}

}  // namespace detail

/// Applies H on every index qubit (a fast Walsh-Hadamard transform per
/// feature key), measures the index register and keeps the 0^n branch.
inline PostselectResult hadamard_index_and_postselect(const SparseState& s, unsigned threads = 0) {
    if (s.has_flag)
        throw std::invalid_argument("hadamard_index_and_postselect: state has a control qubit");
    auto groups = detail::group_by_key(s, -1, s.n);
    std::vector<std::pair<std::uint64_t, std::vector<double>*>> items;
    items.reserve(groups.size());
    for (auto& [key, vec] : groups) items.emplace_back(key, &vec);
    const double scale = std::exp2(-0.5 * s.n);
    std::vector<double> zero_amp(items.size());
    parallel_for_index(items.size(), threads, [&](std::size_t i) {
        detail::walsh_hadamard(*items[i].second);
        zero_amp[i] = (*items[i].second)[0] * scale;
    });
    PostselectResult r;
    for (double a : zero_amp) r.probability += a * a;
    r.norm_constant = std::sqrt(r.probability);
    r.state.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
        if (zero_amp[i] != 0.0)
            r.state.push_back({-1, items[i].first, zero_amp[i] / r.norm_constant});
    return r;
}

/// Swap-test acceptance probability Pr(0) for two post-selected feature
/// states: control H, controlled swap of the feature registers, control
/// H, then measure the control. Equals (1 + <A|B>^2)/2 for real states.
inline double swap_test_prob(const PostselectResult& a, const PostselectResult& b) {
    if (a.has_flag || b.has_flag)
        throw std::invalid_argument("swap_test_prob: inputs must be single-register states");
    std::vector<std::uint64_t> keys;
    keys.reserve(a.state.size() + b.state.size());
    for (const auto& e : a.state) keys.push_back(e.key);
    for (const auto& e : b.state) keys.push_back(e.key);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<double> va(keys.size(), 0.0), vb(keys.size(), 0.0);
    auto slot = [&](std::uint64_t key) {
        return static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), key) -
                                        keys.begin());
    };
    for (const auto& e : a.state) va[slot(e.key)] = e.amplitude;
    for (const auto& e : b.state) vb[slot(e.key)] = e.amplitude;
    // after the second control H the 0-branch holds (|xy> + |yx>)/2
    double pr0 = 0.0;
    for (std::size_t i = 0; i < keys.size(); ++i)
        for (std::size_t j = 0; j < keys.size(); ++j) {
            const double symm = 0.5 * (va[i] * vb[j] + va[j] * vb[i]);
            pr0 += symm * symm;
        }
    return pr0;
}

/// (|0>|G-bar> + |1>|0^{n-n'}>|G'-bar>)/sqrt(2) with n >= n'.
inline SparseState build_switch_state(const Graph& g, const Graph& gp, EncodingKind kind) {
    const int n = g.num_vertices(), np = gp.num_vertices();
    if (n < np) throw std::invalid_argument("build_switch_state: requires n >= n'");
    if (n > kSimMaxVertices)
        throw std::invalid_argument("build_switch_state: n exceeds simulation budget");
    SparseState s;
    s.n = n;
    s.n2 = np;
    s.kind = kind;
    s.has_flag = true;
    const double a0 = std::exp2(-0.5 * n) / std::sqrt(2.0);
    const double a1 = std::exp2(-0.5 * np) / std::sqrt(2.0);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x)
        s.amp[{0, x, key_pack(encode_subgraph(g, x, kind))}] = a0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << np); ++x)
        s.amp[{1, x, key_pack(encode_subgraph(gp, x, kind))}] = a1;
    return s;
}

/// Controlled H^{x n} / H^{x n'} on the index register followed by
/// post-selection of 0^n. norm_constant normalizes the two-branch
/// feature expression before the control qubit is measured.
inline PostselectResult controlled_hadamard_postselect(const SparseState& s, unsigned threads = 0) {
    if (!s.has_flag || s.n2 < 0)
        throw std::invalid_argument("controlled_hadamard_postselect: not a switch-prepared state");
    PostselectResult r;
    r.has_flag = true;
    std::vector<FeatureAmplitude> raw;
    for (int flag = 0; flag <= 1; ++flag) {
        const int bits = flag == 0 ? s.n : s.n2;
        auto groups = detail::group_by_key(s, flag, bits);
        std::vector<std::pair<std::uint64_t, std::vector<double>*>> items;
        items.reserve(groups.size());
        for (auto& [key, vec] : groups) items.emplace_back(key, &vec);
        const double scale = std::exp2(-0.5 * bits);
        std::vector<double> zero_amp(items.size());
        parallel_for_index(items.size(), threads, [&](std::size_t i) {
            detail::walsh_hadamard(*items[i].second);
            zero_amp[i] = (*items[i].second)[0] * scale;
        });
        for (std::size_t i = 0; i < items.size(); ++i) {
            r.probability += zero_amp[i] * zero_amp[i];
            if (zero_amp[i] != 0.0) raw.push_back({flag, items[i].first, zero_amp[i]});
        }
    }
    // the two-branch expression carries squared mass 2 * probability
    // before the 1/sqrt(2) control weights
    r.norm_constant = std::sqrt(2.0 * r.probability);
    const double inv = 1.0 / std::sqrt(r.probability);
    for (auto& e : raw) e.amplitude *= inv;
    r.state = std::move(raw);
    return r;
}

/// Switch test on a control-superposed feature state: H on the control,
/// then Pr(control = 0). Equals (1 + K_SH)/2 for switch-prepared inputs.
inline double switch_test_prob(const PostselectResult& r) {
    if (!r.has_flag) throw std::invalid_argument("switch_test_prob: state has no control qubit");
    std::map<std::uint64_t, double> merged;
    for (const auto& e : r.state) merged[e.key] += e.amplitude;  // (a0 + a1) per key
    double pr0 = 0.0;
    for (const auto& [key, sum] : merged) pr0 += 0.5 * sum * sum;
    return pr0;
}

/// Grover-style amplitude amplification of the 0^n-index branch after
/// the index Hadamard. Returns the squared mass of the good subspace
/// after t iterations; equals sin^2((2t+1) theta) with
/// sin^2(theta) = Pr(0^n). The reflection about the prepared state uses
/// the stored preparation vectors, never an explicit matrix.
inline double aa_amplitude(const Graph& g, EncodingKind kind, int t) {
    if (t < 0) throw std::invalid_argument("aa_amplitude: t must be >= 0");
    const int n = g.num_vertices();
    if (n > 12) throw std::invalid_argument("aa_amplitude: n exceeds simulation budget");
    const SparseState indexed = build_indexed_state(g, kind);
    auto groups = detail::group_by_key(indexed, -1, n);
    const double scale = std::exp2(-0.5 * n);
    std::vector<std::vector<double>> psi;  // prepared state, dense per key
    psi.reserve(groups.size());
    for (auto& [key, vec] : groups) {
        detail::walsh_hadamard(vec);
        for (double& a : vec) a *= scale;
        psi.push_back(std::move(vec));
    }
    std::vector<std::vector<double>> phi = psi;
    for (int iter = 0; iter < t; ++iter) {
        for (auto& vec : phi) vec[0] = -vec[0];  // reflect good subspace (index 0^n)
        double overlap = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k)
            for (std::size_t i = 0; i < phi[k].size(); ++i) overlap += psi[k][i] * phi[k][i];
        for (std::size_t k = 0; k < phi.size(); ++k)
            for (std::size_t i = 0; i < phi[k].size(); ++i)
                phi[k][i] = 2.0 * overlap * psi[k][i] - phi[k][i];
    }
    double good = 0.0;
    for (const auto& vec : phi) good += vec[0] * vec[0];
    return good;
}

/// Circuit-vs-closed-form comparison for one graph pair.
struct PairVerification {
    int n = 0;
    int n_prime = 0;
    EncodingKind kind = EncodingKind::VE;
    double p_postselect = 0.0;  // switch-circuit index post-selection probability
    double p_bound = 0.0;       // (1/a + 1/a')/2
    double swap_pr0 = 0.0;
    double switch_pr0 = 0.0;
    double bh_closed = 0.0;
    double sh_closed = 0.0;
    double max_abs_dev = 0.0;
};

inline PairVerification verify_pair(const Graph& a, const Graph& b, EncodingKind kind) {
    const Graph& big = a.num_vertices() >= b.num_vertices() ? a : b;
    const Graph& small = a.num_vertices() >= b.num_vertices() ? b : a;
    PairVerification v;
    v.n = big.num_vertices();
    v.n_prime = small.num_vertices();
    v.kind = kind;

    const FeatureSpectrum sa = enumerate_spectrum(big, kind);
    const FeatureSpectrum sb = enumerate_spectrum(small, kind);
    v.bh_closed = bh_kernel(sa, sb);
    v.sh_closed = sh_kernel(sa, sb);
    v.p_bound = 0.5 * (success_lower_bound(sa) + success_lower_bound(sb));

    const PostselectResult pa = hadamard_index_and_postselect(build_indexed_state(big, kind));
    const PostselectResult pb = hadamard_index_and_postselect(build_indexed_state(small, kind));
    v.swap_pr0 = swap_test_prob(pa, pb);

    const PostselectResult sw =
        controlled_hadamard_postselect(build_switch_state(big, small, kind));
    v.p_postselect = sw.probability;
    v.switch_pr0 = switch_test_prob(sw);

    v.max_abs_dev = std::max(std::abs(2.0 * v.swap_pr0 - 1.0 - v.bh_closed * v.bh_closed),
                             std::abs(2.0 * v.switch_pr0 - 1.0 - v.sh_closed));
    return v;
}

/// Seeded measurement sampling of a post-selected feature state, for
/// demonstrating estimator variance; returns per-key hit counts.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> sample_shots(
    const PostselectResult& r, std::uint64_t shots, std::uint64_t seed) {
    std::vector<double> cdf;
    cdf.reserve(r.state.size());
    double acc = 0.0;
    for (const auto& e : r.state) {
        acc += e.amplitude * e.amplitude;
        cdf.push_back(acc);
    }
    std::vector<std::uint64_t> hits(r.state.size(), 0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double x = u(rng) * acc;
        const std::size_t i = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), x) - cdf.begin());
        ++hits[std::min(i, hits.size() - 1)];
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (std::size_t i = 0; i < hits.size(); ++i)
        if (hits[i]) out.emplace_back(r.state[i].key, hits[i]);
    return out;
}

}  // namespace asgk
