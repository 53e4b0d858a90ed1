#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "asgk/encoding.hpp"
#include "asgk/graph.hpp"
#include "asgk/parallel.hpp"

namespace asgk {

using uint128 = unsigned __int128;

namespace detail {

// Open-addressed u64 key -> u64 count accumulator for the enumeration
// hot loop; linear probing, no deletion, grows at 0.7 load.
class KeyAccumulator {
public:
    explicit KeyAccumulator(std::size_t expected = 1024) {
        std::size_t cap = 64;
        while (cap < expected * 2) cap <<= 1;
        keys_.assign(cap, kEmpty);
        counts_.assign(cap, 0);
        mask_ = cap - 1;
    }

    void add(std::uint64_t key, std::uint64_t count = 1) {
        std::size_t slot = hash(key) & mask_;
        for (;;) {
            if (keys_[slot] == key) {
                counts_[slot] += count;
                return;
            }
            if (keys_[slot] == kEmpty) {
                keys_[slot] = key;
                counts_[slot] = count;
                if (++size_ * 10 > keys_.size() * 7) grow();
                return;
            }
            slot = (slot + 1) & mask_;
        }
    }

    std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted_entries() const {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
        out.reserve(size_);
        for (std::size_t i = 0; i < keys_.size(); ++i)
            if (keys_[i] != kEmpty) out.emplace_back(keys_[i], counts_[i]);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

    static std::uint64_t hash(std::uint64_t x) {
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        return x;
    }

    void grow() {
        std::vector<std::uint64_t> old_keys = std::move(keys_);
        std::vector<std::uint64_t> old_counts = std::move(counts_);
        const std::size_t cap = old_keys.size() * 2;
        keys_.assign(cap, kEmpty);
        counts_.assign(cap, 0);
        mask_ = cap - 1;
        size_ = 0;
        for (std::size_t i = 0; i < old_keys.size(); ++i)
            if (old_keys[i] != kEmpty) add(old_keys[i], old_counts[i]);
    }

    std::vector<std::uint64_t> keys_;
    std::vector<std::uint64_t> counts_;
    std::size_t mask_ = 0;
    std::size_t size_ = 0;
};

}  // namespace detail

/// Exact multiplicity map over all 2^n induced subgraphs of one graph:
/// counts[k] is the number of vertex masks whose feature tuple equals
/// the k-th key. Keys are packed in the shared 64-vertex universe and
/// kept sorted, which is the canonical (v,e,d1,d2,d3) order.
struct FeatureSpectrum {
    int n = 0;
    EncodingKind kind = EncodingKind::VE;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> counts;  // packed key -> |X_k|
    std::uint64_t sum_counts = 0;                                 // always 2^n
    uint128 sum_sq_counts = 0;                                    // sum of |X_k|^2, exact

    std::size_t distinct_keys() const { return counts.size(); }

    std::uint64_t count_for(const FeatureKey& k) const {
        const std::uint64_t packed = key_pack(k);
        auto it = std::lower_bound(counts.begin(), counts.end(),
                                   std::make_pair(packed, std::uint64_t{0}));
        return (it != counts.end() && it->first == packed) ? it->second : 0;
    }

    /// Exact numerator / denominator of Pr(0^n): sum |X_k|^2 over 2^{2n}.
    uint128 success_numerator() const { return sum_sq_counts; }
    int success_denominator_log2() const { return 2 * n; }
};

struct EnumerateOptions {
    unsigned threads = 0;  // 0 = hardware default
    int max_n = 28;        // resource guard
};

/// Enumerates the full feature spectrum by iterating every mask in
/// [0, 2^n). Workers own disjoint mask blocks and private histograms;
/// merging is exact integer addition, so the result is independent of
/// the thread count.
inline FeatureSpectrum enumerate_spectrum(const Graph& g, EncodingKind kind,
                                          const EnumerateOptions& opts = {}) {
    const int n = g.num_vertices();
    if (n > opts.max_n)
        throw std::invalid_argument("enumerate_spectrum: n=" + std::to_string(n) +
                                    " exceeds configured limit " + std::to_string(opts.max_n));
    if (n > 63) throw std::invalid_argument("enumerate_spectrum: n must be <= 63");
    const std::uint64_t total = std::uint64_t{1} << n;
    const std::uint64_t* adj = g.rows();
    const bool ved = kind == EncodingKind::VED;

    unsigned threads = resolve_threads(opts.threads);
    if (total < (std::uint64_t{1} << 16)) threads = 1;
    std::vector<detail::KeyAccumulator> local(threads, detail::KeyAccumulator(1024));

    parallel_blocks(total, threads, [&](std::uint64_t begin, std::uint64_t end, unsigned w) {
        detail::KeyAccumulator& acc = local[w];
        for (std::uint64_t x = begin; x < end; ++x) {
            std::uint64_t v = static_cast<std::uint64_t>(std::popcount(x));
            std::uint64_t twice_e = 0, d1 = 0, d2 = 0, d3 = 0;
            std::uint64_t bits = x;
            while (bits) {
                const int i = std::countr_zero(bits);
                bits &= bits - 1;
                const int deg = std::popcount(adj[i] & x);
                twice_e += static_cast<std::uint64_t>(deg);
                if (ved) {
                    d1 += deg == 1;
                    d2 += deg == 2;
                    d3 += deg == 3;
                }
            }
            // key_pack(FeatureKey{v, e, d1, d2, d3}, kKeyUniverse) inlined
            const std::uint64_t packed =
                (((v * 2017 + twice_e / 2) * 65 + d1) * 65 + d2) * 65 + d3;
            acc.add(packed);
        }
    });

    detail::KeyAccumulator merged(4096);
    for (const auto& acc : local)
        for (const auto& [key, count] : acc.sorted_entries()) merged.add(key, count);

    FeatureSpectrum s;
    s.n = n;
    s.kind = kind;
    s.counts = merged.sorted_entries();
    for (const auto& [key, count] : s.counts) {
        s.sum_counts += count;
        s.sum_sq_counts += static_cast<uint128>(count) * count;
    }
    if (s.sum_counts != total)
        throw std::logic_error("enumerate_spectrum: counts do not sum to 2^n");
    return s;
}

/// Pr(0^n) = sum_k |X_k|^2 / 2^{2n}. Exact integers divided once; for
/// n <= 28 every intermediate fits a long double mantissa.
inline double success_probability(const FeatureSpectrum& s) {
    return static_cast<double>(static_cast<long double>(s.sum_sq_counts) *
                               std::exp2l(-2.0L * s.n));
}

/// Lower bound 1/a on the post-selection probability, with a the
/// observed range size.
inline double success_lower_bound(const FeatureSpectrum& s) {
    return 1.0 / static_cast<double>(s.distinct_keys());
}

/// Collapses a VED spectrum onto the VE encoding by summing counts over
/// the degree components.
inline FeatureSpectrum project_to_ve(const FeatureSpectrum& ved) {
    if (ved.kind != EncodingKind::VED)
        throw std::invalid_argument("project_to_ve: spectrum is not VED");
    detail::KeyAccumulator acc(ved.counts.size());
    for (const auto& [packed, count] : ved.counts) {
        FeatureKey k = key_unpack(packed);
        k.d1 = k.d2 = k.d3 = 0;
        acc.add(key_pack(k), count);
    }
    FeatureSpectrum s;
    s.n = ved.n;
    s.kind = EncodingKind::VE;
    s.counts = acc.sorted_entries();
    for (const auto& [key, count] : s.counts) {
        s.sum_counts += count;
        s.sum_sq_counts += static_cast<uint128>(count) * count;
    }
    return s;
}

/// Spectrum file: header "# n=<n> kind=<VE|VED> sum=<2^n>", then one
/// "v:e[:d1:d2:d3] <count>" line per key in canonical order.
inline void write_spectrum(std::ostream& out, const FeatureSpectrum& s) {
    out << "# n=" << s.n << " kind=" << encoding_name(s.kind) << " sum=" << s.sum_counts << "\n";
    for (const auto& [packed, count] : s.counts)
        out << key_to_string(key_unpack(packed), s.kind) << " " << count << "\n";
}

inline FeatureSpectrum read_spectrum(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("# n=", 0) != 0)
        throw std::runtime_error("read_spectrum: missing header");
    FeatureSpectrum s;
    std::uint64_t declared_sum = 0;
    {
        std::istringstream hs(header.substr(1));
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("n=", 0) == 0) s.n = std::stoi(tok.substr(2));
            else if (tok.rfind("kind=", 0) == 0) s.kind = encoding_from_name(tok.substr(5));
            else if (tok.rfind("sum=", 0) == 0) declared_sum = std::stoull(tok.substr(4));
        }
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key_text;
        std::uint64_t count = 0;
        if (!(ls >> key_text >> count))
            throw std::runtime_error("read_spectrum: bad line '" + line + "'");
        const FeatureKey k = key_from_string(key_text, s.kind);
        s.counts.emplace_back(key_pack(k), count);
        s.sum_counts += count;
        s.sum_sq_counts += static_cast<uint128>(count) * count;
    }
    std::sort(s.counts.begin(), s.counts.end());
    if (declared_sum != 0 && declared_sum != s.sum_counts)
        throw std::runtime_error("read_spectrum: counts do not match declared sum");
    return s;
}

/// One row of the success-probability-vs-n sweep: per vertex-count
/// bucket, the observed mean range size, the mean Pr(0^n) and the
/// sqrt(n)/n^c reference curve (c = 3 for VE, 6 for VED).
struct RangeGrowthRow {
    int n = 0;
    std::size_t graphs = 0;
    double mean_distinct_keys = 0.0;
    double mean_success_probability = 0.0;
    double reference_bound = 0.0;
};

inline std::vector<RangeGrowthRow> range_growth_report(const std::vector<FeatureSpectrum>& spectra) {
    if (spectra.empty()) throw std::invalid_argument("range_growth_report: no spectra");
    std::map<int, RangeGrowthRow> rows;
    const int c = spectra.front().kind == EncodingKind::VE ? 3 : 6;
    for (const FeatureSpectrum& s : spectra) {
        RangeGrowthRow& row = rows[s.n];
        row.n = s.n;
        ++row.graphs;
        row.mean_distinct_keys += static_cast<double>(s.distinct_keys());
        row.mean_success_probability += success_probability(s);
    }
    std::vector<RangeGrowthRow> out;
    out.reserve(rows.size());
    for (auto& [n, row] : rows) {
        row.mean_distinct_keys /= static_cast<double>(row.graphs);
        row.mean_success_probability /= static_cast<double>(row.graphs);
        row.reference_bound = std::sqrt(static_cast<double>(n)) / std::pow(static_cast<double>(n), c);
        out.push_back(row);
    }
    return out;
}

}  // namespace asgk
