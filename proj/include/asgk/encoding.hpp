#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "asgk/graph.hpp"

namespace asgk {

enum class EncodingKind { VE, VED };

inline std::string_view encoding_name(EncodingKind k) { return k == EncodingKind::VE ? "VE" : "VED"; }

inline EncodingKind encoding_from_name(std::string_view s) {
    if (s == "VE" || s == "ve") return EncodingKind::VE;
    if (s == "VED" || s == "ved") return EncodingKind::VED;
    throw std::invalid_argument("unknown encoding: " + std::string(s));
}

/// Feature tuple of an induced subgraph: vertex count, edge count and,
/// for the VED encoding, the number of vertices of induced degree 1, 2
/// and 3. Ordered lexicographically on (v, e, d1, d2, d3).
struct FeatureKey {
    std::uint16_t v = 0;
    std::uint16_t e = 0;
    std::uint16_t d1 = 0;
    std::uint16_t d2 = 0;
    std::uint16_t d3 = 0;

    friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
};

/// Feature tuple of the subgraph induced by mask x. Edge counts use the
/// induced-subgraph convention: every edge of g between chosen vertices.
inline FeatureKey encode_subgraph(const Graph& g, std::uint64_t x, EncodingKind kind) {
    const int n = g.num_vertices();
    if (n < 64 && (x >> n) != 0)
        throw std::out_of_range("encode_subgraph: mask bit set at position >= n");
    const std::uint64_t* adj = g.rows();
    FeatureKey key;
    key.v = static_cast<std::uint16_t>(std::popcount(x));
    int twice_e = 0;
    std::uint64_t bits = x;
    if (kind == EncodingKind::VE) {
        while (bits) {
            const int i = std::countr_zero(bits);
            bits &= bits - 1;
            twice_e += std::popcount(adj[i] & x);
        }
    } else {
        while (bits) {
            const int i = std::countr_zero(bits);
            bits &= bits - 1;
            const int deg = std::popcount(adj[i] & x);
            twice_e += deg;
            if (deg == 1) ++key.d1;
            else if (deg == 2) ++key.d2;
            else if (deg == 3) ++key.d3;
        }
    }
    key.e = static_cast<std::uint16_t>(twice_e / 2);
    return key;
}

/// Universe parameter for packed keys shared across graphs of different
/// sizes: all spectra pack with the 64-vertex radices so that equal
/// feature tuples map to equal packed keys for every graph.
inline constexpr int kKeyUniverse = 64;

/// Mixed-radix packing with radices (n+1, n(n-1)/2+1, n+1, n+1, n+1) in
/// (v, e, d1, d2, d3) order. Strictly monotone in the lexicographic key
/// order and invertible by key_unpack.
inline std::uint64_t key_pack(const FeatureKey& k, int n = kKeyUniverse) {
    const std::uint64_t rv = static_cast<std::uint64_t>(n) + 1;
    const std::uint64_t re = static_cast<std::uint64_t>(n) * (n - 1) / 2 + 1;
    if (k.v >= rv || k.e >= re || k.d1 >= rv || k.d2 >= rv || k.d3 >= rv)
        throw std::out_of_range("key_pack: component out of range for n=" + std::to_string(n));
    std::uint64_t packed = k.v;
    packed = packed * re + k.e;
    packed = packed * rv + k.d1;
    packed = packed * rv + k.d2;
    packed = packed * rv + k.d3;
    return packed;
}

inline FeatureKey key_unpack(std::uint64_t packed, int n = kKeyUniverse) {
    const std::uint64_t rv = static_cast<std::uint64_t>(n) + 1;
    const std::uint64_t re = static_cast<std::uint64_t>(n) * (n - 1) / 2 + 1;
    FeatureKey k;
    k.d3 = static_cast<std::uint16_t>(packed % rv);
    packed /= rv;
    k.d2 = static_cast<std::uint16_t>(packed % rv);
    packed /= rv;
    k.d1 = static_cast<std::uint16_t>(packed % rv);
    packed /= rv;
    k.e = static_cast<std::uint16_t>(packed % re);
    packed /= re;
    if (packed >= rv) throw std::out_of_range("key_unpack: packed value out of range");
    k.v = static_cast<std::uint16_t>(packed);
    return k;
}

/// Textual form used in spectrum files: "v:e" (VE) or "v:e:d1:d2:d3" (VED).
inline std::string key_to_string(const FeatureKey& k, EncodingKind kind) {
    std::string s = std::to_string(k.v) + ":" + std::to_string(k.e);
    if (kind == EncodingKind::VED)
        s += ":" + std::to_string(k.d1) + ":" + std::to_string(k.d2) + ":" +
             std::to_string(k.d3);
    return s;
}

inline FeatureKey key_from_string(std::string_view s, EncodingKind kind) {
    FeatureKey k;
    std::uint16_t* fields[5] = {&k.v, &k.e, &k.d1, &k.d2, &k.d3};
    const int expected = kind == EncodingKind::VE ? 2 : 5;
    int idx = 0;
    std::size_t pos = 0;
    while (pos <= s.size() && idx < expected) {
        std::size_t colon = s.find(':', pos);
        if (colon == std::string_view::npos) colon = s.size();
        const std::string_view tok = s.substr(pos, colon - pos);
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || ptr != tok.data() + tok.size())
            throw std::invalid_argument("key_from_string: bad component '" + std::string(tok) + "'");
        *fields[idx++] = static_cast<std::uint16_t>(value);
        pos = colon + 1;
    }
    if (idx != expected || pos <= s.size())
        throw std::invalid_argument("key_from_string: wrong component count in '" + std::string(s) + "'");
    return k;
}

}  // namespace asgk
