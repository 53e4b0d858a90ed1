#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "asgk/parallel.hpp"
#include "asgk/spectrum.hpp"

namespace asgk {

enum class KernelKind { BH, SH, NAIVE_INDEXED, CLASSICAL_NORMALIZED };

inline std::string_view kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::BH: return "BH";
        case KernelKind::SH: return "SH";
        case KernelKind::NAIVE_INDEXED: return "NAIVE_INDEXED";
        case KernelKind::CLASSICAL_NORMALIZED: return "CLASSICAL_NORMALIZED";
    }
    return "?";
}

inline KernelKind kernel_from_name(std::string_view s) {
    if (s == "BH" || s == "bh") return KernelKind::BH;
    if (s == "SH" || s == "sh") return KernelKind::SH;
    if (s == "NAIVE_INDEXED" || s == "naive") return KernelKind::NAIVE_INDEXED;
    if (s == "CLASSICAL_NORMALIZED" || s == "classical") return KernelKind::CLASSICAL_NORMALIZED;
    throw std::invalid_argument("unknown kernel: " + std::string(s));
}

namespace detail {

inline void require_same_encoding(const FeatureSpectrum& a, const FeatureSpectrum& b) {
    if (a.kind != b.kind)
        throw std::invalid_argument("spectra have different encodings");
}

}  // namespace detail

/// Exact f_G^T f_G': sum over shared keys of |X_k| * |X_k'|. Both count
/// vectors are sorted, so a merge join visits each entry once.
inline uint128 dot_spectra(const FeatureSpectrum& a, const FeatureSpectrum& b) {
    detail::require_same_encoding(a, b);
    uint128 dot = 0;
    auto ia = a.counts.begin();
    auto ib = b.counts.begin();
    while (ia != a.counts.end() && ib != b.counts.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else {
            dot += static_cast<uint128>(ia->second) * ib->second;
            ++ia;
            ++ib;
        }
    }
    return dot;
}

/// Cosine similarity of the two feature spectra:
/// dot / (sqrt(sum |X_k|^2) * sqrt(sum |X_k'|^2)).
inline double bh_kernel(const FeatureSpectrum& a, const FeatureSpectrum& b) {
    const uint128 dot = dot_spectra(a, b);
    if (dot == 0) return 0.0;
    // Cauchy-Schwarz equality case in exact integers keeps self-kernels
    // at exactly 1 (products stay within 128 bits for n <= 28 spectra).
    constexpr uint128 kSqrtLimit = static_cast<uint128>(1) << 63;
    if (a.sum_sq_counts < kSqrtLimit && b.sum_sq_counts < kSqrtLimit &&
        dot * dot == a.sum_sq_counts * b.sum_sq_counts)
        return 1.0;
    const long double num = static_cast<long double>(dot);
    const long double den = std::sqrt(static_cast<long double>(a.sum_sq_counts)) *
                            std::sqrt(static_cast<long double>(b.sum_sq_counts));
    return static_cast<double>(num / den);
}

/// Switch-test kernel: 2*dot / ((2^{n'}/2^n) sum|X_k|^2 + (2^n/2^{n'}) sum|X_k'|^2).
/// The power-of-two weights only shift exponents, so the denominator
/// terms stay exact in long double.
inline double sh_kernel(const FeatureSpectrum& a, const FeatureSpectrum& b) {
    detail::require_same_encoding(a, b);
    const uint128 dot = dot_spectra(a, b);
    const long double wa = std::exp2l(static_cast<long double>(b.n - a.n));
    const long double den = wa * static_cast<long double>(a.sum_sq_counts) +
                            static_cast<long double>(b.sum_sq_counts) / wa;
    return static_cast<double>(2.0L * static_cast<long double>(dot) / den);
}

/// Overlap of the indexed states: the fraction of masks on which the two
/// encodings agree. Defined only for equal vertex counts.
inline double naive_indexed_overlap(const Graph& a, const Graph& b, EncodingKind kind) {
    if (a.num_vertices() != b.num_vertices())
        throw std::invalid_argument("naive_indexed_overlap: vertex counts differ");
    const int n = a.num_vertices();
    if (n > 20) throw std::invalid_argument("naive_indexed_overlap: n must be <= 20");
    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t agree = 0;
    for (std::uint64_t x = 0; x < total; ++x)
        agree += encode_subgraph(a, x, kind) == encode_subgraph(b, x, kind);
    return static_cast<double>(agree) / static_cast<double>(total);
}

/// Inner product of the classical sampling method: dot / 2^{n+n'}.
inline double classical_normalized_inner(const FeatureSpectrum& a, const FeatureSpectrum& b) {
    detail::require_same_encoding(a, b);
    const uint128 dot = dot_spectra(a, b);
    return static_cast<double>(static_cast<long double>(dot) *
                               std::exp2l(static_cast<long double>(-a.n - b.n)));
}

struct GramMatrix {
    int size = 0;
    KernelKind kind = KernelKind::BH;
    EncodingKind encoding = EncodingKind::VE;
    std::string dataset;
    std::vector<int> graph_ids;
    std::vector<double> entries;  // row-major, symmetric

    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * size + j]; }
    double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * size + j]; }
    double trace() const {
        double t = 0.0;
        for (int i = 0; i < size; ++i) t += at(i, i);
        return t;
    }
};

/// Symmetric kernel matrix over a homogeneous list of spectra; each
/// unordered pair is computed once, in parallel, and mirrored.
inline GramMatrix gram(std::span<const FeatureSpectrum> spectra, KernelKind kind,
                       unsigned threads = 0) {
    if (kind != KernelKind::BH && kind != KernelKind::SH && kind != KernelKind::CLASSICAL_NORMALIZED)
        throw std::invalid_argument("gram: kernel kind must be BH, SH or CLASSICAL_NORMALIZED");
    const int n = static_cast<int>(spectra.size());
    for (const FeatureSpectrum& s : spectra)
        detail::require_same_encoding(spectra.front(), s);
    GramMatrix m;
    m.size = n;
    m.kind = kind;
    m.encoding = spectra.empty() ? EncodingKind::VE : spectra.front().kind;
    m.entries.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) pairs.emplace_back(i, j);
    parallel_for_index(pairs.size(), threads, [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        double value = 0.0;
        switch (kind) {
            case KernelKind::BH: value = bh_kernel(spectra[i], spectra[j]); break;
            case KernelKind::SH: value = sh_kernel(spectra[i], spectra[j]); break;
            default: value = classical_normalized_inner(spectra[i], spectra[j]); break;
        }
        m.at(i, j) = value;
        m.at(j, i) = value;
    });
    return m;
}

/// Closed-form factor of the SH coefficient matrix: lower-triangular L
/// with 2 L L^T equal to (k_SH(G_x, G_y))_{x,y}. Products telescope over
/// rows, so they are evaluated in log space with separate sign tracking.
struct ShFactor {
    int size = 0;
    std::vector<double> L;       // row-major lower triangle, zero above
    std::vector<double> p;       // p_x = sum_k |X_{kx}|^2
    std::vector<int> n_vertices; // q_{x,y} = 2^{n_y - n_x}

    double at(int i, int j) const { return L[static_cast<std::size_t>(i) * size + j]; }
    double& at(int i, int j) { return L[static_cast<std::size_t>(i) * size + j]; }

    double coefficient(int x, int y) const {
        const long double q = std::exp2l(static_cast<long double>(n_vertices[y] - n_vertices[x]));
        return static_cast<double>(2.0L / (q * p[x] + p[y] / q));
    }
};

inline ShFactor sh_factor(std::span<const FeatureSpectrum> spectra) {
    const int n = static_cast<int>(spectra.size());
    if (n < 1) throw std::invalid_argument("sh_factor: need at least one spectrum");
    ShFactor f;
    f.size = n;
    f.L.assign(static_cast<std::size_t>(n) * n, 0.0);
    f.p.resize(n);
    f.n_vertices.resize(n);
    for (int i = 0; i < n; ++i) {
        f.p[i] = static_cast<double>(static_cast<long double>(spectra[i].sum_sq_counts));
        f.n_vertices[i] = spectra[i].n;
    }
    auto q = [&](int x, int y) {
        return std::exp2l(static_cast<long double>(f.n_vertices[y] - f.n_vertices[x]));
    };
    auto term_plus = [&](int k, int i) { return q(k, i) * f.p[k] + q(i, k) * f.p[i]; };
    auto term_minus = [&](int k, int i) { return q(k, i) * f.p[k] - q(i, k) * f.p[i]; };

    for (int i = 0; i < n; ++i) {
        // prefix sums over k of log|minus| / log(plus) for this row
        long double log_minus = 0.0L, log_plus = 0.0L;
        int sign = 1;
        for (int j = 0; j <= i; ++j) {
            if (j == i) {
                // L[i][i] uses products over k < i
                const long double value =
                    log_minus - 0.5L * std::log(2.0L * f.p[i]) - log_plus;
                f.at(i, i) = static_cast<double>(sign * std::exp(value));
            } else {
                // L[i][j] (i > j) closes with term_plus(j, i)
                const long double value = 0.5L * std::log(2.0L * f.p[j]) + log_minus -
                                          (log_plus + std::log(term_plus(j, i)));
                f.at(i, j) = static_cast<double>(sign * std::exp(value));
            }
            if (j < i) {
                const long double tm = term_minus(j, i);
                if (tm == 0.0L) sign = 0;
                else if (tm < 0.0L) sign = -sign;
                log_minus += std::log(std::fabs(tm));
                log_plus += std::log(term_plus(j, i));
            }
        }
    }
    return f;
}

/// Gram CSV: "# dataset=<name> kernel=<kind> encoding=<kind>" then N
/// rows of comma-separated entries at 17 significant digits.
inline void write_gram_csv(std::ostream& out, const GramMatrix& m) {
    out << "# dataset=" << m.dataset << " kernel=" << kernel_name(m.kind)
        << " encoding=" << encoding_name(m.encoding) << "\n";
    char buf[64];
    for (int i = 0; i < m.size; ++i) {
        for (int j = 0; j < m.size; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m.at(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

inline GramMatrix read_gram_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("# dataset=", 0) != 0)
        throw std::runtime_error("read_gram_csv: missing header");
    GramMatrix m;
    {
        std::istringstream hs(header.substr(1));
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("dataset=", 0) == 0) m.dataset = tok.substr(8);
            else if (tok.rfind("kernel=", 0) == 0) m.kind = kernel_from_name(tok.substr(7));
            else if (tok.rfind("encoding=", 0) == 0) m.encoding = encoding_from_name(tok.substr(9));
        }
    }
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    m.size = static_cast<int>(rows.size());
    m.entries.reserve(static_cast<std::size_t>(m.size) * m.size);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m.size)
            throw std::runtime_error("read_gram_csv: ragged matrix");
        m.entries.insert(m.entries.end(), row.begin(), row.end());
    }
    return m;
}

}  // namespace asgk
