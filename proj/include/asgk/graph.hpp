#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asgk {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simple undirected graph stored as per-vertex neighbor bitsets.
/// Graphs with up to 64 vertices use one word per row; larger graphs
/// (which occur in raw TU datasets before size filtering) spill into
/// multiple words per row and are only valid for parsing/filtering.
class Graph {
public:
    Graph() = default;

    explicit Graph(int n, int id = 0, std::optional<int> label = std::nullopt)
        : n_(n), id_(id), label_(label) {
        if (n < 1) throw std::invalid_argument("Graph: vertex count must be >= 1");
        words_ = (n + 63) / 64;
        adj_.assign(static_cast<std::size_t>(n) * words_, 0);
    }

    int num_vertices() const { return n_; }
    int id() const { return id_; }
    void set_id(int id) { id_ = id; }
    const std::optional<int>& label() const { return label_; }
    void set_label(std::optional<int> l) { label_ = std::move(l); }

    bool fits_one_word() const { return words_ == 1; }

    void add_edge(int i, int j) {
        check_vertex(i);
        check_vertex(j);
        if (i == j) throw std::invalid_argument("Graph: self-loops are not allowed");
        adj_[row_offset(i) + static_cast<std::size_t>(j / 64)] |= std::uint64_t{1} << (j % 64);
        adj_[row_offset(j) + static_cast<std::size_t>(i / 64)] |= std::uint64_t{1} << (i % 64);
    }

    bool has_edge(int i, int j) const {
        check_vertex(i);
        check_vertex(j);
        return (adj_[row_offset(i) + static_cast<std::size_t>(j / 64)] >> (j % 64)) & 1;
    }

    /// Neighbor mask of vertex i; only for graphs with n <= 64.
    std::uint64_t neighbors(int i) const {
        check_vertex(i);
        require_one_word();
        return adj_[static_cast<std::size_t>(i)];
    }

    /// Raw row pointer for the n <= 64 fast path.
    const std::uint64_t* rows() const {
        require_one_word();
        return adj_.data();
    }

    int degree(int i) const {
        check_vertex(i);
        int d = 0;
        for (int w = 0; w < words_; ++w)
            d += std::popcount(adj_[row_offset(i) + static_cast<std::size_t>(w)]);
        return d;
    }

    int num_edges() const {
        long long total = 0;
        for (std::uint64_t word : adj_) total += std::popcount(word);
        return static_cast<int>(total / 2);
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j)
                if (has_edge(i, j)) out.emplace_back(i, j);
        return out;
    }

    /// Symmetry and no-self-loop check; cheap enough to run on every parse.
    void validate() const {
        for (int i = 0; i < n_; ++i) {
            if (has_edge(i, i)) throw DatasetError("Graph: self-loop on vertex " + std::to_string(i));
            for (int j = i + 1; j < n_; ++j)
                if (has_edge(i, j) != has_edge(j, i))
                    throw DatasetError("Graph: asymmetric adjacency");
        }
    }

private:
    void check_vertex(int i) const {
        if (i < 0 || i >= n_) throw std::out_of_range("Graph: vertex index out of range");
    }
    void require_one_word() const {
        if (words_ != 1)
            throw std::invalid_argument("Graph: operation requires <= 64 vertices");
    }
    std::size_t row_offset(int i) const { return static_cast<std::size_t>(i) * words_; }

    int n_ = 0;
    int words_ = 0;
    int id_ = 0;
    std::optional<int> label_;
    std::vector<std::uint64_t> adj_;
};

inline Graph make_graph(int n, std::initializer_list<std::pair<int, int>> edge_list,
                        std::optional<int> label = std::nullopt, int id = 0) {
    Graph g(n, id, label);
    for (const auto& [i, j] : edge_list) g.add_edge(i, j);
    return g;
}

inline int max_degree(const Graph& g) {
    int best = 0;
    for (int i = 0; i < g.num_vertices(); ++i) best = std::max(best, g.degree(i));
    return best;
}

/// The two 3-vertex demonstration graphs: a triangle and a star with
/// center 0 and leaves 1, 2.
inline Graph toy_triangle() { return make_graph(3, {{0, 1}, {0, 2}, {1, 2}}, 0, 0); }
inline Graph toy_star() { return make_graph(3, {{0, 1}, {0, 2}}, 1, 1); }

/// Erdos-Renyi graph with a fixed seed; used for verification sweeps.
inline Graph random_graph(int n, double edge_prob, std::uint64_t seed, int id = 0) {
    Graph g(n, id);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (u(rng) < edge_prob) g.add_edge(i, j);
    return g;
}

inline Graph permute_vertices(const Graph& g, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != g.num_vertices())
        throw std::invalid_argument("permute_vertices: permutation size mismatch");
    Graph out(g.num_vertices(), g.id(), g.label());
    for (const auto& [i, j] : g.edges()) out.add_edge(perm[i], perm[j]);
    return out;
}

struct GraphDataset {
    std::string name;
    std::vector<Graph> graphs;
    int num_classes = 0;
};

namespace detail {

inline std::vector<long long> parse_int_lines(const std::filesystem::path& file,
                                              int ints_per_line) {
    std::ifstream in(file);
    if (!in) throw DatasetError("missing file: " + file.string());
    std::vector<long long> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // tolerate "i, j", "i,j" and trailing whitespace
        for (char& c : line)
            if (c == ',') c = ' ';
        std::size_t pos = 0;
        int found = 0;
        while (pos < line.size()) {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
                ++pos;
            if (pos >= line.size()) break;
            std::size_t start = pos;
            while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r')
                ++pos;
            const std::string tok = line.substr(start, pos - start);
            try {
                std::size_t used = 0;
                long long v = std::stoll(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                out.push_back(v);
            } catch (const std::exception&) {
                throw DatasetError("non-integer token '" + tok + "' at " + file.string() + ":" +
                                   std::to_string(lineno));
            }
            ++found;
        }
        if (found != 0 && found != ints_per_line)
            throw DatasetError("expected " + std::to_string(ints_per_line) + " integers at " +
                               file.string() + ":" + std::to_string(lineno));
    }
    return out;
}

}  // namespace detail

/// Reads a dataset in the TU-Dortmund layout: {name}_A.txt (1-based
/// directed edge pairs), {name}_graph_indicator.txt (graph id per
/// vertex), {name}_graph_labels.txt (label per graph). Edges are
/// symmetrized and deduplicated; labels are remapped to 0..C-1 in
/// sorted order of the original values.
inline GraphDataset parse_tu_dataset(const std::filesystem::path& root, const std::string& name) {
    const std::filesystem::path dir = root / name;
    const auto indicator = detail::parse_int_lines(dir / (name + "_graph_indicator.txt"), 1);
    const auto edge_pairs = detail::parse_int_lines(dir / (name + "_A.txt"), 2);
    const auto raw_labels = detail::parse_int_lines(dir / (name + "_graph_labels.txt"), 1);

    if (indicator.empty()) throw DatasetError(name + ": empty graph_indicator");
    long long num_graphs = 0;
    for (std::size_t i = 0; i < indicator.size(); ++i) {
        const long long gid = indicator[i];
        if (gid < 1 || gid < num_graphs || gid > num_graphs + 1)
            throw DatasetError(name + ": graph indicator not contiguous at vertex line " +
                               std::to_string(i + 1));
        num_graphs = std::max(num_graphs, gid);
    }
    if (static_cast<long long>(raw_labels.size()) != num_graphs)
        throw DatasetError(name + ": label count " + std::to_string(raw_labels.size()) +
                           " does not match graph count " + std::to_string(num_graphs));

    // first vertex (0-based, global) of each graph and per-graph size
    std::vector<int> first_vertex(static_cast<std::size_t>(num_graphs) + 1, 0);
    std::vector<int> sizes(static_cast<std::size_t>(num_graphs), 0);
    for (long long v = 0; v < static_cast<long long>(indicator.size()); ++v)
        ++sizes[static_cast<std::size_t>(indicator[static_cast<std::size_t>(v)] - 1)];
    for (long long g = 0; g < num_graphs; ++g)
        first_vertex[static_cast<std::size_t>(g) + 1] =
            first_vertex[static_cast<std::size_t>(g)] + sizes[static_cast<std::size_t>(g)];

    std::map<long long, int> label_remap;
    for (long long l : raw_labels) label_remap.emplace(l, 0);
    int next = 0;
    for (auto& [orig, mapped] : label_remap) mapped = next++;

    GraphDataset ds;
    ds.name = name;
    ds.num_classes = next;
    ds.graphs.reserve(static_cast<std::size_t>(num_graphs));
    for (long long g = 0; g < num_graphs; ++g)
        ds.graphs.emplace_back(sizes[static_cast<std::size_t>(g)], static_cast<int>(g),
                               label_remap.at(raw_labels[static_cast<std::size_t>(g)]));

    if (edge_pairs.size() % 2 != 0) throw DatasetError(name + ": odd token count in _A.txt");
    for (std::size_t p = 0; p < edge_pairs.size(); p += 2) {
        const long long a = edge_pairs[p], b = edge_pairs[p + 1];
        if (a < 1 || b < 1 || a > static_cast<long long>(indicator.size()) ||
            b > static_cast<long long>(indicator.size()))
            throw DatasetError(name + ": edge endpoint out of range: " + std::to_string(a) + "," +
                               std::to_string(b));
        const long long ga = indicator[static_cast<std::size_t>(a - 1)];
        const long long gb = indicator[static_cast<std::size_t>(b - 1)];
        if (ga != gb)
            throw DatasetError(name + ": edge " + std::to_string(a) + "," + std::to_string(b) +
                               " crosses graphs");
        if (a == b)
            throw DatasetError(name + ": self-loop on vertex " + std::to_string(a));
        Graph& graph = ds.graphs[static_cast<std::size_t>(ga - 1)];
        const int base = first_vertex[static_cast<std::size_t>(ga - 1)];
        graph.add_edge(static_cast<int>(a - 1) - base, static_cast<int>(b - 1) - base);
    }
    for (const Graph& g : ds.graphs) g.validate();
    return ds;
}

/// Writes the three TU files for a dataset (labels already 0-based).
inline void write_tu_dataset(const GraphDataset& ds, const std::filesystem::path& root) {
    const std::filesystem::path dir = root / ds.name;
    std::filesystem::create_directories(dir);
    std::ofstream a(dir / (ds.name + "_A.txt"));
    std::ofstream ind(dir / (ds.name + "_graph_indicator.txt"));
    std::ofstream lab(dir / (ds.name + "_graph_labels.txt"));
    int base = 0;
    int gid = 1;
    for (const Graph& g : ds.graphs) {
        for (int v = 0; v < g.num_vertices(); ++v) ind << gid << "\n";
        for (const auto& [i, j] : g.edges()) {
            a << (base + i + 1) << ", " << (base + j + 1) << "\n";
            a << (base + j + 1) << ", " << (base + i + 1) << "\n";
        }
        lab << g.label().value_or(0) << "\n";
        base += g.num_vertices();
        ++gid;
    }
}

struct FilterCounts {
    std::size_t kept = 0;
    std::size_t total = 0;
};

/// Keeps graphs with n <= max_vertices and |E| >= min_edges, preserving
/// order. Kept graphs are re-numbered densely from 0.
inline GraphDataset filter_dataset(const GraphDataset& ds, int max_vertices, int min_edges,
                                   FilterCounts* counts = nullptr) {
    if (max_vertices < 1) throw std::invalid_argument("filter_dataset: max_vertices must be >= 1");
    if (min_edges < 0) throw std::invalid_argument("filter_dataset: min_edges must be >= 0");
    GraphDataset out;
    out.name = ds.name;
    out.num_classes = ds.num_classes;
    for (const Graph& g : ds.graphs) {
        if (g.num_vertices() <= max_vertices && g.num_edges() >= min_edges) {
            out.graphs.push_back(g);
            out.graphs.back().set_id(static_cast<int>(out.graphs.size()) - 1);
        }
    }
    if (counts) {
        counts->kept = out.graphs.size();
        counts->total = ds.graphs.size();
    }
    return out;
}

}  // namespace asgk
