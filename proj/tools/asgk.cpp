// Command-line driver: dataset ingestion, spectrum enumeration, Gram
// construction, circuit verification, sampling studies and the SVM
// benchmark, with manifests for reproducible batch runs.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "asgk/graph.hpp"
#include "asgk/kernels.hpp"
#include "asgk/quantum.hpp"
#include "asgk/sampling.hpp"
#include "asgk/spectrum.hpp"
#include "asgk/svm.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace asgk;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

struct CommonOpts {
    std::string dataset;
    std::string data_root = "data";
    bool toy = false;
    std::vector<std::string> encodings = {"ved"};
    int max_vertices = 28;
    int min_edges = 0;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_filters = true) {
    cmd->add_option("--dataset", o.dataset, "TU dataset name under the data root");
    cmd->add_flag("--toy", o.toy, "use the built-in triangle/star pair");
    cmd->add_option("--data-root", o.data_root, "directory holding TU datasets");
    if (with_filters) {
        cmd->add_option("--max-vertices", o.max_vertices, "keep graphs with n <= this");
        cmd->add_option("--min-edges", o.min_edges, "keep graphs with |E| >= this");
    }
    cmd->add_option("--seed", o.seed, "base RNG seed");
    cmd->add_option("--threads", o.threads, "worker cap (0 = hardware)");
    cmd->add_option("--out", o.out, "output directory");
}

GraphDataset toy_dataset() {
    GraphDataset ds;
    ds.name = "toy";
    ds.num_classes = 2;
    ds.graphs = {toy_triangle(), toy_star()};
    return ds;
}

GraphDataset load_graphs(const CommonOpts& o, FilterCounts* counts = nullptr) {
    if (o.toy) {
        if (counts) *counts = {2, 2};
        return toy_dataset();
    }
    if (o.dataset.empty())
        throw CLI::ValidationError("--dataset or --toy is required");
    const GraphDataset raw = parse_tu_dataset(o.data_root, o.dataset);
    return filter_dataset(raw, o.max_vertices, o.min_edges, counts);
}

std::uint64_t dataset_hash(const GraphDataset& ds) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    for (const Graph& g : ds.graphs) {
        mix(static_cast<std::uint64_t>(g.num_vertices()));
        mix(static_cast<std::uint64_t>(g.label().value_or(-1)) + 7);
        for (const auto& [i, j] : g.edges())
            mix((static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j));
    }
    return h;
}

fs::path spectra_dir(const CommonOpts& o, const GraphDataset& ds, EncodingKind kind) {
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(dataset_hash(ds)));
    return fs::path(o.out) / "spectra" / (ds.name + "-" + hex) /
           std::string(kind == EncodingKind::VE ? "ve" : "ved");
}

// content-addressed spectrum store: enumerate once, reuse afterwards
std::vector<FeatureSpectrum> load_or_enumerate(const CommonOpts& o, const GraphDataset& ds,
                                               EncodingKind kind) {
    const fs::path dir = spectra_dir(o, ds, kind);
    fs::create_directories(dir);
    std::vector<FeatureSpectrum> spectra(ds.graphs.size());
    EnumerateOptions opts;
    opts.threads = o.threads;
    opts.max_n = std::max(o.max_vertices, 3);
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        const fs::path file = dir / ("g" + std::to_string(ds.graphs[i].id()) + ".spectrum");
        if (fs::exists(file)) {
            std::ifstream in(file);
            spectra[i] = read_spectrum(in);
            continue;
        }
        spectra[i] = enumerate_spectrum(ds.graphs[i], kind, opts);
        std::ofstream out(file);
        write_spectrum(out, spectra[i]);
    }
    return spectra;
}

std::vector<std::string> g_argv;  // recorded for manifest replay

void write_manifest(const CommonOpts& o, const std::string& command, const json& extra,
                    const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["argv"] = g_argv;
    m["version"] = kVersion;
    m["dataset"] = o.toy ? "toy" : o.dataset;
    m["data_root"] = o.data_root;
    m["max_vertices"] = o.max_vertices;
    m["min_edges"] = o.min_edges;
    m["seed"] = o.seed;
    m["threads"] = o.threads;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    m["outputs"] = outputs;
    fs::create_directories(o.out);
    std::ofstream out(fs::path(o.out) / ("manifest-" + command + ".json"));
    out << m.dump(2) << "\n";
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- spectrum

int cmd_spectrum(const CommonOpts& o) {
    FilterCounts counts;
    const GraphDataset ds = load_graphs(o, &counts);
    std::vector<std::string> outputs;
    for (const std::string& enc : o.encodings) {
        const EncodingKind kind = encoding_from_name(enc);
        const auto spectra = load_or_enumerate(o, ds, kind);
        const fs::path summary_path =
            fs::path(o.out) / (ds.name + "-" + enc + "-spectrum-summary.csv");
        std::ofstream summary(summary_path);
        summary << "graph_id,n,edges,label,distinct_keys,success_probability,lower_bound_1_over_a\n";
        for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
            const Graph& g = ds.graphs[i];
            summary << g.id() << "," << g.num_vertices() << "," << g.num_edges() << ","
                    << g.label().value_or(-1) << "," << spectra[i].distinct_keys() << ","
                    << fmt17(success_probability(spectra[i])) << ","
                    << fmt17(success_lower_bound(spectra[i])) << "\n";
        }
        outputs.push_back(summary_path.string());
        outputs.push_back(spectra_dir(o, ds, kind).string());
        std::cout << ds.name << " [" << enc << "]: " << spectra.size()
                  << " spectra written (kept " << counts.kept << "/" << counts.total << ")\n";
    }
    write_manifest(o, "spectrum", {{"encodings", o.encodings}}, outputs);
    return 0;
}

// -------------------------------------------------------------------- gram

int cmd_gram(const CommonOpts& o, const std::string& kernel) {
    const KernelKind kind = kernel_from_name(kernel);
    FilterCounts counts;
    const GraphDataset ds = load_graphs(o, &counts);
    std::vector<std::string> outputs;
    for (const std::string& enc : o.encodings) {
        const EncodingKind ekind = encoding_from_name(enc);
        const auto spectra = load_or_enumerate(o, ds, ekind);
        GramMatrix m = gram(spectra, kind, o.threads);
        m.dataset = ds.name;
        for (const Graph& g : ds.graphs) m.graph_ids.push_back(g.id());
        const fs::path path =
            fs::path(o.out) / (ds.name + "-" + kernel + "-" + enc + ".gram.csv");
        std::ofstream out(path);
        write_gram_csv(out, m);
        outputs.push_back(path.string());
        std::cout << ds.name << " [" << kernel << "," << enc << "]: " << m.size << "x"
                  << m.size << " Gram -> " << path.string() << "\n";
        if (m.size == 2)
            std::cout << "  off-diagonal = " << fmt17(m.at(0, 1)) << "\n";
    }
    write_manifest(o, "gram", {{"kernel", kernel}, {"encodings", o.encodings}}, outputs);
    return 0;
}

// ------------------------------------------------------------ verify-quantum

int cmd_verify_quantum(const CommonOpts& o, int random_pairs, int max_n, bool aa, int t_max) {
    json report;
    report["pairs"] = json::array();
    double worst_dev = 0.0;
    bool bounds_ok = true;

    auto record_pair = [&](const Graph& a, const Graph& b, EncodingKind kind) {
        const PairVerification v = verify_pair(a, b, kind);
        json entry;
        entry["n"] = v.n;
        entry["n_prime"] = v.n_prime;
        entry["kind"] = std::string(encoding_name(v.kind));
        entry["p_postselect"] = v.p_postselect;
        entry["p_bound"] = v.p_bound;
        entry["swap_pr0"] = v.swap_pr0;
        entry["switch_pr0"] = v.switch_pr0;
        entry["bh_closed"] = v.bh_closed;
        entry["sh_closed"] = v.sh_closed;
        entry["max_abs_dev"] = v.max_abs_dev;
        report["pairs"].push_back(entry);
        worst_dev = std::max(worst_dev, v.max_abs_dev);
        if (v.p_postselect < v.p_bound - 1e-12) bounds_ok = false;
        // per-graph bound: post-selection probability >= 1/a
        for (const Graph* g : {&a, &b}) {
            const FeatureSpectrum s = enumerate_spectrum(*g, kind);
            const PostselectResult r =
                hadamard_index_and_postselect(build_indexed_state(*g, kind));
            if (r.probability < success_lower_bound(s) - 1e-12) bounds_ok = false;
        }
    };

    if (random_pairs == 0) {  // toy pair
        for (EncodingKind kind : {EncodingKind::VE, EncodingKind::VED})
            record_pair(toy_triangle(), toy_star(), kind);
    } else {
        std::mt19937_64 rng(o.seed);
        for (int p = 0; p < random_pairs; ++p) {
            const int n = 1 + static_cast<int>(rng() % max_n);
            const int np = 1 + static_cast<int>(rng() % max_n);
            const double density = 0.2 + 0.6 * (static_cast<double>(rng() % 1000) / 1000.0);
            const Graph a = random_graph(n, density, rng());
            const Graph b = random_graph(np, density, rng());
            record_pair(a, b, p % 2 ? EncodingKind::VE : EncodingKind::VED);
        }
    }

    if (aa) {
        json table = json::array();
        const Graph g = toy_triangle();
        const double p0 = aa_amplitude(g, EncodingKind::VED, 0);
        const double theta = std::asin(std::sqrt(p0));
        for (int t = 0; t <= t_max; ++t) {
            const double sim = aa_amplitude(g, EncodingKind::VED, t);
            const double closed = std::pow(std::sin((2 * t + 1) * theta), 2);
            table.push_back({{"t", t}, {"simulated", sim}, {"closed_form", closed}});
            worst_dev = std::max(worst_dev, std::abs(sim - closed));
        }
        report["amplitude_amplification"] = table;
    }

    report["max_abs_dev"] = worst_dev;
    report["bounds_hold"] = bounds_ok;
    fs::create_directories(o.out);
    const fs::path path = fs::path(o.out) / "verify-quantum.json";
    std::ofstream(path) << report.dump(2) << "\n";
    write_manifest(o, "verify-quantum",
                   {{"random_pairs", random_pairs}, {"max_n", max_n}, {"aa", aa}},
                   {path.string()});
    std::cout << "verify-quantum: " << report["pairs"].size() << " pairs, max |dev| = "
              << fmt17(worst_dev) << ", bounds " << (bounds_ok ? "hold" : "VIOLATED") << "\n";
    if (worst_dev > 1e-9 || !bounds_ok) {
        std::cerr << "verification failed\n";
        return kExitVerification;
    }
    return 0;
}

// ------------------------------------------------------------------ sample

int cmd_sample(const CommonOpts& o, const std::string& s_list, int trials, double epsilon,
               double delta, int graph_id) {
    const GraphDataset ds = load_graphs(o);
    if (graph_id < 0 || graph_id >= static_cast<int>(ds.graphs.size()))
        throw DatasetError("sample: graph id out of range");
    const Graph& g = ds.graphs[graph_id];
    const EncodingKind kind = encoding_from_name(o.encodings.front());
    const FeatureSpectrum exact = enumerate_spectrum(g, kind, {o.threads, 28});
    const double pi = max_key_probability(exact);
    if (pi >= 0.5) throw DatasetError("sample: pi_P >= 1/2, the Weissman guard fails");
    const KeyDistribution truth = true_distribution(exact);
    const int a = static_cast<int>(exact.distinct_keys());

    std::vector<std::uint64_t> sizes;
    for (std::size_t pos = 0; pos < s_list.size();) {
        std::size_t comma = s_list.find(',', pos);
        if (comma == std::string::npos) comma = s_list.size();
        sizes.push_back(static_cast<std::uint64_t>(std::stod(s_list.substr(pos, comma - pos))));
        pos = comma + 1;
    }

    fs::create_directories(o.out);
    const fs::path ladder_path = fs::path(o.out) / (ds.name + "-sample-ladder.csv");
    std::ofstream ladder(ladder_path);
    ladder << "S,trials,median_l1,mean_l1,violation_rate,weissman_bound\n";
    double last_l1 = 0.0;
    for (std::uint64_t S : sizes) {
        std::vector<double> l1s(trials);
        parallel_for_index(static_cast<std::size_t>(trials), o.threads, [&](std::size_t t) {
            const auto emp = sample_spectrum(g, kind, S, o.seed + t);
            l1s[t] = l1_distance(truth, emp.probs);
        });
        int violations = 0;
        for (double v : l1s) violations += v >= epsilon;
        std::nth_element(l1s.begin(), l1s.begin() + trials / 2, l1s.end());
        const double median = l1s[trials / 2];
        double mean = 0.0;
        for (double v : l1s) mean += v;
        mean /= trials;
        const double bound = std::min(1.0, weissman_bound(a, pi, S, epsilon));
        ladder << S << "," << trials << "," << fmt17(median) << "," << fmt17(mean) << ","
               << fmt17(static_cast<double>(violations) / trials) << "," << fmt17(bound)
               << "\n";
        last_l1 = median;
    }

    const auto est = sample_size_for(a, epsilon, delta, std::max(2, g.num_vertices()), pi);
    json report;
    report["n"] = g.num_vertices();
    report["kind"] = std::string(encoding_name(kind));
    report["S"] = sizes.back();
    report["seed"] = o.seed;
    report["l1"] = last_l1;
    report["epsilon"] = epsilon;
    report["delta"] = delta;
    report["bound"] = std::min(1.0, weissman_bound(a, pi, sizes.back(), epsilon));
    report["pi_P"] = pi;
    report["phi"] = phi_weissman(pi);
    report["distinct_keys"] = a;
    report["recommended_S"] = est.samples;
    report["asymptotic_scale"] = est.asymptotic_scale;
    const fs::path report_path = fs::path(o.out) / (ds.name + "-sample-report.json");
    std::ofstream(report_path) << report.dump(2) << "\n";
    write_manifest(o, "sample",
                   {{"S", s_list}, {"trials", trials}, {"epsilon", epsilon}, {"delta", delta},
                    {"graph", graph_id}},
                   {ladder_path.string(), report_path.string()});
    std::cout << "sample: ladder -> " << ladder_path.string() << ", recommended S = "
              << est.samples << "\n";
    return 0;
}

// ------------------------------------------------------------------ report

int cmd_report(const CommonOpts& o) {
    FilterCounts counts;
    const GraphDataset ds = load_graphs(o, &counts);
    std::vector<std::string> outputs;
    for (const std::string& enc : o.encodings) {
        const EncodingKind kind = encoding_from_name(enc);
        const auto spectra = load_or_enumerate(o, ds, kind);
        const auto rows = range_growth_report(spectra);
        const fs::path path =
            fs::path(o.out) / (ds.name + "-" + enc + "-success-probability.csv");
        std::ofstream out(path);
        out << "n,graphs,mean_distinct_keys,mean_success_probability,reference_sqrt_n_over_n_c\n";
        for (const auto& r : rows)
            out << r.n << "," << r.graphs << "," << fmt17(r.mean_distinct_keys) << ","
                << fmt17(r.mean_success_probability) << "," << fmt17(r.reference_bound) << "\n";
        outputs.push_back(path.string());
        std::cout << ds.name << " [" << enc << "]: " << rows.size()
                  << " vertex-count buckets -> " << path.string() << "\n";
    }
    write_manifest(o, "report", {{"encodings", o.encodings}}, outputs);
    return 0;
}

// --------------------------------------------------------------- benchmark

int cmd_benchmark(const CommonOpts& o, const std::string& kernels, int repeats) {
    FilterCounts counts;
    const GraphDataset ds = load_graphs(o, &counts);
    if (ds.graphs.size() < 20)
        throw DatasetError("benchmark: need at least 20 graphs after filtering");
    std::vector<int> labels;
    labels.reserve(ds.graphs.size());
    for (const Graph& g : ds.graphs) labels.push_back(g.label().value_or(0));

    std::vector<std::string> kernel_names;
    for (std::size_t pos = 0; pos < kernels.size();) {
        std::size_t comma = kernels.find(',', pos);
        if (comma == std::string::npos) comma = kernels.size();
        kernel_names.push_back(kernels.substr(pos, comma - pos));
        pos = comma + 1;
    }

    std::vector<std::string> outputs;
    std::cout << ds.name << ": " << counts.kept << "/" << counts.total << " graphs, "
              << ds.num_classes << " classes\n";
    std::cout << "kernel,encoding,accuracy_mean,accuracy_std,f_mean,f_std\n";
    for (const std::string& enc : o.encodings) {
        const EncodingKind ekind = encoding_from_name(enc);
        const auto spectra = load_or_enumerate(o, ds, ekind);

        // success-probability sweep alongside the benchmark
        const auto rows = range_growth_report(spectra);
        const fs::path fig_path =
            fs::path(o.out) / (ds.name + "-" + enc + "-success-probability.csv");
        {
            std::ofstream out(fig_path);
            out << "n,graphs,mean_distinct_keys,mean_success_probability,"
                   "reference_sqrt_n_over_n_c\n";
            for (const auto& r : rows)
                out << r.n << "," << r.graphs << "," << fmt17(r.mean_distinct_keys) << ","
                    << fmt17(r.mean_success_probability) << "," << fmt17(r.reference_bound)
                    << "\n";
        }
        outputs.push_back(fig_path.string());

        for (const std::string& kernel : kernel_names) {
            const KernelKind kkind = kernel_from_name(kernel);
            const GramMatrix m = gram(spectra, kkind, o.threads);
            CvConfig cfg;
            cfg.repeats = repeats;
            cfg.seed = o.seed;
            cfg.threads = o.threads;
            const EvalReport r = nested_cv(m, labels, cfg);

            json rep;
            rep["dataset"] = ds.name;
            rep["kernel"] = kernel;
            rep["encoding"] = enc;
            rep["graphs"] = ds.graphs.size();
            rep["classes"] = ds.num_classes;
            rep["accuracy_mean"] = r.accuracy_mean;
            rep["accuracy_std"] = r.accuracy_std;
            rep["f_mean"] = r.f_mean;
            rep["f_std"] = r.f_std;
            rep["f_majority_mean"] = r.f_majority_mean;
            rep["f_macro_mean"] = r.f_macro_mean;
            rep["positive_class"] = r.positive_class;
            rep["per_repeat_accuracy"] = r.per_repeat_accuracy;
            rep["per_repeat_f"] = r.per_repeat_f;
            json c_hist = json::object();
            for (const auto& [c, n] : r.chosen_c) c_hist[fmt17(c)] = n;
            rep["chosen_C"] = c_hist;
            rep["seed"] = o.seed;
            const fs::path path =
                fs::path(o.out) / (ds.name + "-" + kernel + "-" + enc + "-eval.json");
            std::ofstream(path) << rep.dump(2) << "\n";
            outputs.push_back(path.string());
            std::printf("%s,%s,%.2f,%.2f,%.2f,%.2f\n", kernel.c_str(), enc.c_str(),
                        r.accuracy_mean, r.accuracy_std, r.f_mean, r.f_std);
        }
    }
    write_manifest(o, "benchmark",
                   {{"kernels", kernels}, {"encodings", o.encodings}, {"repeats", repeats}},
                   outputs);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) g_argv.emplace_back(argv[i]);
    CLI::App app{"all-subgraph feature spectra, BH/SH graph kernels and their verification"};
    app.require_subcommand(1);

    CommonOpts spectrum_opts, gram_opts, verify_opts, sample_opts, bench_opts, report_opts;

    CLI::App* spectrum = app.add_subcommand("spectrum", "enumerate per-graph feature spectra");
    add_common(spectrum, spectrum_opts);
    spectrum->add_option("--encoding", spectrum_opts.encodings, "ve and/or ved")
        ->delimiter(',');

    CLI::App* gram_cmd = app.add_subcommand("gram", "build a kernel Gram matrix");
    std::string gram_kernel = "bh";
    add_common(gram_cmd, gram_opts);
    gram_cmd->add_option("--kernel", gram_kernel, "bh | sh | classical");
    gram_cmd->add_option("--encoding", gram_opts.encodings, "ve and/or ved")->delimiter(',');

    CLI::App* verify = app.add_subcommand("verify-quantum",
                                          "check circuits against closed forms");
    int random_pairs = 0, max_n = 8, t_max = 10;
    bool aa = false;
    add_common(verify, verify_opts, false);
    verify->add_option("--random", random_pairs, "number of random pairs (0 = toy)");
    verify->add_option("--max-n", max_n, "largest vertex count for random graphs")
        ->check(CLI::Range(1, kSimMaxVertices));
    verify->add_flag("--aa", aa, "include the amplitude-amplification table");
    verify->add_option("--t-max", t_max, "largest iteration count for --aa");

    CLI::App* sample = app.add_subcommand("sample", "classical sampling study");
    std::string s_list = "100,1000,10000,100000";
    int trials = 1000, graph_id = 0;
    double epsilon = 0.5, delta = 0.1;
    add_common(sample, sample_opts, false);
    sample->add_option("--S", s_list, "comma-separated sample sizes");
    sample->add_option("--trials", trials, "trials per sample size");
    sample->add_option("--epsilon", epsilon, "L1 deviation threshold");
    sample->add_option("--delta", delta, "target failure probability");
    sample->add_option("--graph", graph_id, "graph id within the dataset");
    sample->add_option("--encoding", sample_opts.encodings, "ve or ved")->delimiter(',');

    CLI::App* bench = app.add_subcommand("benchmark", "kernel SVM cross-validation");
    std::string kernels = "bh,sh";
    int repeats = 10;
    add_common(bench, bench_opts);
    bench->add_option("--kernels", kernels, "comma-separated kernel list");
    bench->add_option("--encodings", bench_opts.encodings, "comma-separated encoding list")
        ->delimiter(',');
    bench->add_option("--repeats", repeats, "cross-validation repeats");

    CLI::App* report = app.add_subcommand("report", "success-probability-vs-n sweep");
    add_common(report, report_opts);
    report->add_option("--encoding", report_opts.encodings, "ve and/or ved")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (spectrum->parsed()) return cmd_spectrum(spectrum_opts);
        if (gram_cmd->parsed()) return cmd_gram(gram_opts, gram_kernel);
        if (verify->parsed())
            return cmd_verify_quantum(verify_opts, random_pairs, max_n, aa, t_max);
        if (sample->parsed())
            return cmd_sample(sample_opts, s_list, trials, epsilon, delta, graph_id);
        if (bench->parsed()) return cmd_benchmark(bench_opts, kernels, repeats);
        if (report->parsed()) return cmd_report(report_opts);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DatasetError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
