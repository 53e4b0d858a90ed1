#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "asgk/kernels.hpp"
#include "asgk/parallel.hpp"

namespace asgk {

/// Dual solution of a binary C-SVM on a precomputed kernel.
struct SvmModel {
    std::vector<int> support;     // indices into the training set
    std::vector<double> alpha_y;  // alpha_i * y_i per support vector
    double bias = 0.0;
    double C = 1.0;
};

struct SvmTrainOptions {
    double tol = 1e-3;
    long max_iter = 0;  // 0 = 100 * max(n, 1000)
    std::vector<double>* objective_trace = nullptr;  // dual objective per step
};

/// Sequential pairwise optimization (maximal-violating-pair working set)
/// of the dual problem
///   min 1/2 sum_ij b_i b_j K_ij - sum_i y_i b_i,  b_i = y_i alpha_i,
///   s.t. alpha in [0, C]^n, sum_i b_i = 0.
/// Deterministic: ties in the working-set selection break to the
/// smallest index.
template <class Kernel>
SvmModel train_svm(int n, Kernel&& kernel, const std::vector<int>& y, double C,
                   const SvmTrainOptions& opts = {}) {
    if (n < 2 || static_cast<int>(y.size()) != n)
        throw std::invalid_argument("train_svm: bad problem size");
    bool has_pos = false, has_neg = false;
    for (int t : y) {
        if (t == 1) has_pos = true;
        else if (t == -1) has_neg = true;
        else throw std::invalid_argument("train_svm: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw std::domain_error("train_svm: training fold contains a single class");
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            K[i][j] = kernel(i, j);
            if (!std::isfinite(K[i][j]))
                throw std::invalid_argument("train_svm: non-finite kernel entry");
        }

    std::vector<double> beta(n, 0.0);  // y_i * alpha_i
    std::vector<double> F(n, 0.0);     // sum_j K_ij beta_j
    auto upper = [&](int t) { return y[t] > 0 ? C : 0.0; };
    auto lower = [&](int t) { return y[t] > 0 ? 0.0 : -C; };

    const long max_iter = opts.max_iter > 0 ? opts.max_iter : 100L * std::max(n, 1000);
    if (opts.objective_trace) opts.objective_trace->clear();
    for (long iter = 0; iter < max_iter; ++iter) {
        // violating pair: i maximizes y_t - F_t over points free to move
        // up, j minimizes it over points free to move down
        int i = -1, j = -1;
        double up_val = -1e300, low_val = 1e300;
        for (int t = 0; t < n; ++t) {
            const double v = y[t] - F[t];
            if (beta[t] < upper(t) - 1e-12 && v > up_val) {
                up_val = v;
                i = t;
            }
            if (beta[t] > lower(t) + 1e-12 && v < low_val) {
                low_val = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || up_val - low_val <= opts.tol) break;

        double eta = K[i][i] + K[j][j] - 2.0 * K[i][j];
        if (eta <= 1e-12) eta = 1e-12;
        double step = (up_val - low_val) / eta;
        step = std::min(step, upper(i) - beta[i]);
        step = std::min(step, beta[j] - lower(j));
        beta[i] += step;
        beta[j] -= step;
        for (int t = 0; t < n; ++t) F[t] += step * (K[i][t] - K[j][t]);

        if (opts.objective_trace) {
            double obj = 0.0;  // dual objective sum_i y_i b_i - 1/2 sum b^T K b
            for (int t = 0; t < n; ++t) obj += y[t] * beta[t] - 0.5 * beta[t] * F[t];
            opts.objective_trace->push_back(obj);
        }
    }

    SvmModel m;
    m.C = C;
    double bias_sum = 0.0;
    int free_count = 0;
    double up_val = -1e300, low_val = 1e300;
    for (int t = 0; t < n; ++t) {
        const double a = std::abs(beta[t]);
        if (a > 1e-12) {
            m.support.push_back(t);
            m.alpha_y.push_back(beta[t]);
            if (a < C - 1e-12) {
                bias_sum += y[t] - F[t];
                ++free_count;
            }
        }
        const double v = y[t] - F[t];
        if (beta[t] < upper(t) - 1e-12) up_val = std::max(up_val, v);
        if (beta[t] > lower(t) + 1e-12) low_val = std::min(low_val, v);
    }
    m.bias = free_count > 0 ? bias_sum / free_count : 0.5 * (up_val + low_val);
    return m;
}

/// Decision value sum_s alpha_s y_s K(x, s) + b over kernel values
/// against the support vectors.
inline double svm_decision(const SvmModel& m, std::span<const double> kernel_row) {
    if (kernel_row.size() != m.support.size())
        throw std::invalid_argument("svm_decision: kernel row does not match support size");
    double f = m.bias;
    for (std::size_t s = 0; s < m.support.size(); ++s) f += m.alpha_y[s] * kernel_row[s];
    return f;
}

/// Exact zeros resolve to the positive class.
inline int svm_predict(const SvmModel& m, std::span<const double> kernel_row) {
    return svm_decision(m, kernel_row) < 0.0 ? -1 : 1;
}

enum class MetricScheme { Accuracy, BinaryF1, MacroF1 };

/// Percent metrics. BinaryF1 scores the designated positive class;
/// MacroF1 averages per-class F1 over all num_classes classes, counting
/// classes absent from both vectors as 0.
inline double metric_percent(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                             MetricScheme scheme, int positive_class = 1, int num_classes = 0) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw std::invalid_argument("metric_percent: empty or mismatched label vectors");
    if (scheme == MetricScheme::Accuracy) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) correct += y_true[i] == y_pred[i];
        return 100.0 * static_cast<double>(correct) / static_cast<double>(y_true.size());
    }
    auto f1_of = [&](int cls) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const bool t = y_true[i] == cls, p = y_pred[i] == cls;
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
        }
        if (tp == 0) return 0.0;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        return 2.0 * precision * recall / (precision + recall);
    };
    if (scheme == MetricScheme::BinaryF1) return 100.0 * f1_of(positive_class);
    int classes = num_classes;
    if (classes == 0) {
        for (int v : y_true) classes = std::max(classes, v + 1);
        for (int v : y_pred) classes = std::max(classes, v + 1);
    }
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += f1_of(c);
    return 100.0 * sum / static_cast<double>(classes);
}

struct CvConfig {
    int outer_folds = 10;
    int inner_folds = 10;
    int repeats = 10;
    std::vector<double> c_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct EvalReport {
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    double f_mean = 0.0;  // minority-class F1 (binary) or macro-F1 (multiclass)
    double f_std = 0.0;
    double f_majority_mean = 0.0;  // binary only
    double f_macro_mean = 0.0;
    std::vector<double> per_repeat_accuracy;
    std::vector<double> per_repeat_f;
    std::map<double, int> chosen_c;
    int positive_class = 0;  // minority class used for the binary F-measure
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Shuffles each class separately and deals round-robin, so folds are
// stratified and sizes differ by at most one per class.
inline std::vector<int> stratified_assignment(const std::vector<int>& labels, int folds,
                                              int num_classes, std::uint64_t seed) {
    std::vector<int> assignment(labels.size(), -1);
    std::mt19937_64 rng(seed);
    for (int c = 0; c < num_classes; ++c) {
        std::vector<int> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) members.push_back(static_cast<int>(i));
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t k = 0; k < members.size(); ++k)
            assignment[members[k]] = static_cast<int>(k % folds);
    }
    return assignment;
}

// One-vs-one classifier set over a subset of the Gram matrix.
struct OvoEnsemble {
    std::vector<std::pair<int, int>> class_pairs;
    std::vector<SvmModel> models;            // aligned with class_pairs
    std::vector<std::vector<int>> supports;  // original indices per model
};

inline OvoEnsemble train_ovo(const GramMatrix& gram, const std::vector<int>& labels,
                             const std::vector<int>& train_idx, int num_classes, double C) {
    OvoEnsemble e;
    for (int ca = 0; ca < num_classes; ++ca)
        for (int cb = ca + 1; cb < num_classes; ++cb) {
            std::vector<int> subset;
            std::vector<int> y;
            for (int idx : train_idx)
                if (labels[idx] == ca || labels[idx] == cb) {
                    subset.push_back(idx);
                    y.push_back(labels[idx] == cb ? 1 : -1);
                }
            auto kernel = [&](int i, int j) { return gram.at(subset[i], subset[j]); };
            SvmModel m = train_svm(static_cast<int>(subset.size()), kernel, y, C);
            std::vector<int> support_orig;
            support_orig.reserve(m.support.size());
            for (int s : m.support) support_orig.push_back(subset[s]);
            e.class_pairs.emplace_back(ca, cb);
            e.models.push_back(std::move(m));
            e.supports.push_back(std::move(support_orig));
        }
    return e;
}

inline int predict_ovo(const OvoEnsemble& e, const GramMatrix& gram, int test_idx,
                       int num_classes) {
    std::vector<int> votes(num_classes, 0);
    for (std::size_t m = 0; m < e.models.size(); ++m) {
        std::vector<double> row;
        row.reserve(e.supports[m].size());
        for (int s : e.supports[m]) row.push_back(gram.at(test_idx, s));
        const int sign = svm_predict(e.models[m], row);
        ++votes[sign > 0 ? e.class_pairs[m].second : e.class_pairs[m].first];
    }
    // vote tie resolves to the smallest class index
    int best = 0;
    for (int c = 1; c < num_classes; ++c)
        if (votes[c] > votes[best]) best = c;
    return best;
}

}  // namespace detail

/// 10-repeat double cross-validation on a precomputed Gram matrix:
/// stratified outer folds estimate the test metrics while inner folds
/// select C (ties to the smallest value). Binary problems report the
/// minority-class F-measure, multiclass problems macro-F1. Cells are
/// independent and run in parallel; aggregation order is fixed, so the
/// report does not depend on the thread count.
inline EvalReport nested_cv(const GramMatrix& gram, const std::vector<int>& labels,
                            const CvConfig& cfg) {
    const int N = gram.size;
    if (N < 20) throw std::invalid_argument("nested_cv: need at least 20 graphs");
    if (static_cast<int>(labels.size()) != N)
        throw std::invalid_argument("nested_cv: label count does not match Gram size");
    if (cfg.c_grid.empty() || !std::is_sorted(cfg.c_grid.begin(), cfg.c_grid.end()))
        throw std::invalid_argument("nested_cv: C grid must be non-empty and ascending");
    int num_classes = 0;
    for (int l : labels) num_classes = std::max(num_classes, l + 1);
    std::vector<int> class_sizes(num_classes, 0);
    for (int l : labels) ++class_sizes[l];
    for (int c = 0; c < num_classes; ++c)
        if (class_sizes[c] < cfg.outer_folds)
            throw std::domain_error("nested_cv: class " + std::to_string(c) +
                                    " too small to stratify");

    // minority class designates the positive class of the binary F-measure
    int minority = 0;
    for (int c = 1; c < num_classes; ++c)
        if (class_sizes[c] < class_sizes[minority]) minority = c;

    struct Cell {
        std::vector<int> test_idx;
        std::vector<int> predictions;
        double chosen_c = 0.0;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(cfg.repeats) * cfg.outer_folds);
    std::vector<std::vector<int>> outer_assign(cfg.repeats);
    for (int r = 0; r < cfg.repeats; ++r)
        outer_assign[r] =
            detail::stratified_assignment(labels, cfg.outer_folds, num_classes, cfg.seed + r);

    parallel_for_index(cells.size(), cfg.threads, [&](std::size_t cell_id) {
        const int r = static_cast<int>(cell_id) / cfg.outer_folds;
        const int o = static_cast<int>(cell_id) % cfg.outer_folds;
        Cell& cell = cells[cell_id];
        std::vector<int> train_idx, test_idx;
        for (int i = 0; i < N; ++i)
            (outer_assign[r][i] == o ? test_idx : train_idx).push_back(i);

        std::vector<int> train_labels;
        train_labels.reserve(train_idx.size());
        for (int i : train_idx) train_labels.push_back(labels[i]);
        const auto inner_assign = detail::stratified_assignment(
            train_labels, cfg.inner_folds, num_classes,
            detail::mix64(cfg.seed, static_cast<std::uint64_t>(r) * 1000003ULL + o));

        double best_c = cfg.c_grid.front();
        double best_acc = -1.0;
        for (double c_value : cfg.c_grid) {
            std::size_t correct = 0, evaluated = 0;
            for (int f = 0; f < cfg.inner_folds; ++f) {
                std::vector<int> fit_idx, val_idx;
                for (std::size_t k = 0; k < train_idx.size(); ++k)
                    (inner_assign[k] == f ? val_idx : fit_idx).push_back(train_idx[k]);
                if (fit_idx.empty() || val_idx.empty()) continue;
                try {
                    const auto e =
                        detail::train_ovo(gram, labels, fit_idx, num_classes, c_value);
                    for (int t : val_idx) {
                        correct += detail::predict_ovo(e, gram, t, num_classes) == labels[t];
                        ++evaluated;
                    }
                } catch (const std::domain_error&) {
                    // degenerate single-class inner fold: abstain
                }
            }
            const double acc =
                evaluated ? static_cast<double>(correct) / static_cast<double>(evaluated) : 0.0;
            if (acc > best_acc + 1e-12) {
                best_acc = acc;
                best_c = c_value;
            }
        }

        const auto final_model = detail::train_ovo(gram, labels, train_idx, num_classes, best_c);
        cell.test_idx = test_idx;
        cell.chosen_c = best_c;
        cell.predictions.reserve(test_idx.size());
        for (int t : test_idx)
            cell.predictions.push_back(detail::predict_ovo(final_model, gram, t, num_classes));
    });

    EvalReport report;
    report.seed = cfg.seed;
    report.positive_class = minority;
    std::vector<double> acc_r(cfg.repeats), f_r(cfg.repeats), fmaj_r(cfg.repeats),
        fmac_r(cfg.repeats);
    for (int r = 0; r < cfg.repeats; ++r) {
        std::vector<int> y_true, y_pred;
        y_true.reserve(N);
        y_pred.reserve(N);
        for (int o = 0; o < cfg.outer_folds; ++o) {
            const Cell& cell = cells[static_cast<std::size_t>(r) * cfg.outer_folds + o];
            for (std::size_t k = 0; k < cell.test_idx.size(); ++k) {
                y_true.push_back(labels[cell.test_idx[k]]);
                y_pred.push_back(cell.predictions[k]);
            }
            ++report.chosen_c[cell.chosen_c];
        }
        acc_r[r] = metric_percent(y_true, y_pred, MetricScheme::Accuracy);
        fmac_r[r] = metric_percent(y_true, y_pred, MetricScheme::MacroF1, 0, num_classes);
        if (num_classes == 2) {
            f_r[r] = metric_percent(y_true, y_pred, MetricScheme::BinaryF1, minority);
            fmaj_r[r] = metric_percent(y_true, y_pred, MetricScheme::BinaryF1, 1 - minority);
        } else {
            f_r[r] = fmac_r[r];
            fmaj_r[r] = fmac_r[r];
        }
    }
    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto std_of = [&](const std::vector<double>& v, double mean) {
        if (v.size() < 2) return 0.0;
        double s = 0.0;
        for (double x : v) s += (x - mean) * (x - mean);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    report.per_repeat_accuracy = acc_r;
    report.per_repeat_f = f_r;
    report.accuracy_mean = mean_of(acc_r);
    report.accuracy_std = std_of(acc_r, report.accuracy_mean);
    report.f_mean = mean_of(f_r);
    report.f_std = std_of(f_r, report.f_mean);
    report.f_majority_mean = mean_of(fmaj_r);
    report.f_macro_mean = mean_of(fmac_r);
    return report;
}

}  // namespace asgk
