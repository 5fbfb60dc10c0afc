#include "g2g/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace g2g {

// ---------------------------------------------------------------------------
// Rank metrics
// ---------------------------------------------------------------------------

double auc(const ScoredPairSet& scored) {
    if (scored.scores.size() != scored.labels.size()) {
        throw std::invalid_argument("scores/labels length mismatch");
    }
    const std::size_t n = scored.scores.size();
    std::size_t positives = 0;
    for (int label : scored.labels) positives += label ? 1 : 0;
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) {
        throw std::domain_error("AUC undefined: needs at least one positive and one negative");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scored.scores[a] < scored.scores[b]; });

    // Average ranks across tied scores, then the Mann-Whitney statistic.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scored.scores[order[j]] == scored.scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // 1-based ranks i+1..j
        for (std::size_t t = i; t < j; ++t) {
            if (scored.labels[order[t]]) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double p = static_cast<double>(positives);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

double average_precision(const ScoredPairSet& scored) {
    if (scored.scores.size() != scored.labels.size()) {
        throw std::invalid_argument("scores/labels length mismatch");
    }
    const std::size_t n = scored.scores.size();
    std::size_t positives = 0;
    for (int label : scored.labels) positives += label ? 1 : 0;
    if (positives == 0) throw std::domain_error("average precision undefined without positives");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scored.scores[a] > scored.scores[b]; });

    double sum = 0.0;
    std::size_t seen_pos = 0;
    for (std::size_t rank = 1; rank <= n; ++rank) {
        if (scored.labels[order[rank - 1]]) {
            ++seen_pos;
            sum += static_cast<double>(seen_pos) / static_cast<double>(rank);
        }
    }
    return sum / static_cast<double>(positives);
}

double link_score(const GaussianEmbedding& hu, const GaussianEmbedding& hv, bool directed) {
    if (directed) return -kl_energy(hu, hv);
    return -0.5 * (kl_energy(hu, hv) + kl_energy(hv, hu));
}

double link_score_restricted(const GaussianEmbedding& hu, const GaussianEmbedding& hv,
                             bool directed, std::span<const int> kept_dims) {
    if (directed) return -kl_energy_restricted(hu, hv, kept_dims);
    return -0.5 * (kl_energy_restricted(hu, hv, kept_dims) + kl_energy_restricted(hv, hu, kept_dims));
}

nlohmann::json EvaluationReport::to_json() const {
    nlohmann::json j;
    j["protocol"] = protocol;
    j["metrics"] = metrics;
    j["config"] = config;
    j["tables"] = tables;
    return j;
}

// ---------------------------------------------------------------------------
// Link prediction
// ---------------------------------------------------------------------------

namespace {

ScoredPairSet score_pairs(const std::vector<GaussianEmbedding>& embeddings, bool directed,
                          const std::vector<Edge>& positives, const std::vector<Edge>& negatives) {
    ScoredPairSet scored;
    for (const auto& e : positives) {
        scored.pairs.push_back(e);
        scored.labels.push_back(1);
    }
    for (const auto& e : negatives) {
        scored.pairs.push_back(e);
        scored.labels.push_back(0);
    }
    scored.scores.reserve(scored.pairs.size());
    for (const auto& [u, v] : scored.pairs) {
        scored.scores.push_back(link_score(embeddings.at(u), embeddings.at(v), directed));
    }
    return scored;
}

} // namespace

EvaluationReport eval_link_prediction(const EncoderParameters& params, const AttributedGraph& graph,
                                      const DataSplit& split, SplitPart which) {
    const auto& positives = which == SplitPart::val ? split.val_edges : split.test_edges;
    const auto& negatives = which == SplitPart::val ? split.val_non_edges : split.test_non_edges;
    std::vector<GaussianEmbedding> embeddings = forward_batch(params, graph.attributes);
    ScoredPairSet scored = score_pairs(embeddings, graph.directed, positives, negatives);

    EvaluationReport report;
    report.protocol = "link_prediction";
    report.config["which"] = which == SplitPart::val ? "val" : "test";
    report.config["positives"] = positives.size();
    report.config["negatives"] = negatives.size();
    report.metrics["auc"] = auc(scored);
    report.metrics["ap"] = average_precision(scored);
    return report;
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

std::vector<double> LogisticRegression::predict_proba(std::span<const double> features) const {
    std::vector<double> logits(bias);
    for (int c = 0; c < num_classes; ++c) {
        const auto w = weights.row_span(c);
        double dot = 0.0;
        for (std::size_t f = 0; f < features.size(); ++f) dot += w[f] * features[f];
        logits[c] += dot;
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& l : logits) {
        l = std::exp(l - max_logit);
        total += l;
    }
    for (double& l : logits) l /= total;
    return logits;
}

int LogisticRegression::predict(std::span<const double> features) const {
    const auto proba = predict_proba(features);
    return static_cast<int>(std::max_element(proba.begin(), proba.end()) - proba.begin());
}

double LogisticRegression::weight_norm() const {
    double sum = 0.0;
    for (double w : weights.data) sum += w * w;
    return std::sqrt(sum);
}

namespace {

struct LrObjective {
    const Matrix& x;
    const std::vector<int>& y;
    int num_classes;
    double l2;

    // Mean cross-entropy + 0.5 * l2 * ||W||^2 (bias unregularized), with the
    // gradient written into grad_w / grad_b when non-null.
    double eval(const Matrix& w, const std::vector<double>& b, Matrix* grad_w,
                std::vector<double>* grad_b) const {
        const int m = x.rows;
        const int fdim = x.cols;
        if (grad_w) {
            grad_w->data.assign(grad_w->data.size(), 0.0);
            grad_b->assign(grad_b->size(), 0.0);
        }
        double loss = 0.0;
        std::vector<double> logits(num_classes);
        for (int i = 0; i < m; ++i) {
            const auto xi = x.row_span(i);
            for (int c = 0; c < num_classes; ++c) {
                const auto wc = w.row_span(c);
                double dot = b[c];
                for (int f = 0; f < fdim; ++f) dot += wc[f] * xi[f];
                logits[c] = dot;
            }
            const double max_logit = *std::max_element(logits.begin(), logits.end());
            double total = 0.0;
            for (double& l : logits) {
                l = std::exp(l - max_logit);
                total += l;
            }
            loss += -std::log(logits[y[i]] / total);
            if (grad_w) {
                for (int c = 0; c < num_classes; ++c) {
                    const double p = logits[c] / total - (c == y[i] ? 1.0 : 0.0);
                    (*grad_b)[c] += p / m;
                    auto gw = grad_w->row_span(c);
                    for (int f = 0; f < fdim; ++f) gw[f] += p * xi[f] / m;
                }
            }
        }
        loss /= m;
        for (std::size_t i = 0; i < w.data.size(); ++i) {
            loss += 0.5 * l2 * w.data[i] * w.data[i];
            if (grad_w) grad_w->data[i] += l2 * w.data[i];
        }
        return loss;
    }
};

} // namespace

LogisticRegression fit_logistic_regression(const Matrix& features, const std::vector<int>& labels,
                                           double l2_strength, int max_iters, std::uint64_t seed) {
    (void)seed; // the convex fit is deterministic; the seed only matters for CV folds
    if (features.rows != static_cast<int>(labels.size())) {
        throw std::invalid_argument("feature/label row mismatch");
    }
    int num_classes = 0;
    for (int y : labels) {
        if (y < 0) throw std::invalid_argument("negative class id");
        num_classes = std::max(num_classes, y + 1);
    }
    std::set<int> present(labels.begin(), labels.end());
    if (present.size() < 2) {
        throw std::invalid_argument("logistic regression needs at least two classes present");
    }

    LogisticRegression model;
    model.num_classes = num_classes;
    model.weights = Matrix(num_classes, features.cols);
    model.bias.assign(num_classes, 0.0);

    LrObjective objective{features, labels, num_classes, l2_strength};
    Matrix grad_w(num_classes, features.cols);
    std::vector<double> grad_b(num_classes, 0.0);
    double loss = objective.eval(model.weights, model.bias, &grad_w, &grad_b);
    double step = 1.0;

    for (int iter = 0; iter < max_iters; ++iter) {
        double grad_norm_sq = 0.0;
        for (double g : grad_w.data) grad_norm_sq += g * g;
        for (double g : grad_b) grad_norm_sq += g * g;
        if (std::sqrt(grad_norm_sq) < 1e-5) break;

        // Backtracking line search on the descent direction -grad.
        Matrix next_w = model.weights;
        std::vector<double> next_b = model.bias;
        double next_loss = loss;
        while (true) {
            for (std::size_t i = 0; i < next_w.data.size(); ++i) {
                next_w.data[i] = model.weights.data[i] - step * grad_w.data[i];
            }
            for (std::size_t i = 0; i < next_b.size(); ++i) {
                next_b[i] = model.bias[i] - step * grad_b[i];
            }
            next_loss = objective.eval(next_w, next_b, nullptr, nullptr);
            if (next_loss <= loss - 1e-4 * step * grad_norm_sq && std::isfinite(next_loss)) break;
            step *= 0.5;
            if (step < 1e-12) break;
        }
        if (step < 1e-12) break;
        model.weights = std::move(next_w);
        model.bias = std::move(next_b);
        loss = objective.eval(model.weights, model.bias, &grad_w, &grad_b);
        step = std::min(step * 2.0, 1e4);
    }
    return model;
}

LogisticRegression fit_logistic_regression_cv(const Matrix& features, const std::vector<int>& labels,
                                              const std::vector<double>& grid, int folds,
                                              int max_iters, std::uint64_t seed,
                                              double* chosen_l2) {
    if (grid.empty()) throw std::invalid_argument("empty regularization grid");
    const int m = features.rows;
    folds = std::min(folds, m);
    std::vector<int> fold_of(m);
    {
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        Rng rng = make_rng(seed, "lr-cv-folds");
        std::shuffle(order.begin(), order.end(), rng);
        for (int i = 0; i < m; ++i) fold_of[order[i]] = i % folds;
    }

    double best_l2 = grid.front();
    double best_acc = -1.0;
    for (double l2 : grid) {
        double correct = 0.0, total = 0.0;
        for (int fold = 0; fold < folds; ++fold) {
            Matrix train_x(0, features.cols);
            std::vector<int> train_y;
            std::vector<int> holdout;
            for (int i = 0; i < m; ++i) {
                if (fold_of[i] == fold) {
                    holdout.push_back(i);
                } else {
                    train_x.data.insert(train_x.data.end(), features.row_span(i).begin(),
                                        features.row_span(i).end());
                    ++train_x.rows;
                    train_y.push_back(labels[i]);
                }
            }
            std::set<int> present(train_y.begin(), train_y.end());
            if (present.size() < 2) continue;
            LogisticRegression model = fit_logistic_regression(train_x, train_y, l2, max_iters, seed);
            for (int i : holdout) {
                total += 1.0;
                if (model.predict(features.row_span(i)) == labels[i]) correct += 1.0;
            }
        }
        const double acc = total > 0 ? correct / total : 0.0;
        if (acc > best_acc) {
            best_acc = acc;
            best_l2 = l2;
        }
    }
    if (chosen_l2) *chosen_l2 = best_l2;
    return fit_logistic_regression(features, labels, best_l2, max_iters, seed);
}

// ---------------------------------------------------------------------------
// Classification protocol
// ---------------------------------------------------------------------------

namespace {

double macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted, int num_classes) {
    double f1_sum = 0.0;
    int classes_seen = 0;
    for (int c = 0; c < num_classes; ++c) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool is_c = truth[i] == c;
            const bool pred_c = predicted[i] == c;
            tp += (is_c && pred_c) ? 1 : 0;
            fp += (!is_c && pred_c) ? 1 : 0;
            fn += (is_c && !pred_c) ? 1 : 0;
        }
        if (tp + fn == 0) continue; // class absent from the evaluation set
        ++classes_seen;
        if (tp == 0) continue;
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        f1_sum += 2.0 * precision * recall / (precision + recall);
    }
    return classes_seen > 0 ? f1_sum / classes_seen : 0.0;
}

std::vector<double> embedding_features(const GaussianEmbedding& e, bool include_log_variance) {
    std::vector<double> f = e.mu;
    if (include_log_variance) {
        for (double v : e.var) f.push_back(std::log(v));
    }
    return f;
}

} // namespace

EvaluationReport eval_classification(const EncoderParameters& params, const AttributedGraph& graph,
                                     const std::vector<double>& train_fractions, int n_trials,
                                     std::uint64_t seed, bool include_log_variance,
                                     bool cross_validate) {
    if (!graph.has_labels()) throw DataError("classification requires labels");
    if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");

    std::vector<NodeId> labeled;
    std::set<int> all_classes;
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        if (graph.labels[v] >= 0) {
            labeled.push_back(v);
            all_classes.insert(graph.labels[v]);
        }
    }
    if (labeled.size() < 2 || all_classes.size() < 2) throw DataError("not enough labeled nodes");

    const std::vector<GaussianEmbedding> embeddings = forward_batch(params, graph.attributes);
    const std::vector<double> grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};

    EvaluationReport report;
    report.protocol = "classification";
    report.config["n_trials"] = n_trials;
    report.config["features"] = include_log_variance ? "mu+logvar" : "mu";
    auto table = nlohmann::json::array();

    for (double fraction : train_fractions) {
        const auto train_count = static_cast<std::size_t>(
            std::max(1.0, std::floor(fraction * static_cast<double>(labeled.size()))));
        if (train_count >= labeled.size()) {
            throw std::invalid_argument("train fraction leaves no labeled nodes to evaluate");
        }
        std::vector<double> accs, f1s;
        for (int trial = 0; trial < n_trials; ++trial) {
            Rng rng = make_rng(seed, "classification", static_cast<std::uint64_t>(trial));
            std::vector<NodeId> order = labeled;

            // Every class must appear in the training sample; resample a few times.
            bool usable = false;
            for (int attempt = 0; attempt < 50 && !usable; ++attempt) {
                std::shuffle(order.begin(), order.end(), rng);
                std::set<int> present;
                for (std::size_t i = 0; i < train_count; ++i) present.insert(graph.labels[order[i]]);
                usable = present == all_classes;
            }
            if (!usable) {
                throw DataError("could not sample a training set covering every class at fraction " +
                                std::to_string(fraction));
            }

            Matrix train_x(0, 0);
            std::vector<int> train_y;
            for (std::size_t i = 0; i < train_count; ++i) {
                auto f = embedding_features(embeddings[order[i]], include_log_variance);
                if (train_x.cols == 0) train_x.cols = static_cast<int>(f.size());
                train_x.data.insert(train_x.data.end(), f.begin(), f.end());
                ++train_x.rows;
                train_y.push_back(graph.labels[order[i]]);
            }
            LogisticRegression model =
                cross_validate
                    ? fit_logistic_regression_cv(train_x, train_y, grid, 3, 300,
                                                 derive_seed(seed, "lr-cv", trial))
                    : fit_logistic_regression(train_x, train_y, 1e-2, 300);

            std::vector<int> truth, predicted;
            for (std::size_t i = train_count; i < order.size(); ++i) {
                auto f = embedding_features(embeddings[order[i]], include_log_variance);
                truth.push_back(graph.labels[order[i]]);
                predicted.push_back(model.predict(f));
            }
            double correct = 0.0;
            for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i] ? 1 : 0;
            accs.push_back(correct / static_cast<double>(truth.size()));
            f1s.push_back(macro_f1(truth, predicted, graph.num_classes));
        }

        auto mean_std = [](const std::vector<double>& xs) {
            double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
            double var = 0.0;
            for (double x : xs) var += (x - mean) * (x - mean);
            var = xs.size() > 1 ? var / (xs.size() - 1) : 0.0;
            return std::pair<double, double>{mean, std::sqrt(var)};
        };
        const auto [acc_mean, acc_std] = mean_std(accs);
        const auto [f1_mean, f1_std] = mean_std(f1s);
        table.push_back({{"fraction", fraction},
                         {"accuracy_mean", acc_mean},
                         {"accuracy_std", acc_std},
                         {"f1_macro_mean", f1_mean},
                         {"f1_macro_std", f1_std}});
        if (train_fractions.size() == 1 || fraction == train_fractions.back()) {
            report.metrics["accuracy"] = acc_mean;
            report.metrics["f1_macro"] = f1_mean;
        }
    }
    report.tables["per_fraction"] = table;
    return report;
}

// ---------------------------------------------------------------------------
// Uncertainty protocol
// ---------------------------------------------------------------------------

std::vector<int> neighborhood_diversity(const AttributedGraph& graph, int p) {
    if (!graph.has_labels()) throw DataError("diversity requires labels");
    if (p < 1) throw std::invalid_argument("p must be >= 1");
    std::vector<int> diversity(graph.num_nodes, -1);
    for (NodeId v = 0; v < graph.num_nodes; ++v) {
        if (graph.labels[v] < 0) continue;
        std::set<int> classes;
        for (const auto& layer : bfs_layers(graph, v, p)) {
            for (NodeId u : layer) {
                if (graph.labels[u] >= 0) classes.insert(graph.labels[u]);
            }
        }
        diversity[v] = static_cast<int>(classes.size());
    }
    return diversity;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
        i = j;
    }
    return ranks;
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("spearman input length mismatch");
    if (x.size() < 2) return 0.0;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;
    double cov = 0.0, var_x = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (rx[i] - mean) * (ry[i] - mean);
        var_x += (rx[i] - mean) * (rx[i] - mean);
        var_y += (ry[i] - mean) * (ry[i] - mean);
    }
    if (var_x == 0.0 || var_y == 0.0) return 0.0;
    return cov / std::sqrt(var_x * var_y);
}

EvaluationReport diversity_variance_report(const std::vector<GaussianEmbedding>& embeddings,
                                           const std::vector<int>& diversities) {
    if (embeddings.size() != diversities.size()) {
        throw std::invalid_argument("embedding/diversity length mismatch");
    }
    std::map<int, std::pair<double, int>> groups; // diversity -> (sum avg var, count)
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (diversities[i] < 0) continue;
        const auto& var = embeddings[i].var;
        const double avg_var = std::accumulate(var.begin(), var.end(), 0.0) / var.size();
        auto& [sum, count] = groups[diversities[i]];
        sum += avg_var;
        ++count;
        xs.push_back(static_cast<double>(diversities[i]));
        ys.push_back(avg_var);
    }

    EvaluationReport report;
    report.protocol = "diversity_variance";
    report.metrics["spearman"] = spearman(xs, ys); // rank correlation, in [-1, 1]
    report.config["nodes"] = xs.size();
    auto table = nlohmann::json::array();
    for (const auto& [diversity, entry] : groups) {
        table.push_back({{"diversity", diversity},
                         {"mean_variance", entry.first / entry.second},
                         {"count", entry.second}});
    }
    report.tables["per_diversity"] = table;
    return report;
}

LatentDimensionReport detect_latent_dimensions(const std::vector<std::vector<double>>& mean_variance,
                                               int best_epoch, int window, double slope_threshold) {
    if (window < 2) throw std::invalid_argument("window must be >= 2");
    const int epochs = static_cast<int>(mean_variance.size());
    if (epochs < window || (best_epoch >= 0 && epochs < best_epoch + window)) {
        throw DataError("trace too short: need >= " + std::to_string(window) +
                        " epochs past the best validation epoch");
    }
    const int start = epochs - window;
    const int dims = static_cast<int>(mean_variance.front().size());

    LatentDimensionReport report;
    report.normalized_slopes.resize(dims);
    // Least-squares slope over t = 0..window-1 for each dimension.
    const double t_mean = (window - 1) / 2.0;
    double t_var = 0.0;
    for (int t = 0; t < window; ++t) t_var += (t - t_mean) * (t - t_mean);
    for (int d = 0; d < dims; ++d) {
        double y_mean = 0.0;
        for (int t = 0; t < window; ++t) y_mean += mean_variance[start + t][d];
        y_mean /= window;
        double cov = 0.0;
        for (int t = 0; t < window; ++t) {
            cov += (t - t_mean) * (mean_variance[start + t][d] - y_mean);
        }
        const double slope = cov / t_var;
        const double normalized = y_mean != 0.0 ? slope / y_mean : 0.0;
        report.normalized_slopes[d] = normalized;
        if (normalized > slope_threshold) {
            report.flagged.push_back(d);
        } else {
            report.kept.push_back(d);
        }
    }
    return report;
}

LatentDimensionReport detect_latent_dimensions(const TrainingTrace& trace, int window,
                                               double slope_threshold) {
    return detect_latent_dimensions(trace.mean_variance, trace.best_epoch, window, slope_threshold);
}

EvaluationReport pruning_curve(const EncoderParameters& params, const AttributedGraph& graph,
                               const DataSplit& split, SplitPart which) {
    const auto& positives = which == SplitPart::val ? split.val_edges : split.test_edges;
    const auto& negatives = which == SplitPart::val ? split.val_non_edges : split.test_non_edges;
    const std::vector<GaussianEmbedding> embeddings = forward_batch(params, graph.attributes);
    const std::vector<double> final_var = record_variance_trace(embeddings);
    const int dims = static_cast<int>(final_var.size());

    // Most uncertain (highest mean variance) removed first.
    std::vector<int> order(dims);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return final_var[a] > final_var[b]; });

    EvaluationReport report;
    report.protocol = "pruning_curve";
    auto table = nlohmann::json::array();
    for (int removed = 0; removed < dims; ++removed) {
        std::vector<int> kept(order.begin() + removed, order.end());
        std::sort(kept.begin(), kept.end());
        ScoredPairSet scored;
        for (const auto& e : positives) {
            scored.pairs.push_back(e);
            scored.labels.push_back(1);
        }
        for (const auto& e : negatives) {
            scored.pairs.push_back(e);
            scored.labels.push_back(0);
        }
        for (const auto& [u, v] : scored.pairs) {
            scored.scores.push_back(
                link_score_restricted(embeddings[u], embeddings[v], graph.directed, kept));
        }
        table.push_back({{"removed", removed}, {"auc", auc(scored)}});
        if (removed == 0) report.metrics["auc_full"] = table.back()["auc"].get<double>();
    }
    report.tables["pruning"] = table;
    report.tables["removal_order"] = order;
    return report;
}

// ---------------------------------------------------------------------------
// Inductive protocol
// ---------------------------------------------------------------------------

EvaluationReport eval_inductive(const AttributedGraph& graph, double hidden_fraction,
                                const TrainConfig& config) {
    if (!graph.has_attributes()) throw DataError("inductive evaluation requires attributes");
    HiddenNodeSplit hidden = hide_nodes(graph, hidden_fraction, derive_seed(config.seed, "hide"));
    if (hidden.held_out_edges.empty()) throw DataError("no held-out edges touch the hidden nodes");

    // Train on the visible induced graph with its own small validation split.
    DataSplit visible_split;
    if (config.eval_every > 0) {
        visible_split = split_edges(hidden.train_graph, 0.05, 0.0, false,
                                    derive_seed(config.seed, "inductive-val"));
    } else {
        visible_split.train_edges = hidden.train_graph.edge_list();
    }
    TrainResult trained = train(hidden.train_graph, visible_split, config);

    // Hidden-node embeddings come from attributes alone, through the encoder.
    std::vector<GaussianEmbedding> embeddings = forward_batch(trained.params, graph.attributes);

    std::unordered_set<Edge, EdgeHash> all_edges;
    for (const auto& e : graph.edge_list()) all_edges.insert(e);
    Rng rng = make_rng(config.seed, "inductive-negatives");
    std::vector<Edge> negatives = sample_non_edges_touching(graph, hidden.held_out_edges.size(),
                                                            all_edges, hidden.hidden_nodes, rng);

    ScoredPairSet scored = score_pairs(embeddings, graph.directed, hidden.held_out_edges, negatives);
    EvaluationReport report;
    report.protocol = "inductive";
    report.config["hidden_fraction"] = hidden_fraction;
    report.config["hidden_nodes"] = hidden.hidden_nodes.size();
    report.config["held_out_edges"] = hidden.held_out_edges.size();
    report.metrics["auc"] = auc(scored);
    report.metrics["ap"] = average_precision(scored);
    return report;
}

} // namespace g2g
