#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "g2g/common.hpp"
#include "g2g/encoder.hpp"
#include "g2g/gauss.hpp"
#include "g2g/graph.hpp"
#include "g2g/trainer.hpp"

namespace g2g {

struct ScoredPairSet {
    std::vector<Edge> pairs;
    std::vector<double> scores;
    std::vector<int> labels; // 1 = true edge
};

/// Mann-Whitney rank statistic: the fraction of (positive, negative) pairs
/// ranked correctly, ties counted one half.
double auc(const ScoredPairSet& scored);

/// Mean precision at each positive's rank in descending-score order; ties are
/// broken by stable input order so results are reproducible bit for bit.
double average_precision(const ScoredPairSet& scored);

/// Link score from embeddings: -E(u,v) for directed graphs, the average of
/// both energy directions for undirected ones.
double link_score(const GaussianEmbedding& hu, const GaussianEmbedding& hv, bool directed);

/// Same, restricted to a subset of embedding dimensions (pruning analysis).
double link_score_restricted(const GaussianEmbedding& hu, const GaussianEmbedding& hv,
                             bool directed, std::span<const int> kept_dims);

struct EvaluationReport {
    std::string protocol;
    std::map<std::string, double> metrics;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json tables = nlohmann::json::object();

    nlohmann::json to_json() const;
};

enum class SplitPart { val, test };

/// AUC/AP of held-out edges vs sampled non-edges, scored by negative energy.
EvaluationReport eval_link_prediction(const EncoderParameters& params, const AttributedGraph& graph,
                                      const DataSplit& split, SplitPart which);

// ---------------------------------------------------------------------------
// Logistic regression (classification protocol)
// ---------------------------------------------------------------------------

struct LogisticRegression {
    Matrix weights;            // num_classes x num_features
    std::vector<double> bias;  // num_classes (unregularized)
    int num_classes = 0;

    std::vector<double> predict_proba(std::span<const double> features) const;
    int predict(std::span<const double> features) const;
    double weight_norm() const;
};

/// Multinomial logistic regression, minimized by gradient descent with
/// backtracking on the L2-regularized mean cross-entropy. Converged when the
/// gradient norm drops below 1e-5 or max_iters is hit.
LogisticRegression fit_logistic_regression(const Matrix& features, const std::vector<int>& labels,
                                           double l2_strength, int max_iters = 500,
                                           std::uint64_t seed = 0);

/// Picks the regularization strength from `grid` by k-fold cross-validation.
LogisticRegression fit_logistic_regression_cv(const Matrix& features, const std::vector<int>& labels,
                                              const std::vector<double>& grid, int folds,
                                              int max_iters, std::uint64_t seed,
                                              double* chosen_l2 = nullptr);

/// Node classification: per train fraction, n_trials of LR on the mean
/// vectors of sampled labeled nodes, scored on the remaining labeled nodes.
EvaluationReport eval_classification(const EncoderParameters& params, const AttributedGraph& graph,
                                     const std::vector<double>& train_fractions, int n_trials,
                                     std::uint64_t seed, bool include_log_variance = false,
                                     bool cross_validate = true);

// ---------------------------------------------------------------------------
// Uncertainty protocol
// ---------------------------------------------------------------------------

/// Number of distinct classes within each node's p-hop ball (its own fresh
/// BFS, independent of the training K). Unlabeled nodes get -1; unlabeled
/// neighbors are ignored.
std::vector<int> neighborhood_diversity(const AttributedGraph& graph, int p = 3);

/// Spearman rank correlation with average ranks on ties; 0 when either side
/// is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Groups nodes by diversity and reports each group's mean average variance
/// plus the overall diversity/variance Spearman correlation.
EvaluationReport diversity_variance_report(const std::vector<GaussianEmbedding>& embeddings,
                                           const std::vector<int>& diversities);

struct LatentDimensionReport {
    std::vector<int> kept;
    std::vector<int> flagged;
    std::vector<double> normalized_slopes;
};

/// Flags dimensions whose mean variance keeps growing during overfitting:
/// least-squares slope over the final `window` epochs, normalized by the
/// window mean, compared against slope_threshold.
LatentDimensionReport detect_latent_dimensions(const std::vector<std::vector<double>>& mean_variance,
                                               int best_epoch, int window = 200,
                                               double slope_threshold = 1e-3);
LatentDimensionReport detect_latent_dimensions(const TrainingTrace& trace, int window = 200,
                                               double slope_threshold = 1e-3);

/// Link-prediction AUC after removing 0..L_half-1 dimensions, most uncertain
/// (highest final mean variance) first.
EvaluationReport pruning_curve(const EncoderParameters& params, const AttributedGraph& graph,
                               const DataSplit& split, SplitPart which = SplitPart::test);

// ---------------------------------------------------------------------------
// Inductive protocol
// ---------------------------------------------------------------------------

/// Hides a fraction of nodes, trains on the visible induced graph, embeds the
/// hidden nodes from attributes alone and scores all held-out edges against
/// an equal number of non-edges touching the hidden set.
EvaluationReport eval_inductive(const AttributedGraph& graph, double hidden_fraction,
                                const TrainConfig& config);

} // namespace g2g
