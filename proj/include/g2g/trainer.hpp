#pragma once

#include <vector>

#include "g2g/common.hpp"
#include "g2g/encoder.hpp"
#include "g2g/graph.hpp"
#include "g2g/ranking.hpp"

namespace g2g {

struct TrainConfig {
    int max_hop = 2;                    // K
    int half_dim = 64;                  // L/2
    std::vector<int> hidden_sizes = {512};
    double learning_rate = 1e-3;
    int max_epochs = 2000;
    /// Epochs between validation checks; 0 disables validation and early stopping.
    int eval_every = 5;
    /// Validation checks without improvement before stopping.
    int patience = 10;
    /// Anchors per optimizer step; 0 = all nodes when N <= 10000, else 512.
    int anchor_batch = 0;
    SamplerKind sampler = SamplerKind::node_anchored;
    std::uint64_t seed = 1;
    /// > 0: keep training to max_epochs past the early-stop point so the
    /// variance trace covers the overfitting regime.
    int overfit_epochs = 0;
    /// Compute hop sets on the symmetrized graph even for directed input.
    bool hops_undirected = false;
    /// Cap for materializing D_t (full and naive samplers).
    std::size_t triplet_cap = 10'000'000;
    /// Record the per-dimension mean variance every epoch.
    bool record_variance = true;
    /// Progress lines "epoch<TAB>loss<TAB>val_auc" to stderr.
    bool verbose = false;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

/// Adam moment accumulators; shapes mirror the encoder parameters.
struct AdamState {
    EncoderParameters first_moment;
    EncoderParameters second_moment;
    long step = 0;
};

AdamState make_adam_state(const EncoderParameters& params);

/// Bias-corrected Adam update, applied in place.
void adam_step(EncoderParameters& params, const EncoderParameters& grads, AdamState& state,
               double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainingTrace {
    std::vector<double> loss;                            // one estimate per epoch
    std::vector<std::pair<int, double>> val_auc;         // (epoch, AUC) at each check
    std::vector<std::vector<double>> mean_variance;      // per epoch: mean var per dimension
    std::vector<std::size_t> sampled_terms;              // ranking terms consumed per epoch
    int best_epoch = -1;
    double best_val_auc = 0.0;
    int epochs_run = 0;
};

struct TrainResult {
    EncoderParameters params;                 // best validation snapshot (final if no validation)
    TrainingTrace trace;
    std::vector<GaussianEmbedding> embeddings; // all nodes, from the returned params
};

/// Trains the encoder on the split's training edges with the configured
/// sampler, validating link prediction on the split's validation pairs for
/// early stopping. The training structure is rebuilt from split.train_edges,
/// so held-out edges can never leak into hop sets.
TrainResult train(const AttributedGraph& graph, const DataSplit& split, const TrainConfig& config);

/// Mean variance per dimension over all given embeddings (one trace row).
std::vector<double> record_variance_trace(const std::vector<GaussianEmbedding>& embeddings);

} // namespace g2g
