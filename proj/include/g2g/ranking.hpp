#pragma once

#include <cstddef>
#include <vector>

#include "g2g/common.hpp"
#include "g2g/encoder.hpp"
#include "g2g/gauss.hpp"
#include "g2g/graph.hpp"

namespace g2g {

/// One pairwise ranking constraint: the anchor should sit closer (lower
/// energy) to `positive` at hop pos_hop than to `negative` at hop neg_hop.
struct Triplet {
    NodeId anchor = 0;
    NodeId positive = 0;
    NodeId negative = 0;
    int pos_hop = 0;
    int neg_hop = 0;
};

/// One uniform draw per non-empty hop set of an anchor, plus the
/// |N_ik| * |N_il| reweighting that keeps the stochastic loss unbiased.
struct AnchoredSample {
    NodeId anchor = 0;
    std::vector<std::pair<int, NodeId>> chosen;            // (hop, sampled node)
    std::vector<std::tuple<int, int, double>> pair_weights; // (k, l, |N_ik|*|N_il|) for k < l
};

/// A weighted ranking term ready for loss/gradient evaluation.
struct LossTerm {
    NodeId anchor = 0;
    NodeId positive = 0;
    NodeId negative = 0;
    double weight = 1.0;
};

enum class SamplerKind { node_anchored, naive, full };

/// The exhaustive constraint set D_t; O(N^3) in the worst case, so callers
/// must pass a cap they are willing to materialize.
std::vector<Triplet> enumerate_triplets(const std::vector<HopNeighborhoods>& hop_sets,
                                        std::size_t cap = 10'000'000);

std::size_t count_triplets(const std::vector<HopNeighborhoods>& hop_sets);

/// Exact square-exponential ranking loss: sum over triplets of
/// E(anchor,positive)^2 + exp(-E(anchor,negative)).
double full_loss(const std::vector<GaussianEmbedding>& embeddings,
                 const std::vector<Triplet>& triplets);

/// Loss of weighted terms on frozen embeddings.
double loss_on_terms(const std::vector<GaussianEmbedding>& embeddings,
                     const std::vector<LossTerm>& terms);

AnchoredSample sample_node_anchored(const HopNeighborhoods& hops, Rng& rng);

/// Expands an anchored sample into weighted loss terms (one per hop pair).
std::vector<LossTerm> terms_from_sample(const AnchoredSample& sample);

/// I.i.d. uniform draws from D_t. The matching unbiased loss estimate scales
/// each term by |D_t| / batch_size.
std::vector<Triplet> sample_naive(const std::vector<Triplet>& triplets, std::size_t batch_size,
                                  Rng& rng);

std::vector<LossTerm> terms_from_triplets(const std::vector<Triplet>& triplets, double weight = 1.0);

struct LossAndGrads {
    double loss = 0.0;
    EncoderParameters grads;
};

/// Evaluates the weighted ranking loss on the given terms and accumulates its
/// exact gradient through the shared encoder. Every referenced node is
/// forwarded once; backward runs in ascending node order so the reduction is
/// deterministic.
LossAndGrads stochastic_loss_and_grads(const EncoderParameters& params,
                                       const AttributeMatrix& attrs,
                                       const std::vector<LossTerm>& terms);

struct GradientVariance {
    /// Mean per-coordinate variance within each named parameter tensor.
    std::vector<std::pair<std::string, double>> per_block;
    /// Mean per-coordinate variance over all parameters.
    double overall = 0.0;
};

/// Empirical variance of the stochastic gradient at a fixed parameter
/// snapshot, from n_repeats independent draws of the given sampler. Naive
/// batches default to the anchored strategy's expected triplet count so the
/// two are compared at matched cost.
GradientVariance estimate_grad_variance(const EncoderParameters& params,
                                        const AttributeMatrix& attrs,
                                        const std::vector<HopNeighborhoods>& hop_sets,
                                        SamplerKind strategy, int n_repeats, Rng& rng,
                                        std::size_t naive_batch = 0);

} // namespace g2g
