#include "g2g/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "g2g/evaluation.hpp"

namespace g2g {

AdamState make_adam_state(const EncoderParameters& params) {
    return {zeros_like(params), zeros_like(params), 0};
}

void adam_step(EncoderParameters& params, const EncoderParameters& grads, AdamState& state,
               double learning_rate, double beta1, double beta2, double eps) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

    auto p_tensors = tensor_list(params);
    auto g_tensors = tensor_list(const_cast<EncoderParameters&>(grads));
    auto m_tensors = tensor_list(state.first_moment);
    auto v_tensors = tensor_list(state.second_moment);
    for (std::size_t t = 0; t < p_tensors.size(); ++t) {
        auto& p = *p_tensors[t].second;
        const auto& g = *g_tensors[t].second;
        auto& m = *m_tensors[t].second;
        auto& v = *v_tensors[t].second;
        if (p.size() != g.size()) throw std::invalid_argument("gradient shape mismatch in adam_step");
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

std::vector<double> record_variance_trace(const std::vector<GaussianEmbedding>& embeddings) {
    if (embeddings.empty()) return {};
    std::vector<double> mean(embeddings.front().var.size(), 0.0);
    for (const auto& e : embeddings) {
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += e.var[d];
    }
    for (double& m : mean) m /= static_cast<double>(embeddings.size());
    return mean;
}

namespace {

double validation_auc(const EncoderParameters& params, const AttributeMatrix& attrs,
                      const DataSplit& split, bool directed) {
    std::vector<GaussianEmbedding> embeddings = forward_batch(params, attrs);
    ScoredPairSet scored;
    for (const auto& e : split.val_edges) {
        scored.pairs.push_back(e);
        scored.labels.push_back(1);
    }
    for (const auto& e : split.val_non_edges) {
        scored.pairs.push_back(e);
        scored.labels.push_back(0);
    }
    for (const auto& [u, v] : scored.pairs) {
        scored.scores.push_back(link_score(embeddings[u], embeddings[v], directed));
    }
    return auc(scored);
}

} // namespace

TrainResult train(const AttributedGraph& graph, const DataSplit& split, const TrainConfig& config) {
    if (!graph.has_attributes()) {
        throw std::invalid_argument("training requires attributes (use one-hot mode for plain graphs)");
    }
    if (config.max_epochs < 0 || config.learning_rate <= 0 || config.max_hop < 1 ||
        config.half_dim < 1 || config.patience < 1) {
        throw std::invalid_argument("invalid training configuration");
    }
    const bool validate = config.eval_every > 0;
    if (validate && split.val_edges.empty()) {
        throw std::invalid_argument(
            "early stopping requested but the split has no validation edges (set eval_every = 0)");
    }

    const int n = graph.num_nodes;
    AttributedGraph train_graph = subgraph_with_edges(graph, split.train_edges);
    const AttributedGraph hop_graph =
        config.hops_undirected ? symmetrized_view(train_graph) : train_graph;
    const std::vector<HopNeighborhoods> hops = compute_all_hop_sets(hop_graph, config.max_hop);

    std::vector<Triplet> all_triplets;
    if (config.sampler != SamplerKind::node_anchored) {
        all_triplets = enumerate_triplets(hops, config.triplet_cap);
        if (all_triplets.empty()) throw DataError("the training graph yields no ranking triplets");
    }
    std::size_t anchored_pairs = 0;
    for (const auto& h : hops) {
        std::size_t non_empty = 0;
        for (const auto& s : h.sets) non_empty += s.empty() ? 0 : 1;
        anchored_pairs += non_empty * (non_empty - 1) / 2;
    }

    const int batch = config.anchor_batch > 0 ? std::min(config.anchor_batch, n)
                                              : (n <= 10000 ? n : 512);
    const int steps_per_epoch = (n + batch - 1) / batch;

    EncoderParameters params = init_xavier(graph.attributes.cols(), config.hidden_sizes,
                                           config.half_dim, derive_seed(config.seed, "init"));
    AdamState adam = make_adam_state(params);
    Rng rng = make_rng(config.seed, "train");

    TrainResult result;
    TrainingTrace& trace = result.trace;
    EncoderParameters best_params = params;
    int checks_since_best = 0;
    bool stopped = false;

    std::vector<NodeId> anchor_order(n);
    std::iota(anchor_order.begin(), anchor_order.end(), 0);

    for (int epoch = 0; epoch < config.max_epochs && !stopped; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t epoch_terms = 0;
        if (config.sampler == SamplerKind::full) {
            LossAndGrads lg = stochastic_loss_and_grads(params, graph.attributes,
                                                        terms_from_triplets(all_triplets));
            adam_step(params, lg.grads, adam, config.learning_rate, config.adam_beta1,
                      config.adam_beta2, config.adam_eps);
            epoch_loss = lg.loss;
            epoch_terms = all_triplets.size();
        } else if (config.sampler == SamplerKind::naive) {
            const std::size_t per_step =
                std::max<std::size_t>(1, anchored_pairs / static_cast<std::size_t>(steps_per_epoch));
            for (int step = 0; step < steps_per_epoch; ++step) {
                const double weight = static_cast<double>(all_triplets.size()) /
                                      static_cast<double>(per_step);
                auto terms = terms_from_triplets(sample_naive(all_triplets, per_step, rng), weight);
                LossAndGrads lg = stochastic_loss_and_grads(params, graph.attributes, terms);
                adam_step(params, lg.grads, adam, config.learning_rate, config.adam_beta1,
                          config.adam_beta2, config.adam_eps);
                epoch_loss += lg.loss / steps_per_epoch;
                epoch_terms += terms.size();
            }
        } else {
            std::shuffle(anchor_order.begin(), anchor_order.end(), rng);
            for (int start = 0; start < n; start += batch) {
                std::vector<LossTerm> terms;
                const int end = std::min(n, start + batch);
                for (int a = start; a < end; ++a) {
                    auto sampled = terms_from_sample(sample_node_anchored(hops[anchor_order[a]], rng));
                    terms.insert(terms.end(), sampled.begin(), sampled.end());
                }
                if (terms.empty()) continue;
                LossAndGrads lg = stochastic_loss_and_grads(params, graph.attributes, terms);
                adam_step(params, lg.grads, adam, config.learning_rate, config.adam_beta1,
                          config.adam_beta2, config.adam_eps);
                epoch_loss += lg.loss;
                epoch_terms += terms.size();
            }
        }
        if (!std::isfinite(epoch_loss)) {
            throw std::domain_error("non-finite loss at epoch " + std::to_string(epoch));
        }
        trace.loss.push_back(epoch_loss);
        trace.sampled_terms.push_back(epoch_terms);
        trace.epochs_run = epoch + 1;

        if (config.record_variance) {
            trace.mean_variance.push_back(
                record_variance_trace(forward_batch(params, graph.attributes)));
        }

        double val = std::numeric_limits<double>::quiet_NaN();
        if (validate && (epoch + 1) % config.eval_every == 0) {
            val = validation_auc(params, graph.attributes, split, graph.directed);
            trace.val_auc.emplace_back(epoch, val);
            if (trace.best_epoch < 0 || val > trace.best_val_auc) {
                trace.best_val_auc = val;
                trace.best_epoch = epoch;
                best_params = params;
                checks_since_best = 0;
            } else {
                ++checks_since_best;
                if (checks_since_best >= config.patience && config.overfit_epochs == 0) {
                    stopped = true;
                }
            }
        }
        if (config.verbose) {
            std::cerr << epoch << '\t' << epoch_loss << '\t';
            if (std::isnan(val)) {
                std::cerr << '-';
            } else {
                std::cerr << val;
            }
            std::cerr << '\n';
        }
    }

    result.params = validate && trace.best_epoch >= 0 ? best_params : params;
    result.embeddings = forward_batch(result.params, graph.attributes);
    return result;
}

} // namespace g2g
