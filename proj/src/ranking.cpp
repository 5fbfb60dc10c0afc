#include "g2g/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace g2g {

std::size_t count_triplets(const std::vector<HopNeighborhoods>& hop_sets) {
    std::size_t total = 0;
    for (const auto& hops : hop_sets) {
        for (int k = 1; k <= hops.max_hop; ++k) {
            for (int l = k + 1; l <= hops.max_hop; ++l) {
                total += hops.cardinality(k) * hops.cardinality(l);
            }
        }
    }
    return total;
}

std::vector<Triplet> enumerate_triplets(const std::vector<HopNeighborhoods>& hop_sets,
                                        std::size_t cap) {
    const std::size_t total = count_triplets(hop_sets);
    if (total > cap) {
        throw DataError("triplet set size " + std::to_string(total) + " exceeds cap " +
                        std::to_string(cap));
    }
    std::vector<Triplet> out;
    out.reserve(total);
    for (const auto& hops : hop_sets) {
        for (int k = 1; k <= hops.max_hop; ++k) {
            for (int l = k + 1; l <= hops.max_hop; ++l) {
                for (NodeId jk : hops.sets[k - 1]) {
                    for (NodeId jl : hops.sets[l - 1]) {
                        out.push_back({hops.anchor, jk, jl, k, l});
                    }
                }
            }
        }
    }
    return out;
}

namespace {

inline double term_loss(double e_pos, double e_neg) {
    return e_pos * e_pos + std::exp(-e_neg);
}

} // namespace

double full_loss(const std::vector<GaussianEmbedding>& embeddings,
                 const std::vector<Triplet>& triplets) {
    double loss = 0.0;
    for (const auto& t : triplets) {
        const double e_pos = kl_energy(embeddings.at(t.anchor), embeddings.at(t.positive));
        const double e_neg = kl_energy(embeddings.at(t.anchor), embeddings.at(t.negative));
        loss += term_loss(e_pos, e_neg);
    }
    return loss;
}

double loss_on_terms(const std::vector<GaussianEmbedding>& embeddings,
                     const std::vector<LossTerm>& terms) {
    double loss = 0.0;
    for (const auto& t : terms) {
        const double e_pos = kl_energy(embeddings.at(t.anchor), embeddings.at(t.positive));
        const double e_neg = kl_energy(embeddings.at(t.anchor), embeddings.at(t.negative));
        loss += t.weight * term_loss(e_pos, e_neg);
    }
    return loss;
}

AnchoredSample sample_node_anchored(const HopNeighborhoods& hops, Rng& rng) {
    AnchoredSample sample;
    sample.anchor = hops.anchor;
    for (int k = 1; k <= hops.max_hop; ++k) {
        const auto& set = hops.sets[k - 1];
        if (set.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
        sample.chosen.emplace_back(k, set[pick(rng)]);
    }
    for (std::size_t a = 0; a < sample.chosen.size(); ++a) {
        for (std::size_t b = a + 1; b < sample.chosen.size(); ++b) {
            const int k = sample.chosen[a].first;
            const int l = sample.chosen[b].first;
            const double weight =
                static_cast<double>(hops.cardinality(k)) * static_cast<double>(hops.cardinality(l));
            sample.pair_weights.emplace_back(k, l, weight);
        }
    }
    return sample;
}

std::vector<LossTerm> terms_from_sample(const AnchoredSample& sample) {
    std::vector<LossTerm> terms;
    terms.reserve(sample.pair_weights.size());
    std::unordered_map<int, NodeId> by_hop;
    for (const auto& [hop, node] : sample.chosen) by_hop[hop] = node;
    for (const auto& [k, l, weight] : sample.pair_weights) {
        terms.push_back({sample.anchor, by_hop.at(k), by_hop.at(l), weight});
    }
    return terms;
}

std::vector<Triplet> sample_naive(const std::vector<Triplet>& triplets, std::size_t batch_size,
                                  Rng& rng) {
    if (triplets.empty()) throw std::invalid_argument("cannot sample from an empty triplet set");
    std::uniform_int_distribution<std::size_t> pick(0, triplets.size() - 1);
    std::vector<Triplet> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) out.push_back(triplets[pick(rng)]);
    return out;
}

std::vector<LossTerm> terms_from_triplets(const std::vector<Triplet>& triplets, double weight) {
    std::vector<LossTerm> terms;
    terms.reserve(triplets.size());
    for (const auto& t : triplets) terms.push_back({t.anchor, t.positive, t.negative, weight});
    return terms;
}

LossAndGrads stochastic_loss_and_grads(const EncoderParameters& params,
                                       const AttributeMatrix& attrs,
                                       const std::vector<LossTerm>& terms) {
    LossAndGrads result;
    result.grads = zeros_like(params);
    if (terms.empty()) return result;

    // Forward every referenced node once.
    std::vector<NodeId> nodes;
    for (const auto& t : terms) {
        nodes.push_back(t.anchor);
        nodes.push_back(t.positive);
        nodes.push_back(t.negative);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    std::unordered_map<NodeId, int> index;
    index.reserve(nodes.size());
    std::vector<GaussianEmbedding> embeddings(nodes.size());
    std::vector<ForwardCache> caches(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        index[nodes[i]] = static_cast<int>(i);
        embeddings[i] = forward(params, attrs.row(nodes[i]), &caches[i]);
    }

    const int half = params.half_dim();
    std::vector<std::vector<double>> grad_mu(nodes.size(), std::vector<double>(half, 0.0));
    std::vector<std::vector<double>> grad_var(nodes.size(), std::vector<double>(half, 0.0));

    // coeff * dE(i,j)/d{mu,var} accumulated into both endpoints, fused with
    // the kl_energy_grad formulas to keep this hot path allocation-free.
    auto add_pair_grad = [&](int i, int j, double coeff) {
        const auto& hi = embeddings[i];
        const auto& hj = embeddings[j];
        for (int d = 0; d < half; ++d) {
            const double vi = hi.var[d];
            const double vj = hj.var[d];
            const double diff = hi.mu[d] - hj.mu[d];
            const double g_mu_i = diff / vi;
            grad_mu[i][d] += coeff * g_mu_i;
            grad_mu[j][d] -= coeff * g_mu_i;
            grad_var[i][d] += coeff * 0.5 * (1.0 / vi - vj / (vi * vi) - diff * diff / (vi * vi));
            grad_var[j][d] += coeff * 0.5 * (1.0 / vi - 1.0 / vj);
        }
    };

    for (const auto& t : terms) {
        const int a = index.at(t.anchor);
        const int p = index.at(t.positive);
        const int n = index.at(t.negative);
        const double e_pos = kl_energy(embeddings[a], embeddings[p]);
        const double e_neg = kl_energy(embeddings[a], embeddings[n]);
        result.loss += t.weight * term_loss(e_pos, e_neg);
        add_pair_grad(a, p, 2.0 * t.weight * e_pos);
        add_pair_grad(a, n, -t.weight * std::exp(-e_neg));
    }

    // Ascending node order keeps the parameter-gradient reduction deterministic.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        backward(params, caches[i], grad_mu[i], grad_var[i], result.grads);
    }
    return result;
}

GradientVariance estimate_grad_variance(const EncoderParameters& params,
                                        const AttributeMatrix& attrs,
                                        const std::vector<HopNeighborhoods>& hop_sets,
                                        SamplerKind strategy, int n_repeats, Rng& rng,
                                        std::size_t naive_batch) {
    if (n_repeats < 2) throw std::invalid_argument("variance estimation needs n_repeats >= 2");
    if (strategy == SamplerKind::full) {
        throw std::invalid_argument("the full sampler has no sampling variance to estimate");
    }

    std::vector<Triplet> all_triplets;
    std::size_t anchored_count = 0;
    for (const auto& hops : hop_sets) {
        std::size_t non_empty = 0;
        for (const auto& set : hops.sets) non_empty += set.empty() ? 0 : 1;
        anchored_count += non_empty * (non_empty - 1) / 2;
    }
    if (strategy == SamplerKind::naive) {
        all_triplets = enumerate_triplets(hop_sets);
        if (naive_batch == 0) naive_batch = std::max<std::size_t>(1, anchored_count);
    }

    // Welford accumulation over the flattened gradient.
    std::vector<double> mean, m2;
    long count = 0;
    GradientVariance out;

    for (int r = 0; r < n_repeats; ++r) {
        std::vector<LossTerm> terms;
        if (strategy == SamplerKind::node_anchored) {
            for (const auto& hops : hop_sets) {
                auto sampled = terms_from_sample(sample_node_anchored(hops, rng));
                terms.insert(terms.end(), sampled.begin(), sampled.end());
            }
        } else {
            const double weight =
                static_cast<double>(all_triplets.size()) / static_cast<double>(naive_batch);
            terms = terms_from_triplets(sample_naive(all_triplets, naive_batch, rng), weight);
        }
        LossAndGrads lg = stochastic_loss_and_grads(params, attrs, terms);

        std::vector<double> flat;
        for (const auto& [name, tensor] : tensor_list(lg.grads)) {
            flat.insert(flat.end(), tensor->begin(), tensor->end());
        }
        if (mean.empty()) {
            mean.assign(flat.size(), 0.0);
            m2.assign(flat.size(), 0.0);
        }
        ++count;
        for (std::size_t i = 0; i < flat.size(); ++i) {
            const double delta = flat[i] - mean[i];
            mean[i] += delta / static_cast<double>(count);
            m2[i] += delta * (flat[i] - mean[i]);
        }
    }

    // Split the flattened variances back into named blocks.
    EncoderParameters shape = zeros_like(params);
    std::size_t offset = 0;
    double total = 0.0;
    std::size_t total_n = 0;
    for (const auto& [name, tensor] : tensor_list(shape)) {
        double block = 0.0;
        for (std::size_t i = 0; i < tensor->size(); ++i) {
            block += m2[offset + i] / static_cast<double>(count - 1);
        }
        total += block;
        total_n += tensor->size();
        out.per_block.emplace_back(name, block / static_cast<double>(tensor->size()));
        offset += tensor->size();
    }
    out.overall = total / static_cast<double>(total_n);
    return out;
}

} // namespace g2g
