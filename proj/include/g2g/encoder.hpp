#pragma once

#include <span>
#include <vector>

#include "g2g/common.hpp"
#include "g2g/gauss.hpp"
#include "g2g/graph.hpp"

namespace g2g {

/// Row-major dense matrix of doubles.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    std::span<double> row_span(int r) { return {data.data() + static_cast<std::size_t>(r) * cols,
                                                static_cast<std::size_t>(cols)}; }
    std::span<const double> row_span(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
    }
};

struct DenseLayer {
    Matrix weight; // fan_in x fan_out
    std::vector<double> bias;
};

/// Shared deep feed-forward encoder: relu hidden layers, a linear mean head
/// and an elu(x)+1 variance head so every output variance stays positive.
struct EncoderParameters {
    int input_dim = 0;
    std::vector<DenseLayer> hidden;
    DenseLayer mu_head;
    DenseLayer var_head;

    int half_dim() const { return mu_head.weight.cols; }
    std::vector<int> hidden_sizes() const;
    std::size_t parameter_count() const;
};

/// Named views of every parameter tensor in checkpoint order:
/// hidden weight/bias per layer, then the mu and var heads.
std::vector<std::pair<std::string, std::vector<double>*>> tensor_list(EncoderParameters& params);
std::vector<std::pair<std::string, const std::vector<double>*>> tensor_list(const EncoderParameters& params);

/// Same shapes as `params`, all entries zero (gradient / Adam accumulators).
EncoderParameters zeros_like(const EncoderParameters& params);

/// Uniform Xavier weights on [-sqrt(6/(fan_in+fan_out)), +...], zero biases.
EncoderParameters init_xavier(int input_dim, const std::vector<int>& hidden_sizes, int half_dim,
                              std::uint64_t seed);

/// Intermediate state of one forward pass, consumed by backward().
struct ForwardCache {
    SparseRow input;
    std::vector<std::vector<double>> pre;  // hidden pre-activations
    std::vector<std::vector<double>> act;  // hidden relu outputs
    std::vector<double> var_pre;           // variance head pre-activation
};

GaussianEmbedding forward(const EncoderParameters& params, const SparseRow& attrs_row,
                          ForwardCache* cache = nullptr);

/// Accumulates into `grads` the parameter gradients of a scalar loss whose
/// partials w.r.t. the outputs are grad_mu / grad_var; optionally also returns
/// the gradient w.r.t. the (densified) input row.
void backward(const EncoderParameters& params, const ForwardCache& cache,
              std::span<const double> grad_mu, std::span<const double> grad_var,
              EncoderParameters& grads, std::vector<double>* grad_input = nullptr);

std::vector<GaussianEmbedding> forward_batch(const EncoderParameters& params,
                                             const AttributeMatrix& attrs,
                                             std::vector<ForwardCache>* caches = nullptr);

SparseRow to_sparse_row(std::span<const double> dense);

} // namespace g2g
