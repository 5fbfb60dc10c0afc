#include "g2g/encoder.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace g2g {

namespace {

// elu(x) + 1: the x < 0 branch is exp(x) exactly, computed directly so the
// result stays positive; floored at the smallest normal double against IEEE
// underflow for extreme pre-activations.
inline double elu_plus_one(double x) {
    if (x >= 0) return x + 1.0;
    return std::max(std::exp(x), std::numeric_limits<double>::min());
}
inline double elu_prime(double x) { return x >= 0 ? 1.0 : std::exp(x); }

// out = bias + x * W for a sparse row x.
std::vector<double> affine_sparse(const SparseRow& x, const DenseLayer& layer) {
    std::vector<double> out(layer.bias);
    for (const auto& [col, value] : x) {
        const auto w = layer.weight.row_span(col);
        for (int j = 0; j < layer.weight.cols; ++j) out[j] += value * w[j];
    }
    return out;
}

std::vector<double> affine_dense(std::span<const double> x, const DenseLayer& layer) {
    std::vector<double> out(layer.bias);
    for (int i = 0; i < layer.weight.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const auto w = layer.weight.row_span(i);
        for (int j = 0; j < layer.weight.cols; ++j) out[j] += xi * w[j];
    }
    return out;
}

void check_row(const SparseRow& x, int input_dim) {
    for (const auto& [col, value] : x) {
        if (col < 0 || col >= input_dim) {
            throw std::invalid_argument("attribute column " + std::to_string(col) +
                                        " out of range for input dim " + std::to_string(input_dim));
        }
        if (!std::isfinite(value)) throw std::domain_error("non-finite attribute value");
    }
}

} // namespace

std::vector<int> EncoderParameters::hidden_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(hidden.size());
    for (const auto& layer : hidden) sizes.push_back(layer.weight.cols);
    return sizes;
}

std::size_t EncoderParameters::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, tensor] : tensor_list(*this)) n += tensor->size();
    return n;
}

std::vector<std::pair<std::string, std::vector<double>*>> tensor_list(EncoderParameters& params) {
    std::vector<std::pair<std::string, std::vector<double>*>> out;
    for (std::size_t l = 0; l < params.hidden.size(); ++l) {
        out.emplace_back("hidden" + std::to_string(l) + ".weight", &params.hidden[l].weight.data);
        out.emplace_back("hidden" + std::to_string(l) + ".bias", &params.hidden[l].bias);
    }
    out.emplace_back("mu.weight", &params.mu_head.weight.data);
    out.emplace_back("mu.bias", &params.mu_head.bias);
    out.emplace_back("var.weight", &params.var_head.weight.data);
    out.emplace_back("var.bias", &params.var_head.bias);
    return out;
}

std::vector<std::pair<std::string, const std::vector<double>*>> tensor_list(const EncoderParameters& params) {
    std::vector<std::pair<std::string, const std::vector<double>*>> out;
    for (auto& [name, tensor] : tensor_list(const_cast<EncoderParameters&>(params))) {
        out.emplace_back(name, tensor);
    }
    return out;
}

EncoderParameters zeros_like(const EncoderParameters& params) {
    EncoderParameters out;
    out.input_dim = params.input_dim;
    for (const auto& layer : params.hidden) {
        out.hidden.push_back({Matrix(layer.weight.rows, layer.weight.cols),
                              std::vector<double>(layer.bias.size(), 0.0)});
    }
    out.mu_head = {Matrix(params.mu_head.weight.rows, params.mu_head.weight.cols),
                   std::vector<double>(params.mu_head.bias.size(), 0.0)};
    out.var_head = {Matrix(params.var_head.weight.rows, params.var_head.weight.cols),
                    std::vector<double>(params.var_head.bias.size(), 0.0)};
    return out;
}

EncoderParameters init_xavier(int input_dim, const std::vector<int>& hidden_sizes, int half_dim,
                              std::uint64_t seed) {
    if (input_dim < 1 || half_dim < 1) throw std::invalid_argument("sizes must be >= 1");
    if (hidden_sizes.empty()) throw std::invalid_argument("at least one hidden layer required");
    for (int s : hidden_sizes) {
        if (s < 1) throw std::invalid_argument("hidden sizes must be >= 1");
    }
    Rng rng(seed);
    auto make_layer = [&](int fan_in, int fan_out) {
        DenseLayer layer{Matrix(fan_in, fan_out), std::vector<double>(fan_out, 0.0)};
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> uniform(-bound, bound);
        for (double& w : layer.weight.data) w = uniform(rng);
        return layer;
    };

    EncoderParameters params;
    params.input_dim = input_dim;
    int prev = input_dim;
    for (int s : hidden_sizes) {
        params.hidden.push_back(make_layer(prev, s));
        prev = s;
    }
    params.mu_head = make_layer(prev, half_dim);
    params.var_head = make_layer(prev, half_dim);
    return params;
}

GaussianEmbedding forward(const EncoderParameters& params, const SparseRow& attrs_row,
                          ForwardCache* cache) {
    check_row(attrs_row, params.input_dim);
    if (cache) {
        cache->input = attrs_row;
        cache->pre.clear();
        cache->act.clear();
    }

    std::vector<double> h;
    bool first = true;
    for (const auto& layer : params.hidden) {
        std::vector<double> z = first ? affine_sparse(attrs_row, layer) : affine_dense(h, layer);
        first = false;
        if (cache) cache->pre.push_back(z);
        for (double& x : z) x = x > 0 ? x : 0.0;
        if (cache) cache->act.push_back(z);
        h = std::move(z);
    }

    GaussianEmbedding out;
    out.mu = affine_dense(h, params.mu_head);
    std::vector<double> var_pre = affine_dense(h, params.var_head);
    if (cache) cache->var_pre = var_pre;
    out.var.resize(var_pre.size());
    for (std::size_t d = 0; d < var_pre.size(); ++d) out.var[d] = elu_plus_one(var_pre[d]);
    return out;
}

namespace {

// grads.weight[i,:] += x[i] * g_out, grads.bias += g_out, and optionally
// g_in[i] = <W[i,:], g_out>.
void accumulate_layer(const DenseLayer& layer, const std::vector<double>& input_act,
                      std::span<const double> g_out, DenseLayer& grads,
                      std::vector<double>* g_in) {
    for (std::size_t j = 0; j < grads.bias.size(); ++j) grads.bias[j] += g_out[j];
    for (int i = 0; i < layer.weight.rows; ++i) {
        const double xi = input_act[i];
        if (xi != 0.0) {
            auto gw = grads.weight.row_span(i);
            for (int j = 0; j < layer.weight.cols; ++j) gw[j] += xi * g_out[j];
        }
        if (g_in) {
            const auto w = layer.weight.row_span(i);
            double dot = 0.0;
            for (int j = 0; j < layer.weight.cols; ++j) dot += w[j] * g_out[j];
            (*g_in)[i] = dot;
        }
    }
}

// First-layer variant: only the rows of the sparse input are touched.
void accumulate_sparse_layer(const DenseLayer& layer, const SparseRow& input,
                             std::span<const double> g_out, DenseLayer& grads,
                             std::vector<double>* g_in) {
    for (std::size_t j = 0; j < grads.bias.size(); ++j) grads.bias[j] += g_out[j];
    for (const auto& [col, value] : input) {
        auto gw = grads.weight.row_span(col);
        for (int j = 0; j < layer.weight.cols; ++j) gw[j] += value * g_out[j];
    }
    if (g_in) {
        g_in->assign(layer.weight.rows, 0.0);
        for (int i = 0; i < layer.weight.rows; ++i) {
            const auto w = layer.weight.row_span(i);
            double dot = 0.0;
            for (int j = 0; j < layer.weight.cols; ++j) dot += w[j] * g_out[j];
            (*g_in)[i] = dot;
        }
    }
}

} // namespace

void backward(const EncoderParameters& params, const ForwardCache& cache,
              std::span<const double> grad_mu, std::span<const double> grad_var,
              EncoderParameters& grads, std::vector<double>* grad_input) {
    const auto half = static_cast<std::size_t>(params.half_dim());
    if (grad_mu.size() != half || grad_var.size() != half) {
        throw std::invalid_argument("output gradient size does not match embedding dim");
    }
    if (cache.pre.size() != params.hidden.size() || cache.var_pre.size() != half) {
        throw std::invalid_argument("forward cache does not match parameters");
    }

    std::vector<double> g_var_pre(half);
    for (std::size_t d = 0; d < half; ++d) g_var_pre[d] = grad_var[d] * elu_prime(cache.var_pre[d]);

    const auto& last_act = cache.act.back();
    std::vector<double> g_h(last_act.size(), 0.0);
    {
        std::vector<double> from_mu(last_act.size());
        accumulate_layer(params.mu_head, last_act, grad_mu, grads.mu_head, &from_mu);
        std::vector<double> from_var(last_act.size());
        accumulate_layer(params.var_head, last_act, g_var_pre, grads.var_head, &from_var);
        for (std::size_t i = 0; i < g_h.size(); ++i) g_h[i] = from_mu[i] + from_var[i];
    }

    for (int l = static_cast<int>(params.hidden.size()) - 1; l >= 0; --l) {
        // relu' is 1 for positive pre-activations, 0 otherwise.
        std::vector<double> g_z(g_h.size());
        for (std::size_t j = 0; j < g_z.size(); ++j) {
            g_z[j] = cache.pre[l][j] > 0 ? g_h[j] : 0.0;
        }
        if (l == 0) {
            std::vector<double> g_in;
            accumulate_sparse_layer(params.hidden[0], cache.input, g_z, grads.hidden[0],
                                    grad_input ? &g_in : nullptr);
            if (grad_input) *grad_input = std::move(g_in);
        } else {
            std::vector<double> g_prev(cache.act[l - 1].size());
            accumulate_layer(params.hidden[l], cache.act[l - 1], g_z, grads.hidden[l], &g_prev);
            g_h = std::move(g_prev);
        }
    }
}

std::vector<GaussianEmbedding> forward_batch(const EncoderParameters& params,
                                             const AttributeMatrix& attrs,
                                             std::vector<ForwardCache>* caches) {
    if (attrs.cols() != params.input_dim) {
        throw std::invalid_argument("attribute dim " + std::to_string(attrs.cols()) +
                                    " does not match encoder input dim " +
                                    std::to_string(params.input_dim));
    }
    std::vector<GaussianEmbedding> out;
    out.reserve(attrs.rows());
    if (caches) caches->assign(attrs.rows(), {});
    for (int i = 0; i < attrs.rows(); ++i) {
        out.push_back(forward(params, attrs.row(i), caches ? &(*caches)[i] : nullptr));
    }
    return out;
}

SparseRow to_sparse_row(std::span<const double> dense) {
    SparseRow row;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        if (dense[i] != 0.0) row.emplace_back(static_cast<int>(i), dense[i]);
    }
    return row;
}

} // namespace g2g
