#include "g2g/gauss.hpp"

#include <cmath>
#include <stdexcept>

namespace g2g {

namespace {

void check_pair(const GaussianEmbedding& hi, const GaussianEmbedding& hj) {
    if (hi.mu.size() != hi.var.size() || hj.mu.size() != hj.var.size() ||
        hi.mu.size() != hj.mu.size()) {
        throw std::invalid_argument("embedding dimensionality mismatch");
    }
    for (double v : hi.var) {
        if (!(v > 0)) throw std::domain_error("non-positive variance in embedding");
    }
    for (double v : hj.var) {
        if (!(v > 0)) throw std::domain_error("non-positive variance in embedding");
    }
}

inline double kl_term(double mu_i, double var_i, double mu_j, double var_j) {
    const double diff = mu_i - mu_j;
    return var_j / var_i + diff * diff / var_i - 1.0 + std::log(var_i) - std::log(var_j);
}

} // namespace

double kl_energy(const GaussianEmbedding& hi, const GaussianEmbedding& hj) {
    check_pair(hi, hj);
    double sum = 0.0;
    for (std::size_t d = 0; d < hi.mu.size(); ++d) {
        sum += kl_term(hi.mu[d], hi.var[d], hj.mu[d], hj.var[d]);
    }
    return 0.5 * sum;
}

KlGradients kl_energy_grad(const GaussianEmbedding& hi, const GaussianEmbedding& hj) {
    check_pair(hi, hj);
    const std::size_t n = hi.mu.size();
    KlGradients g{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                  std::vector<double>(n)};
    for (std::size_t d = 0; d < n; ++d) {
        const double vi = hi.var[d];
        const double vj = hj.var[d];
        const double diff = hi.mu[d] - hj.mu[d];
        g.mu_i[d] = diff / vi;
        g.mu_j[d] = -g.mu_i[d];
        g.var_i[d] = 0.5 * (1.0 / vi - vj / (vi * vi) - diff * diff / (vi * vi));
        g.var_j[d] = 0.5 * (1.0 / vi - 1.0 / vj);
    }
    return g;
}

double kl_energy_restricted(const GaussianEmbedding& hi, const GaussianEmbedding& hj,
                            std::span<const int> kept_dims) {
    check_pair(hi, hj);
    if (kept_dims.empty()) throw std::domain_error("kept_dims must be non-empty");
    double sum = 0.0;
    for (int d : kept_dims) {
        if (d < 0 || d >= hi.dim()) throw std::invalid_argument("kept dimension out of range");
        sum += kl_term(hi.mu[d], hi.var[d], hj.mu[d], hj.var[d]);
    }
    return 0.5 * sum;
}

} // namespace g2g
