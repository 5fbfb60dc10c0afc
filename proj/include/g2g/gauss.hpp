#pragma once

#include <span>
#include <vector>

namespace g2g {

/// Diagonal Gaussian node embedding: mean and strictly positive per-dimension
/// variance, each of length L_half (half the competitor-equivalent budget L).
struct GaussianEmbedding {
    std::vector<double> mu;
    std::vector<double> var;

    int dim() const { return static_cast<int>(mu.size()); }
};

/// Energy of the ordered pair (i, j): the asymmetric KL divergence
/// D_KL(N_j || N_i). Note that node i's Gaussian is the second KL argument.
double kl_energy(const GaussianEmbedding& hi, const GaussianEmbedding& hj);

struct KlGradients {
    std::vector<double> mu_i, var_i, mu_j, var_j;
};

/// Analytic partials of kl_energy with respect to both embeddings.
KlGradients kl_energy_grad(const GaussianEmbedding& hi, const GaussianEmbedding& hj);

/// kl_energy restricted to the given dimensions (the -1 constant summed over
/// kept dimensions only); used by the dimension-pruning analysis.
double kl_energy_restricted(const GaussianEmbedding& hi, const GaussianEmbedding& hj,
                            std::span<const int> kept_dims);

} // namespace g2g
