#pragma once

#include <cstdint>
#include <vector>

#include "vmp/distributions.hpp"

namespace vmp {

/// Normal-Wishart mixture priors: Dirichlet(alpha0) on weights, and for each
/// component N(m0, (beta0 Lambda)^{-1}) Wishart(w0, nu0) on (mean, precision).
struct GmmPriors {
    double alpha0 = 1.0;
    double beta0 = 1.0;
    Vector m0;
    Matrix w0;
    double nu0 = 0.0;
};

/// Variational state of the mixture fit; resp is n x K, one row per datum.
struct GmmVariationalState {
    Matrix resp;
    Vector counts;  ///< power-scaled soft counts N_k
    Vector alpha;
    Vector beta;
    Vector nu;
    std::vector<Vector> m;
    std::vector<Matrix> w;
    std::vector<double> elbo_trace;
    int iterations = 0;
    int power = 1;
};

/// Coordinate-ascent variational fit of a Bayesian Gaussian mixture. The
/// likelihood statistics (soft counts, scatter) are scaled by `power`,
/// equivalent to replicating every observation that many times; priors are
/// left untouched. Deterministic for a fixed seed (k-means++ derived
/// responsibilities). Stops early once the ELBO gain drops below elbo_tol.
[[nodiscard]] GmmVariationalState cavi_gmm(const Matrix& data, int k, const GmmPriors& priors,
                                           int power, int max_iters, double elbo_tol,
                                           std::uint64_t seed);

/// Default vague priors for the given data dimension.
[[nodiscard]] GmmPriors default_gmm_priors(int dim);

/// Posterior predictive of a fitted mixture. The exact predictive components
/// are Student-t with precision L_k = ((nu_k + 1 - D) beta_k / (1 + beta_k)) W_k
/// and nu_k + 1 - D degrees of freedom; they are returned moment-matched as
/// Gaussians N(m_k, L_k^{-1} (nu_k+1-D)/(nu_k-1-D)). When the degrees of
/// freedom are <= 2 the raw L_k^{-1} is used and a warning is logged.
[[nodiscard]] GaussianMixture gmm_posterior_predictive(const GmmVariationalState& state);

}  // namespace vmp
