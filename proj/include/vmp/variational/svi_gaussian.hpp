#pragma once

#include <cstdint>
#include <vector>

#include "vmp/distributions.hpp"

namespace vmp {

struct SviOptions {
    int steps = 4000;
    int mc_samples = 8;
    double learning_rate = 0.08;
    double decay_steps = 800.0;  ///< lr_t = learning_rate / (1 + t / decay_steps)
    int checkpoint_every = 10;   ///< ELBO recording cadence for the divergence guard
    int average_tail_denom = 4;  ///< final 1/denom of iterates are Polyak-averaged
};

/// Monte Carlo machinery for the Gaussian-mean model with known observation
/// covariance: q(theta) = N(mu, C C') with lower-triangular C. Exposed so the
/// reparameterized gradient can be validated against finite differences of
/// the same common-random-numbers estimate.
class SviGaussianModel {
  public:
    SviGaussianModel(std::vector<Vector> data, GaussianDist prior, Matrix obs_cov, int power);

    /// Stochastic ELBO estimate at fixed standard-normal draws eps:
    /// mean_s[ power * log p(X | theta_s) + log pi(theta_s) ] + entropy(q),
    /// theta_s = mu + C eps_s.
    [[nodiscard]] double elbo(const Vector& mu, const Matrix& chol,
                              const std::vector<Vector>& eps) const;

    /// Analytic gradient of elbo() with respect to mu and the lower triangle
    /// of C (diagonal in raw units), at the same fixed draws.
    void gradient(const Vector& mu, const Matrix& chol, const std::vector<Vector>& eps,
                  Vector& g_mu, Matrix& g_chol) const;

    [[nodiscard]] int dim() const { return static_cast<int>(prior_.mean().size()); }
    [[nodiscard]] const GaussianDist& prior() const { return prior_; }

  private:
    std::vector<Vector> data_;
    GaussianDist prior_;
    Matrix obs_prec_;
    Matrix prior_prec_;
    double obs_logdet_ = 0.0;
    double prior_logdet_ = 0.0;
    double power_ = 1.0;
};

struct SviResult {
    GaussianDist posterior;
    std::vector<double> elbo_trace;
    int steps = 0;
};

/// Full-covariance Gaussian variational fit by stochastic gradient ascent on
/// the reparameterized power-adjusted ELBO (Adam steps, decaying rate, tail
/// averaging). Throws Diverged when the recorded ELBO decreases over 100
/// consecutive checkpoints.
[[nodiscard]] SviResult svi_full_gaussian(const std::vector<Vector>& data,
                                          const GaussianDist& prior, const Matrix& obs_cov,
                                          int power, const SviOptions& options,
                                          std::uint64_t seed);

}  // namespace vmp
