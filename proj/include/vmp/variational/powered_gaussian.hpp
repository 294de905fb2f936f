#pragma once

#include <vector>

#include "vmp/distributions.hpp"

namespace vmp {

/// Conjugate posterior for a Gaussian mean with known observation covariance,
/// with the likelihood raised to the given power (each observation counted
/// `power` times). The prior is never scaled:
///   precision = prior_cov^{-1} + power * l * obs_cov^{-1}
///   mean = cov * (prior_cov^{-1} prior_mean + power * obs_cov^{-1} sum(x_i))
[[nodiscard]] GaussianDist powered_gaussian_posterior(const std::vector<Vector>& data,
                                                      const GaussianDist& prior,
                                                      const Matrix& obs_cov, int power);

}  // namespace vmp
