#pragma once

#include <utility>
#include <vector>

#include "vmp/distributions.hpp"
#include "vmp/median/report.hpp"

namespace vmp {

/// Geometric median of Gaussians: the mean is the coordinatewise median of
/// the input means and the covariance is the limit of the fixed-point map
///   S <- sum_j (1/m) (S^{1/2} Sigma_j S^{1/2})^{1/2},
/// started from `s0` (default: the coordinatewise median of the input
/// covariance diagonals, placed on a diagonal matrix). Stops after `iters`
/// steps or once ||S_{n+1} - S_n||_F <= 1e-10 ||S_n||_F. The report carries
/// W2 distances from the result to each input and uniform weights.
[[nodiscard]] MedianReport<GaussianDist> gaussian_geometric_median(
    const std::vector<GaussianDist>& set, int iters = 100, const Matrix* s0 = nullptr);

/// Aggregation cost of one component tuple (one Gaussian per input mixture):
/// the tuple's geometric median M and cost (1/m) sum_i W2(Q_i, M)^2.
[[nodiscard]] std::pair<double, GaussianDist> gmm_w2_gaussian_median_cost(
    const std::vector<GaussianDist>& tuple);

/// Geometric median of Gaussian mixtures via multi-marginal optimal
/// transport: builds the K_1 x ... x K_m cost tensor of tuple aggregation
/// costs, solves the linear program over couplings whose j-th marginal is
/// the j-th mixture's weight vector, and mixes the tuple medians of every
/// tuple carrying coupling mass above 1e-12. Throws TensorTooLarge when the
/// tensor would exceed 10^6 entries.
[[nodiscard]] MedianReport<GaussianMixture> gmm_median(const std::vector<GaussianMixture>& set);

/// Mixture 2-Wasserstein distance: optimal transport between the component
/// weight vectors under squared Gaussian W2 component costs, square-rooted.
[[nodiscard]] double mw2_gaussian_mixture(const GaussianMixture& a, const GaussianMixture& b);

/// Divides every covariance by sqrt(m), leaving means and weights unchanged.
[[nodiscard]] GaussianDist covariance_rescale(const GaussianDist& g, int m);
[[nodiscard]] GaussianMixture covariance_rescale(const GaussianMixture& g, int m);

}  // namespace vmp
