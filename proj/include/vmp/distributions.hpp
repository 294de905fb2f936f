#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "vmp/linalg.hpp"

namespace vmp {

/// Multivariate Gaussian with a symmetric positive semidefinite covariance.
class GaussianDist {
  public:
    GaussianDist(Vector mean, Matrix cov);

    [[nodiscard]] const Vector& mean() const { return mean_; }
    [[nodiscard]] const Matrix& cov() const { return cov_; }
    [[nodiscard]] int dim() const { return static_cast<int>(mean_.size()); }

  private:
    Vector mean_;
    Matrix cov_;
};

/// Finite Gaussian mixture; weights are renormalized on construction and must
/// be nonnegative with a positive sum.
class GaussianMixture {
  public:
    GaussianMixture(std::vector<double> weights, std::vector<GaussianDist> components);

    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] const std::vector<GaussianDist>& components() const { return components_; }
    [[nodiscard]] int size() const { return static_cast<int>(components_.size()); }
    [[nodiscard]] int dim() const { return components_.front().dim(); }

  private:
    std::vector<double> weights_;
    std::vector<GaussianDist> components_;
};

/// Weighted point cloud; weights are renormalized on construction.
class DiscreteMeasure {
  public:
    DiscreteMeasure(std::vector<Vector> atoms, std::vector<double> weights);

    /// Uniform weights over the given atoms.
    explicit DiscreteMeasure(std::vector<Vector> atoms);

    [[nodiscard]] const std::vector<Vector>& atoms() const { return atoms_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] int size() const { return static_cast<int>(atoms_.size()); }
    [[nodiscard]] int dim() const { return static_cast<int>(atoms_.front().size()); }

    /// Weighted mean of the atoms.
    [[nodiscard]] Vector mean() const;

  private:
    std::vector<Vector> atoms_;
    std::vector<double> weights_;
};

/// Gaussian RBF kernel k(x, y) = exp(-||x-y||^2 / (2 bw^2)).
class RbfKernel {
  public:
    explicit RbfKernel(double bandwidth);

    [[nodiscard]] double bandwidth() const { return bandwidth_; }
    [[nodiscard]] double operator()(const Vector& x, const Vector& y) const;

  private:
    double bandwidth_;
};

/// 2-Wasserstein distance between Gaussians (Bures metric on covariances):
/// W2^2 = ||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sb^{1/2} Sa Sb^{1/2})^{1/2}).
[[nodiscard]] double w2_gaussian(const GaussianDist& a, const GaussianDist& b);

/// RKHS (MMD) distance between two discrete measures under the given kernel.
[[nodiscard]] double mmd_distance(const DiscreteMeasure& p, const DiscreteMeasure& q,
                                  const RbfKernel& kernel);

/// Inner product of the kernel mean embeddings of two discrete measures.
[[nodiscard]] double mmd_inner(const DiscreteMeasure& p, const DiscreteMeasure& q,
                               const RbfKernel& kernel);

/// Median of pairwise distances between all pooled atoms; the customary
/// default bandwidth for the RBF kernel. Zero-distance pairs are excluded;
/// if every pair coincides the fallback is 1.
[[nodiscard]] double median_heuristic_bandwidth(const std::vector<DiscreteMeasure>& measures);

[[nodiscard]] double logpdf_gaussian(const GaussianDist& g, const Vector& x);
[[nodiscard]] double logpdf_mixture(const GaussianMixture& m, const Vector& x);

/// Draws `count` samples; deterministic for a fixed seed.
[[nodiscard]] std::vector<Vector> sample_gaussian(const GaussianDist& g, int count,
                                                  std::uint64_t seed);

/// Mixture samples along with the sampled component index of each draw.
[[nodiscard]] std::pair<std::vector<Vector>, std::vector<int>> sample_mixture(
    const GaussianMixture& m, int count, std::uint64_t seed);

}  // namespace vmp
