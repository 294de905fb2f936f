#include "vmp/variational/powered_gaussian.hpp"

namespace vmp {

GaussianDist powered_gaussian_posterior(const std::vector<Vector>& data,
                                        const GaussianDist& prior, const Matrix& obs_cov,
                                        int power) {
    if (data.empty()) throw EmptyGroup("powered_gaussian_posterior: empty data group");
    if (power < 1) throw Error("powered_gaussian_posterior: power must be >= 1");
    const int d = prior.dim();
    for (const Vector& x : data)
        if (x.size() != d)
            throw DimensionMismatch("powered_gaussian_posterior: datum dimension mismatch");
    require_symmetric(obs_cov, "powered_gaussian_posterior");
    if (obs_cov.rows() != d)
        throw DimensionMismatch("powered_gaussian_posterior: obs_cov dimension mismatch");

    Matrix prior_prec, obs_prec;
    try {
        prior_prec = inverse_spd(prior.cov());
        obs_prec = inverse_spd(obs_cov);
    } catch (const NotPositiveDefinite&) {
        throw SingularCovariance("powered_gaussian_posterior: singular covariance input");
    }

    Vector sum_x = Vector::Zero(d);
    for (const Vector& x : data) sum_x += x;

    const double scale = static_cast<double>(power);
    const Matrix post_prec = prior_prec + scale * data.size() * obs_prec;
    const Matrix post_cov = inverse_spd(post_prec);
    const Vector post_mean = post_cov * (prior_prec * prior.mean() + scale * (obs_prec * sum_x));
    return GaussianDist(post_mean, post_cov);
}

}  // namespace vmp
