#include "vmp/variational/svi_gaussian.hpp"

#include <cmath>

#include "vmp/rng.hpp"

namespace vmp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

/// Packs (mu, log-diagonal of C, strict lower triangle of C) into one vector.
struct Packing {
    int d;

    [[nodiscard]] int size() const { return d + d + d * (d - 1) / 2; }

    void unpack(const Vector& p, Vector& mu, Matrix& chol) const {
        mu = p.head(d);
        chol = Matrix::Zero(d, d);
        for (int i = 0; i < d; ++i) chol(i, i) = std::exp(p[d + i]);
        int k = 2 * d;
        for (int i = 1; i < d; ++i)
            for (int j = 0; j < i; ++j) chol(i, j) = p[k++];
    }

    /// Chain rule from raw-C gradients into packed coordinates.
    [[nodiscard]] Vector pack_gradient(const Vector& g_mu, const Matrix& g_chol,
                                       const Matrix& chol) const {
        Vector g(size());
        g.head(d) = g_mu;
        for (int i = 0; i < d; ++i) g[d + i] = g_chol(i, i) * chol(i, i);
        int k = 2 * d;
        for (int i = 1; i < d; ++i)
            for (int j = 0; j < i; ++j) g[k++] = g_chol(i, j);
        return g;
    }
};

}  // namespace

SviGaussianModel::SviGaussianModel(std::vector<Vector> data, GaussianDist prior, Matrix obs_cov,
                                   int power)
    : data_(std::move(data)), prior_(std::move(prior)), power_(static_cast<double>(power)) {
    if (data_.empty()) throw EmptyGroup("svi_full_gaussian: empty data group");
    if (power < 1) throw Error("svi_full_gaussian: power must be >= 1");
    const int d = prior_.dim();
    for (const Vector& x : data_)
        if (x.size() != d) throw DimensionMismatch("svi_full_gaussian: datum dimension mismatch");
    require_symmetric(obs_cov, "svi_full_gaussian");
    try {
        obs_prec_ = inverse_spd(obs_cov);
        prior_prec_ = inverse_spd(prior_.cov());
    } catch (const NotPositiveDefinite&) {
        throw SingularCovariance("svi_full_gaussian: singular covariance input");
    }
    obs_logdet_ = log_det_spd(obs_cov);
    prior_logdet_ = log_det_spd(prior_.cov());
}

double SviGaussianModel::elbo(const Vector& mu, const Matrix& chol,
                              const std::vector<Vector>& eps) const {
    const int d = dim();
    const double n = static_cast<double>(data_.size());
    double acc = 0.0;
    for (const Vector& e : eps) {
        const Vector theta = mu + chol * e;
        double loglik = -0.5 * n * (d * kLog2Pi + obs_logdet_);
        for (const Vector& x : data_) {
            const Vector diff = x - theta;
            loglik -= 0.5 * diff.dot(obs_prec_ * diff);
        }
        const Vector pdiff = theta - prior_.mean();
        const double logprior =
            -0.5 * (d * kLog2Pi + prior_logdet_ + pdiff.dot(prior_prec_ * pdiff));
        acc += power_ * loglik + logprior;
    }
    acc /= static_cast<double>(eps.size());
    double entropy = 0.5 * d * (kLog2Pi + 1.0);
    for (int i = 0; i < d; ++i) entropy += std::log(chol(i, i));
    return acc + entropy;
}

void SviGaussianModel::gradient(const Vector& mu, const Matrix& chol,
                                const std::vector<Vector>& eps, Vector& g_mu,
                                Matrix& g_chol) const {
    const int d = dim();
    Vector sum_x = Vector::Zero(d);
    for (const Vector& x : data_) sum_x += x;
    g_mu = Vector::Zero(d);
    g_chol = Matrix::Zero(d, d);
    for (const Vector& e : eps) {
        const Vector theta = mu + chol * e;
        const Vector g_theta = power_ * (obs_prec_ * (sum_x - data_.size() * theta)) +
                               prior_prec_ * (prior_.mean() - theta);
        g_mu += g_theta;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) g_chol(i, j) += g_theta[i] * e[j];
    }
    g_mu /= static_cast<double>(eps.size());
    g_chol /= static_cast<double>(eps.size());
    for (int i = 0; i < d; ++i) g_chol(i, i) += 1.0 / chol(i, i);
}

SviResult svi_full_gaussian(const std::vector<Vector>& data, const GaussianDist& prior,
                            const Matrix& obs_cov, int power, const SviOptions& options,
                            std::uint64_t seed) {
    SviGaussianModel model(data, prior, obs_cov, power);
    const int d = model.dim();
    const Packing packing{d};

    Vector params = Vector::Zero(packing.size());
    params.head(d) = prior.mean();
    // Start the scale near the crude 1/(power n) posterior width.
    const double init_var = 1.0 / (1.0 + static_cast<double>(power) * data.size());
    for (int i = 0; i < d; ++i) params[d + i] = 0.5 * std::log(init_var);

    auto eng = make_engine(derive_seed(seed, 0x5717));
    std::normal_distribution<double> nd(0.0, 1.0);

    Vector adam_m = Vector::Zero(packing.size());
    Vector adam_v = Vector::Zero(packing.size());
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    SviResult result{GaussianDist(prior.mean(), prior.cov()), {}, 0};
    int decreasing_run = 0;
    double last_checkpoint = -std::numeric_limits<double>::infinity();
    bool have_checkpoint = false;

    Vector mu;
    Matrix chol;
    std::vector<Vector> eps(options.mc_samples);
    const int tail_start = options.steps - options.steps / std::max(options.average_tail_denom, 1);
    Vector tail_sum = Vector::Zero(packing.size());
    Matrix tail_chol_sum = Matrix::Zero(d, d);
    int tail_count = 0;

    for (int step = 0; step < options.steps; ++step) {
        for (auto& e : eps) {
            e.resize(d);
            for (int i = 0; i < d; ++i) e[i] = nd(eng);
        }
        packing.unpack(params, mu, chol);

        Vector g_mu;
        Matrix g_chol;
        model.gradient(mu, chol, eps, g_mu, g_chol);
        const Vector grad = packing.pack_gradient(g_mu, g_chol, chol);

        const double lr = options.learning_rate / (1.0 + step / options.decay_steps);
        adam_m = beta1 * adam_m + (1.0 - beta1) * grad;
        adam_v = beta2 * adam_v.array().matrix() +
                 (1.0 - beta2) * grad.array().square().matrix();
        const double bc1 = 1.0 - std::pow(beta1, step + 1);
        const double bc2 = 1.0 - std::pow(beta2, step + 1);
        for (int i = 0; i < packing.size(); ++i) {
            const double mhat = adam_m[i] / bc1;
            const double vhat = adam_v[i] / bc2;
            params[i] += lr * mhat / (std::sqrt(vhat) + adam_eps);
        }

        if (step >= tail_start) {
            packing.unpack(params, mu, chol);
            tail_sum.head(d) += mu;
            tail_chol_sum += chol;
            ++tail_count;
        }

        if ((step + 1) % options.checkpoint_every == 0) {
            packing.unpack(params, mu, chol);
            const double value = model.elbo(mu, chol, eps);
            result.elbo_trace.push_back(value);
            if (have_checkpoint && value < last_checkpoint) {
                if (++decreasing_run >= 100)
                    throw Diverged("svi_full_gaussian: ELBO decreased over 100 checkpoints");
            } else {
                decreasing_run = 0;
            }
            last_checkpoint = value;
            have_checkpoint = true;
        }
        ++result.steps;
    }

    Vector mu_bar = tail_sum.head(d) / std::max(tail_count, 1);
    Matrix chol_bar = tail_chol_sum / std::max(tail_count, 1);
    if (tail_count == 0) {
        packing.unpack(params, mu_bar, chol_bar);
    }
    Matrix cov = chol_bar * chol_bar.transpose();
    result.posterior = GaussianDist(mu_bar, 0.5 * (cov + cov.transpose()));
    return result;
}

}  // namespace vmp
