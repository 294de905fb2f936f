#include "vmp/variational/gmm_cavi.hpp"

#include <cmath>
#include <iostream>
#include <random>

#include "vmp/rng.hpp"
#include "vmp/special.hpp"

namespace vmp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kRespFloor = 1e-12;
constexpr double kRidge = 1e-10;

/// log of the Wishart normalization constant B(W, nu).
double log_wishart_b(const Matrix& w, double nu) {
    const int d = static_cast<int>(w.rows());
    double val = -0.5 * nu * log_det_spd(w) - 0.5 * nu * d * std::log(2.0) -
                 0.25 * d * (d - 1) * std::log(M_PI);
    for (int i = 1; i <= d; ++i) val -= std::lgamma(0.5 * (nu + 1 - i));
    return val;
}

double e_log_det_lambda(const Matrix& w, double nu) {
    const int d = static_cast<int>(w.rows());
    double val = d * std::log(2.0) + log_det_spd(w);
    for (int i = 1; i <= d; ++i) val += digamma(0.5 * (nu + 1 - i));
    return val;
}

/// Seeded k-means++ center selection followed by nearest-center assignment.
std::vector<int> kmeanspp_assignments(const Matrix& data, int k, std::mt19937_64& eng) {
    const int n = static_cast<int>(data.rows());
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<int> centers;
    centers.push_back(static_cast<int>(ud(eng) * n) % n);
    Eigen::VectorXd d2 = (data.rowwise() - data.row(centers[0])).rowwise().squaredNorm();
    while (static_cast<int>(centers.size()) < k) {
        const double total = d2.sum();
        int next = -1;
        if (total <= 0.0) {
            next = static_cast<int>(centers.size()) % n;
        } else {
            const double target = ud(eng) * total;
            double cum = 0.0;
            for (int i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum >= target) {
                    next = i;
                    break;
                }
            }
            if (next < 0) next = n - 1;
        }
        centers.push_back(next);
        Eigen::VectorXd dn = (data.rowwise() - data.row(next)).rowwise().squaredNorm();
        d2 = d2.cwiseMin(dn);
    }
    std::vector<int> assign(n, 0);
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const double dist = (data.row(i) - data.row(centers[c])).squaredNorm();
            if (dist < best) {
                best = dist;
                assign[i] = c;
            }
        }
    }
    return assign;
}

void clamp_rows(Matrix& resp) {
    for (Eigen::Index i = 0; i < resp.rows(); ++i) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < resp.cols(); ++k) {
            resp(i, k) = std::max(resp(i, k), kRespFloor);
            sum += resp(i, k);
        }
        resp.row(i) /= sum;
    }
}

Matrix invert_with_ridge(const Matrix& precursor) {
    try {
        return inverse_spd(precursor);
    } catch (const NotPositiveDefinite&) {
        Matrix fixed = precursor + kRidge * Matrix::Identity(precursor.rows(), precursor.cols());
        return inverse_spd(fixed);
    }
}

}  // namespace

GmmPriors default_gmm_priors(int dim) {
    GmmPriors p;
    p.alpha0 = 1.0;
    p.beta0 = 1.0;
    p.m0 = Vector::Zero(dim);
    p.w0 = Matrix::Identity(dim, dim);
    p.nu0 = dim + 2.0;
    return p;
}

GmmVariationalState cavi_gmm(const Matrix& data, int k, const GmmPriors& priors, int power,
                             int max_iters, double elbo_tol, std::uint64_t seed) {
    const int n = static_cast<int>(data.rows());
    const int d = static_cast<int>(data.cols());
    if (n == 0 || d == 0) throw EmptyGroup("cavi_gmm: empty data");
    if (k < 1 || k > n) throw Error("cavi_gmm: component count outside [1, n]");
    if (power < 1) throw Error("cavi_gmm: power must be >= 1");
    if (priors.alpha0 <= 0.0 || priors.beta0 <= 0.0 || priors.nu0 <= d - 1 ||
        priors.m0.size() != d || priors.w0.rows() != d)
        throw Error("cavi_gmm: invalid priors for data dimension");

    const double p_scale = static_cast<double>(power);
    const Matrix w0_inv = inverse_spd(priors.w0);

    GmmVariationalState st;
    st.power = power;
    st.resp = Matrix::Zero(n, k);
    auto eng = make_engine(derive_seed(seed, 0x63b3));
    const std::vector<int> assign = kmeanspp_assignments(data, k, eng);
    for (int i = 0; i < n; ++i) st.resp(i, assign[i]) = 1.0;
    clamp_rows(st.resp);

    st.alpha.resize(k);
    st.beta.resize(k);
    st.nu.resize(k);
    st.m.assign(k, Vector::Zero(d));
    st.w.assign(k, Matrix::Identity(d, d));
    st.counts.resize(k);

    std::vector<Vector> xbar(k, Vector::Zero(d));
    std::vector<Matrix> scatter(k, Matrix::Zero(d, d));
    Vector e_log_pi(k), e_log_lam(k);

    double prev_elbo = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        // Variational M-step from the current responsibilities.
        for (int c = 0; c < k; ++c) {
            const double soft = st.resp.col(c).sum();
            const double soft_safe = std::max(soft, 1e-300);
            Vector xb = Vector::Zero(d);
            for (int i = 0; i < n; ++i) xb += st.resp(i, c) * data.row(i).transpose();
            xb /= soft_safe;
            Matrix sc = Matrix::Zero(d, d);
            for (int i = 0; i < n; ++i) {
                const Vector diff = data.row(i).transpose() - xb;
                sc += st.resp(i, c) * (diff * diff.transpose());
            }
            sc /= soft_safe;
            xbar[c] = xb;
            scatter[c] = sc;

            const double nk = p_scale * soft;
            st.counts[c] = nk;
            st.alpha[c] = priors.alpha0 + nk;
            st.beta[c] = priors.beta0 + nk;
            st.nu[c] = priors.nu0 + nk;
            if (st.beta[c] <= 0.0 || st.nu[c] <= d - 1)
                throw DegenerateComponent("cavi_gmm: component " + std::to_string(c) +
                                          " left the valid parameter range");
            st.m[c] = (priors.beta0 * priors.m0 + nk * xb) / st.beta[c];
            const Vector dm = xb - priors.m0;
            Matrix w_inv = w0_inv + nk * sc +
                           (priors.beta0 * nk / (priors.beta0 + nk)) * (dm * dm.transpose());
            st.w[c] = invert_with_ridge(0.5 * (w_inv + w_inv.transpose()));
        }

        // Variational E-step.
        const double alpha_hat = st.alpha.sum();
        for (int c = 0; c < k; ++c) {
            e_log_pi[c] = digamma(st.alpha[c]) - digamma(alpha_hat);
            e_log_lam[c] = e_log_det_lambda(st.w[c], st.nu[c]);
        }
        for (int i = 0; i < n; ++i) {
            Vector logrho(k);
            for (int c = 0; c < k; ++c) {
                const Vector diff = data.row(i).transpose() - st.m[c];
                const double quad =
                    d / st.beta[c] + st.nu[c] * diff.dot(st.w[c] * diff);
                logrho[c] = e_log_pi[c] + 0.5 * e_log_lam[c] - 0.5 * d * kLog2Pi - 0.5 * quad;
            }
            const double mx = logrho.maxCoeff();
            double sum = 0.0;
            for (int c = 0; c < k; ++c) {
                logrho[c] = std::exp(logrho[c] - mx);
                sum += logrho[c];
            }
            st.resp.row(i) = (logrho / sum).transpose();
        }
        clamp_rows(st.resp);

        // ELBO of the replication-adjusted model at the new (resp, params).
        for (int c = 0; c < k; ++c) {
            const double soft = st.resp.col(c).sum();
            const double soft_safe = std::max(soft, 1e-300);
            Vector xb = Vector::Zero(d);
            for (int i = 0; i < n; ++i) xb += st.resp(i, c) * data.row(i).transpose();
            xb /= soft_safe;
            Matrix sc = Matrix::Zero(d, d);
            for (int i = 0; i < n; ++i) {
                const Vector diff = data.row(i).transpose() - xb;
                sc += st.resp(i, c) * (diff * diff.transpose());
            }
            sc /= soft_safe;
            xbar[c] = xb;
            scatter[c] = sc;
            st.counts[c] = p_scale * soft;
        }

        double elbo = 0.0;
        for (int c = 0; c < k; ++c) {
            const double nk = st.counts[c];
            const Vector dmk = xbar[c] - st.m[c];
            elbo += 0.5 * nk *
                    (e_log_lam[c] - d / st.beta[c] -
                     st.nu[c] * (scatter[c] * st.w[c]).trace() -
                     st.nu[c] * dmk.dot(st.w[c] * dmk) - d * kLog2Pi);
        }
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < k; ++c)
                elbo += p_scale * st.resp(i, c) * (e_log_pi[c] - std::log(st.resp(i, c)));
        elbo += std::lgamma(k * priors.alpha0) - k * std::lgamma(priors.alpha0);
        for (int c = 0; c < k; ++c) elbo += (priors.alpha0 - 1.0) * e_log_pi[c];
        elbo -= std::lgamma(alpha_hat);
        for (int c = 0; c < k; ++c)
            elbo += std::lgamma(st.alpha[c]) - (st.alpha[c] - 1.0) * e_log_pi[c];
        for (int c = 0; c < k; ++c) {
            const Vector dm0 = st.m[c] - priors.m0;
            elbo += 0.5 * (d * std::log(priors.beta0 / (2.0 * M_PI)) + e_log_lam[c] -
                           d * priors.beta0 / st.beta[c] -
                           priors.beta0 * st.nu[c] * dm0.dot(st.w[c] * dm0));
            elbo += 0.5 * (priors.nu0 - d - 1.0) * e_log_lam[c] -
                    0.5 * st.nu[c] * (w0_inv * st.w[c]).trace();
            const double entropy_wishart = -log_wishart_b(st.w[c], st.nu[c]) -
                                           0.5 * (st.nu[c] - d - 1.0) * e_log_lam[c] +
                                           0.5 * st.nu[c] * d;
            elbo -= 0.5 * e_log_lam[c] + 0.5 * d * std::log(st.beta[c] / (2.0 * M_PI)) -
                    0.5 * d - entropy_wishart;
        }
        elbo += static_cast<double>(k) * log_wishart_b(priors.w0, priors.nu0);

        st.elbo_trace.push_back(elbo);
        st.iterations = iter + 1;
        if (iter > 0 && elbo - prev_elbo < elbo_tol) break;
        prev_elbo = elbo;
    }
    return st;
}

GaussianMixture gmm_posterior_predictive(const GmmVariationalState& state) {
    const int k = static_cast<int>(state.alpha.size());
    if (k == 0) throw EmptyInput("gmm_posterior_predictive: unfitted state");
    const int d = static_cast<int>(state.m.front().size());
    const double alpha_hat = state.alpha.sum();
    std::vector<double> weights(k);
    std::vector<GaussianDist> comps;
    comps.reserve(k);
    for (int c = 0; c < k; ++c) {
        weights[c] = state.alpha[c] / alpha_hat;
        const double dof = state.nu[c] + 1.0 - d;
        const Matrix l = (dof * state.beta[c] / (1.0 + state.beta[c])) * state.w[c];
        Matrix cov = inverse_spd(l);
        if (dof > 2.0) {
            cov *= dof / (dof - 2.0);
        } else {
            std::cerr << "gmm_posterior_predictive: component " << c
                      << " has dof <= 2; using raw scale matrix\n";
        }
        comps.emplace_back(state.m[c], 0.5 * (cov + cov.transpose()));
    }
    return GaussianMixture(std::move(weights), std::move(comps));
}

}  // namespace vmp
