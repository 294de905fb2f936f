#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"
#include "vmp/variational/gmm_cavi.hpp"
#include "vmp/variational/powered_gaussian.hpp"
#include "vmp/variational/svi_gaussian.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace vmp;

namespace {

VectorXd vec1(double x) {
    VectorXd v(1);
    v << x;
    return v;
}

MatrixXd mat1(double x) {
    MatrixXd m(1, 1);
    m << x;
    return m;
}

std::vector<VectorXd> gaussian_data(double mu, double sd, int n, std::uint64_t seed) {
    auto eng = vmp::make_engine(seed);
    std::normal_distribution<double> nd(mu, sd);
    std::vector<VectorXd> out;
    for (int i = 0; i < n; ++i) out.push_back(vec1(nd(eng)));
    return out;
}

MatrixXd stack_rows(const std::vector<VectorXd>& xs) {
    MatrixXd m(xs.size(), xs.front().size());
    for (std::size_t i = 0; i < xs.size(); ++i) m.row(i) = xs[i].transpose();
    return m;
}

}  // namespace

TEST_CASE("powered_gaussian_posterior matches hand-computed conjugate update") {
    std::vector<VectorXd> data = {vec1(1.0), vec1(2.0), vec1(3.0)};
    GaussianDist prior(vec1(0.0), mat1(100.0));
    GaussianDist post = powered_gaussian_posterior(data, prior, mat1(1.0), 1);

    const double prec = 1.0 / 100.0 + 3.0;
    CHECK(post.cov()(0, 0) == doctest::Approx(1.0 / prec).epsilon(1e-12));
    CHECK(post.mean()[0] == doctest::Approx(6.0 / prec).epsilon(1e-12));
}

TEST_CASE("powered_gaussian_posterior power scaling deflates variance as 1/(m l)") {
    std::vector<VectorXd> data = gaussian_data(2.0, 1.0, 10, 5);
    GaussianDist prior(vec1(0.0), mat1(1e8));
    double base = 0.0;
    for (int m : {1, 2, 5, 10}) {
        GaussianDist post = powered_gaussian_posterior(data, prior, mat1(1.0), m);
        const double scaled = post.cov()(0, 0) * m * 10;
        if (m == 1) base = scaled;
        CHECK(scaled == doctest::Approx(base).epsilon(1e-6));
        CHECK(post.cov()(0, 0) == doctest::Approx(1.0 / (m * 10.0)).epsilon(1e-6));
    }
}

TEST_CASE("powered_gaussian_posterior respects prior extremes") {
    std::vector<VectorXd> data = gaussian_data(3.0, 1.0, 40, 6);
    double xbar = 0.0;
    for (const auto& x : data) xbar += x[0] / data.size();

    GaussianDist flat(vec1(-7.0), mat1(1e10));
    GaussianDist post_flat = powered_gaussian_posterior(data, flat, mat1(1.0), 1);
    CHECK(post_flat.mean()[0] == doctest::Approx(xbar).epsilon(1e-6));

    GaussianDist tight(vec1(-7.0), mat1(1e-10));
    GaussianDist post_tight = powered_gaussian_posterior(data, tight, mat1(1.0), 1);
    CHECK(post_tight.mean()[0] == doctest::Approx(-7.0).epsilon(1e-5));
}

TEST_CASE("powered_gaussian_posterior multivariate case matches direct formula") {
    auto eng = vmp::make_engine(7);
    std::vector<VectorXd> data;
    for (int i = 0; i < 12; ++i) data.push_back(testsupport::random_vector(eng, 2));
    MatrixXd obs_cov = testsupport::random_spd(eng, 2);
    GaussianDist prior(testsupport::random_vector(eng, 2), testsupport::random_spd(eng, 2));
    const int power = 4;

    GaussianDist post = powered_gaussian_posterior(data, prior, obs_cov, power);

    MatrixXd prior_prec = prior.cov().inverse();
    MatrixXd obs_prec = obs_cov.inverse();
    VectorXd sum_x = VectorXd::Zero(2);
    for (const auto& x : data) sum_x += x;
    MatrixXd want_prec = prior_prec + power * 12.0 * obs_prec;
    MatrixXd want_cov = want_prec.inverse();
    VectorXd want_mean = want_cov * (prior_prec * prior.mean() + power * obs_prec * sum_x);
    CHECK((post.cov() - want_cov).norm() <= 1e-10 * want_cov.norm());
    CHECK((post.mean() - want_mean).norm() <= 1e-10);
}

TEST_CASE("powered_gaussian_posterior error paths") {
    GaussianDist prior(vec1(0.0), mat1(1.0));
    CHECK_THROWS_AS((void)powered_gaussian_posterior({}, prior, mat1(1.0), 1), EmptyGroup);
    CHECK_THROWS_AS((void)powered_gaussian_posterior({vec1(0.0)}, prior, mat1(0.0), 1),
                    SingularCovariance);
    CHECK_THROWS_AS(
        (void)powered_gaussian_posterior({VectorXd::Zero(2)}, prior, mat1(1.0), 1),
        DimensionMismatch);
    CHECK_THROWS_AS((void)powered_gaussian_posterior({vec1(0.0)}, prior, mat1(1.0), 0), Error);
}

TEST_CASE("cavi_gmm with one component reduces to the conjugate Normal-Wishart update") {
    auto data_vecs = gaussian_data(1.7, 0.9, 50, 8);
    MatrixXd data = stack_rows(data_vecs);
    GmmPriors priors = default_gmm_priors(1);
    const int power = 3;
    GmmVariationalState st = cavi_gmm(data, 1, priors, power, 50, 1e-10, 4);

    const double n = 50.0, pn = power * n;
    double xbar = data.col(0).mean();
    double scatter = 0.0;
    for (int i = 0; i < 50; ++i) scatter += (data(i, 0) - xbar) * (data(i, 0) - xbar) / n;

    CHECK(st.alpha[0] == doctest::Approx(priors.alpha0 + pn).epsilon(1e-10));
    CHECK(st.beta[0] == doctest::Approx(priors.beta0 + pn).epsilon(1e-10));
    CHECK(st.nu[0] == doctest::Approx(priors.nu0 + pn).epsilon(1e-10));
    const double want_mean = (priors.beta0 * priors.m0[0] + pn * xbar) / (priors.beta0 + pn);
    CHECK(st.m[0][0] == doctest::Approx(want_mean).epsilon(1e-8));

    const double dm = xbar - priors.m0[0];
    const double want_w_inv =
        1.0 / priors.w0(0, 0) + pn * scatter + (priors.beta0 * pn / (priors.beta0 + pn)) * dm * dm;
    CHECK(1.0 / st.w[0](0, 0) == doctest::Approx(want_w_inv).epsilon(1e-8));
}

TEST_CASE("cavi_gmm separates two well-spread clusters") {
    auto eng = vmp::make_engine(9);
    std::normal_distribution<double> nd(0.0, 0.4);
    MatrixXd data(60, 1);
    for (int i = 0; i < 30; ++i) data(i, 0) = -5.0 + nd(eng);
    for (int i = 30; i < 60; ++i) data(i, 0) = 5.0 + nd(eng);

    GmmVariationalState st = cavi_gmm(data, 2, default_gmm_priors(1), 1, 200, 1e-9, 11);
    std::vector<double> means = {st.m[0][0], st.m[1][0]};
    std::sort(means.begin(), means.end());
    CHECK(means[0] == doctest::Approx(-5.0).epsilon(0.1));
    CHECK(means[1] == doctest::Approx(5.0).epsilon(0.1));
    CHECK(st.counts.sum() == doctest::Approx(60.0).epsilon(1e-9));
}

TEST_CASE("cavi_gmm ELBO trace is non-decreasing and seed-deterministic") {
    auto eng = vmp::make_engine(12);
    MatrixXd data(80, 2);
    for (int i = 0; i < 80; ++i)
        data.row(i) = testsupport::random_vector(eng, 2, 2.0).transpose() +
                      (i % 2 == 0 ? 3.0 : -3.0) * Eigen::RowVector2d::Ones();

    GmmVariationalState a = cavi_gmm(data, 3, default_gmm_priors(2), 2, 120, 1e-12, 21);
    for (std::size_t i = 1; i < a.elbo_trace.size(); ++i)
        CHECK(a.elbo_trace[i] >= a.elbo_trace[i - 1] - 1e-8);

    GmmVariationalState b = cavi_gmm(data, 3, default_gmm_priors(2), 2, 120, 1e-12, 21);
    REQUIRE(a.elbo_trace.size() == b.elbo_trace.size());
    for (std::size_t i = 0; i < a.elbo_trace.size(); ++i)
        CHECK(a.elbo_trace[i] == b.elbo_trace[i]);
    CHECK((a.resp - b.resp).norm() == 0.0);
}

TEST_CASE("cavi_gmm power scaling enters the posterior counts") {
    MatrixXd data = stack_rows(gaussian_data(0.0, 1.0, 20, 14));
    GmmPriors priors = default_gmm_priors(1);
    GmmVariationalState p1 = cavi_gmm(data, 1, priors, 1, 30, 1e-10, 3);
    GmmVariationalState p5 = cavi_gmm(data, 1, priors, 5, 30, 1e-10, 3);
    CHECK((p5.beta[0] - priors.beta0) ==
          doctest::Approx(5.0 * (p1.beta[0] - priors.beta0)).epsilon(1e-9));
    CHECK((p5.alpha[0] - priors.alpha0) ==
          doctest::Approx(5.0 * (p1.alpha[0] - priors.alpha0)).epsilon(1e-9));
}

TEST_CASE("cavi_gmm survives degenerate identical data without NaNs") {
    MatrixXd data = MatrixXd::Ones(20, 2) * 1.5;
    GmmVariationalState st = cavi_gmm(data, 2, default_gmm_priors(2), 1, 40, 1e-10, 5);
    CHECK(std::isfinite(st.elbo_trace.back()));
    for (int c = 0; c < 2; ++c) {
        CHECK(st.m[c].allFinite());
        CHECK(st.w[c].allFinite());
    }
    GaussianMixture pred = gmm_posterior_predictive(st);
    CHECK(std::isfinite(logpdf_mixture(pred, VectorXd::Ones(2))));
}

TEST_CASE("cavi_gmm input validation") {
    MatrixXd data = stack_rows(gaussian_data(0.0, 1.0, 5, 1));
    CHECK_THROWS_AS((void)cavi_gmm(MatrixXd(), 1, default_gmm_priors(1), 1, 10, 1e-8, 1),
                    EmptyGroup);
    CHECK_THROWS_AS((void)cavi_gmm(data, 6, default_gmm_priors(1), 1, 10, 1e-8, 1), Error);
    GmmPriors bad = default_gmm_priors(1);
    bad.nu0 = -1.0;
    CHECK_THROWS_AS((void)cavi_gmm(data, 1, bad, 1, 10, 1e-8, 1), Error);
}

TEST_CASE("gmm_posterior_predictive weights and plug-in precision") {
    GmmVariationalState st;
    st.alpha = VectorXd(2);
    st.alpha << 3.0, 1.0;
    st.beta = VectorXd(2);
    st.beta << 4.0, 4.0;
    st.nu = VectorXd(2);
    st.nu << 5.0, 5.0;
    st.m = {vec1(0.0), vec1(2.0)};
    st.w = {mat1(0.25), mat1(0.25)};

    GaussianMixture pred = gmm_posterior_predictive(st);
    CHECK(pred.weights()[0] == doctest::Approx(0.75));
    CHECK(pred.weights()[1] == doctest::Approx(0.25));
    // D=1, nu=5, beta=4, W=0.25: L = ((5+1-1) * 4 / 5) * 0.25 = 1, dof = 5,
    // so the moment-matched variance is (1/L) * dof / (dof - 2) = 5/3.
    CHECK(pred.components()[0].cov()(0, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("gmm_posterior_predictive falls back to the raw scale at low dof") {
    GmmVariationalState st;
    st.alpha = VectorXd::Ones(1);
    st.beta = VectorXd::Ones(1) * 3.0;
    st.nu = VectorXd::Ones(1) * 2.0;  // dof = nu + 1 - D = 2
    st.m = {vec1(0.0)};
    st.w = {mat1(0.5)};
    GaussianMixture pred = gmm_posterior_predictive(st);
    const double l = (2.0 * 3.0 / 4.0) * 0.5;
    CHECK(pred.components()[0].cov()(0, 0) == doctest::Approx(1.0 / l).epsilon(1e-12));
}

TEST_CASE("gmm predictive approaches the data law on a large single-component fit") {
    MatrixXd data = stack_rows(gaussian_data(0.0, 1.0, 500, 15));
    GmmVariationalState st = cavi_gmm(data, 1, default_gmm_priors(1), 1, 60, 1e-10, 2);
    GaussianMixture pred = gmm_posterior_predictive(st);
    CHECK(pred.components()[0].mean()[0] == doctest::Approx(0.0).epsilon(0.2));
    CHECK(pred.components()[0].cov()(0, 0) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("svi gradient matches central finite differences under common draws") {
    auto data = gaussian_data(1.0, 1.0, 25, 16);
    SviGaussianModel model(data, GaussianDist(vec1(0.0), mat1(10.0)), mat1(1.0), 2);

    for (int trial = 0; trial < 5; ++trial) {
        auto eng = vmp::make_engine(vmp::derive_seed(900, trial));
        std::normal_distribution<double> nd(0.0, 1.0);
        std::vector<VectorXd> eps(6);
        for (auto& e : eps) e = vec1(nd(eng));

        VectorXd mu = vec1(nd(eng));
        MatrixXd chol = mat1(0.3 + 0.2 * std::abs(nd(eng)));

        VectorXd g_mu;
        MatrixXd g_chol;
        model.gradient(mu, chol, eps, g_mu, g_chol);

        const double h = 1e-5;
        const double fd_mu = (model.elbo(vec1(mu[0] + h), chol, eps) -
                              model.elbo(vec1(mu[0] - h), chol, eps)) /
                             (2 * h);
        const double fd_c = (model.elbo(mu, mat1(chol(0, 0) + h), eps) -
                             model.elbo(mu, mat1(chol(0, 0) - h), eps)) /
                            (2 * h);
        CHECK(std::abs(g_mu[0] - fd_mu) <= 1e-3 * (1.0 + std::abs(fd_mu)));
        CHECK(std::abs(g_chol(0, 0) - fd_c) <= 1e-3 * (1.0 + std::abs(fd_c)));
    }
}

TEST_CASE("svi gradient matches finite differences in 2D including off-diagonals") {
    auto eng = vmp::make_engine(17);
    std::vector<VectorXd> data;
    for (int i = 0; i < 15; ++i) data.push_back(testsupport::random_vector(eng, 2));
    SviGaussianModel model(data, GaussianDist(VectorXd::Zero(2), 5.0 * MatrixXd::Identity(2, 2)),
                           testsupport::random_spd(eng, 2), 3);

    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<VectorXd> eps(4);
    for (auto& e : eps) e = testsupport::random_vector(eng, 2);
    VectorXd mu = testsupport::random_vector(eng, 2);
    MatrixXd chol(2, 2);
    chol << 0.5, 0.0, 0.2, 0.4;

    VectorXd g_mu;
    MatrixXd g_chol;
    model.gradient(mu, chol, eps, g_mu, g_chol);

    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
        VectorXd up = mu, dn = mu;
        up[i] += h;
        dn[i] -= h;
        const double fd = (model.elbo(up, chol, eps) - model.elbo(dn, chol, eps)) / (2 * h);
        CHECK(std::abs(g_mu[i] - fd) <= 1e-3 * (1.0 + std::abs(fd)));
    }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j <= i; ++j) {
            MatrixXd up = chol, dn = chol;
            up(i, j) += h;
            dn(i, j) -= h;
            const double fd = (model.elbo(mu, up, eps) - model.elbo(mu, dn, eps)) / (2 * h);
            CHECK(std::abs(g_chol(i, j) - fd) <= 1e-3 * (1.0 + std::abs(fd)));
        }
}

TEST_CASE("svi_full_gaussian matches the conjugate posterior") {
    auto data = gaussian_data(1.5, 1.0, 60, 18);
    GaussianDist prior(vec1(0.0), mat1(25.0));
    GaussianDist exact = powered_gaussian_posterior(data, prior, mat1(1.0), 1);

    SviResult fit = svi_full_gaussian(data, prior, mat1(1.0), 1, SviOptions{}, 19);
    CHECK((fit.posterior.mean() - exact.mean()).norm() <= 1e-2);
    CHECK((fit.posterior.cov() - exact.cov()).norm() <= 0.05 * exact.cov().norm());
    CHECK(!fit.elbo_trace.empty());
}

TEST_CASE("svi_full_gaussian doubling the power roughly halves the variance") {
    auto data = gaussian_data(0.5, 1.0, 40, 20);
    GaussianDist prior(vec1(0.0), mat1(100.0));
    SviResult p2 = svi_full_gaussian(data, prior, mat1(1.0), 2, SviOptions{}, 23);
    SviResult p4 = svi_full_gaussian(data, prior, mat1(1.0), 4, SviOptions{}, 23);
    const double ratio = p4.posterior.cov()(0, 0) / p2.posterior.cov()(0, 0);
    CHECK(ratio > 0.45);
    CHECK(ratio < 0.55);
}

TEST_CASE("svi_full_gaussian is deterministic and keeps the covariance PD") {
    auto eng = vmp::make_engine(24);
    std::vector<VectorXd> data;
    for (int i = 0; i < 30; ++i) {
        VectorXd x(2);
        x << eng() % 7 * 0.1, 2.0;  // second coordinate constant
        data.push_back(x);
    }
    GaussianDist prior(VectorXd::Zero(2), 50.0 * MatrixXd::Identity(2, 2));
    SviOptions opts;
    opts.steps = 1500;
    SviResult a = svi_full_gaussian(data, prior, MatrixXd::Identity(2, 2), 1, opts, 31);
    SviResult b = svi_full_gaussian(data, prior, MatrixXd::Identity(2, 2), 1, opts, 31);
    CHECK((a.posterior.mean() - b.posterior.mean()).norm() == 0.0);
    CHECK((a.posterior.cov() - b.posterior.cov()).norm() == 0.0);
    Eigen::LLT<MatrixXd> llt(a.posterior.cov());
    CHECK(llt.info() == Eigen::Success);
}
