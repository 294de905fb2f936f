#include "vmp/variational/lda_cavi.hpp"

#include <cmath>
#include <random>

#include "vmp/rng.hpp"
#include "vmp/special.hpp"

namespace vmp {

namespace {

constexpr double kRespFloor = 1e-12;

}  // namespace

LdaVariationalState cavi_lda(const Eigen::MatrixXi& counts, int k, double alpha, double beta,
                             int power, int max_iters, double tol, std::uint64_t seed,
                             const Matrix* lambda_init) {
    const int m = static_cast<int>(counts.rows());
    const int v = static_cast<int>(counts.cols());
    if (m == 0 || v == 0 || counts.sum() == 0)
        throw EmptyCorpus("cavi_lda: corpus has no tokens");
    if (counts.minCoeff() < 0) throw Error("cavi_lda: negative token count");
    if (k < 1) throw Error("cavi_lda: topic count must be >= 1");
    if (alpha <= 0.0 || beta <= 0.0) throw Error("cavi_lda: priors must be positive");
    if (power < 1) throw Error("cavi_lda: power must be >= 1");

    const double p_scale = static_cast<double>(power);
    const double total = counts.sum();

    LdaVariationalState st;
    st.power = power;
    if (lambda_init != nullptr) {
        if (lambda_init->rows() != k || lambda_init->cols() != v)
            throw DimensionMismatch("cavi_lda: lambda_init must be K x V");
        if (lambda_init->minCoeff() <= 0.0)
            throw Error("cavi_lda: lambda_init entries must be positive");
        st.lambda = *lambda_init;
    } else {
        auto eng = make_engine(derive_seed(seed, 0x1da));
        std::uniform_real_distribution<double> ud(0.5, 1.5);
        st.lambda.resize(k, v);
        const double scale = p_scale * total / (k * v);
        for (int t = 0; t < k; ++t)
            for (int w = 0; w < v; ++w) st.lambda(t, w) = beta + scale * ud(eng);
    }
    st.gamma.resize(m, k);
    for (int d = 0; d < m; ++d)
        st.gamma.row(d).setConstant(alpha + counts.row(d).sum() / static_cast<double>(k));
    st.resp.assign(m, Matrix::Constant(v, k, 1.0 / k));

    Matrix e_log_topic(k, v);
    Matrix e_log_theta(m, k);

    double prev_elbo = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        for (int t = 0; t < k; ++t) {
            const double dig_sum = digamma(st.lambda.row(t).sum());
            for (int w = 0; w < v; ++w) e_log_topic(t, w) = digamma(st.lambda(t, w)) - dig_sum;
        }

        Matrix lambda_stat = Matrix::Zero(k, v);
        for (int d = 0; d < m; ++d) {
            const double dig_sum = digamma(st.gamma.row(d).sum());
            Eigen::RowVectorXd elt(k);
            for (int t = 0; t < k; ++t) elt[t] = digamma(st.gamma(d, t)) - dig_sum;

            Eigen::RowVectorXd gamma_stat = Eigen::RowVectorXd::Zero(k);
            for (int w = 0; w < v; ++w) {
                if (counts(d, w) == 0) continue;
                Eigen::RowVectorXd logphi = elt + e_log_topic.col(w).transpose();
                const double mx = logphi.maxCoeff();
                double sum = 0.0;
                for (int t = 0; t < k; ++t) {
                    logphi[t] = std::exp(logphi[t] - mx);
                    sum += logphi[t];
                }
                logphi /= sum;
                double clamp_sum = 0.0;
                for (int t = 0; t < k; ++t) {
                    logphi[t] = std::max(logphi[t], kRespFloor);
                    clamp_sum += logphi[t];
                }
                logphi /= clamp_sum;
                st.resp[d].row(w) = logphi;
                gamma_stat += counts(d, w) * logphi;
            }
            st.gamma.row(d) = gamma_stat.array() + alpha;
            for (int w = 0; w < v; ++w)
                if (counts(d, w) > 0)
                    lambda_stat.col(w) += counts(d, w) * st.resp[d].row(w).transpose();
        }
        st.lambda = (p_scale * lambda_stat).array() + beta;

        // Replication-adjusted ELBO at the end-of-sweep state.
        for (int t = 0; t < k; ++t) {
            const double dig_sum = digamma(st.lambda.row(t).sum());
            for (int w = 0; w < v; ++w) e_log_topic(t, w) = digamma(st.lambda(t, w)) - dig_sum;
        }
        for (int d = 0; d < m; ++d) {
            const double dig_sum = digamma(st.gamma.row(d).sum());
            for (int t = 0; t < k; ++t) e_log_theta(d, t) = digamma(st.gamma(d, t)) - dig_sum;
        }

        double elbo = 0.0;
        for (int t = 0; t < k; ++t) {
            elbo += std::lgamma(v * beta) - v * std::lgamma(beta);
            for (int w = 0; w < v; ++w) elbo += (beta - 1.0) * e_log_topic(t, w);
            elbo -= std::lgamma(st.lambda.row(t).sum());
            for (int w = 0; w < v; ++w)
                elbo += std::lgamma(st.lambda(t, w)) -
                        (st.lambda(t, w) - 1.0) * e_log_topic(t, w);
        }
        for (int d = 0; d < m; ++d) {
            double doc = std::lgamma(k * alpha) - k * std::lgamma(alpha);
            for (int t = 0; t < k; ++t) doc += (alpha - 1.0) * e_log_theta(d, t);
            doc -= std::lgamma(st.gamma.row(d).sum());
            for (int t = 0; t < k; ++t)
                doc += std::lgamma(st.gamma(d, t)) -
                       (st.gamma(d, t) - 1.0) * e_log_theta(d, t);
            for (int w = 0; w < v; ++w) {
                if (counts(d, w) == 0) continue;
                for (int t = 0; t < k; ++t) {
                    const double phi = st.resp[d](w, t);
                    doc += counts(d, w) * phi *
                           (e_log_theta(d, t) + e_log_topic(t, w) - std::log(phi));
                }
            }
            elbo += p_scale * doc;
        }

        st.elbo_trace.push_back(elbo);
        st.iterations = iter + 1;
        if (iter > 0 && elbo - prev_elbo < tol) break;
        prev_elbo = elbo;
    }
    return st;
}

Matrix lda_topic_means(const LdaVariationalState& state) {
    Matrix means = state.lambda;
    for (Eigen::Index t = 0; t < means.rows(); ++t) means.row(t) /= means.row(t).sum();
    return means;
}

}  // namespace vmp
