#pragma once

#include <cstdint>
#include <vector>

#include "vmp/linalg.hpp"

namespace vmp {

/// Mean-field variational state for latent Dirichlet allocation over a
/// document-term count matrix. lambda is K x V (topic-word Dirichlet),
/// gamma is M x K (document-topic Dirichlet), resp holds one V x K
/// responsibility block per document (rows of present words sum to 1).
struct LdaVariationalState {
    Matrix lambda;
    Matrix gamma;
    std::vector<Matrix> resp;
    std::vector<double> elbo_trace;
    int iterations = 0;
    int power = 1;
};

/// Coordinate-ascent variational inference for smoothed LDA with symmetric
/// priors alpha (document-topic) and beta (topic-word). The likelihood power
/// `power` multiplies only the global topic-word statistics, equivalent to
/// replicating every document that many times; per-document updates are
/// unscaled. Deterministic for a fixed seed. lambda_init overrides the
/// seeded initialization when provided (must be K x V, entries > 0).
[[nodiscard]] LdaVariationalState cavi_lda(const Eigen::MatrixXi& counts, int k, double alpha,
                                           double beta, int power, int max_iters, double tol,
                                           std::uint64_t seed,
                                           const Matrix* lambda_init = nullptr);

/// Posterior-mean topic-word distributions: row k is lambda_k normalized.
[[nodiscard]] Matrix lda_topic_means(const LdaVariationalState& state);

}  // namespace vmp
