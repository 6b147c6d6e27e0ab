#pragma once

#include <Eigen/Dense>

#include "kspv/errors.hpp"

namespace kspv {

/// Truncated symmetric eigendecomposition M ≈ E diag(w) Eᵀ with every
/// retained eigenvalue strictly above the threshold, sorted descending.
struct TruncatedEig {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors; // one orthonormal column per retained eigenvalue
    double threshold_used = 0.0;
    Eigen::Index rank = 0;
};

/// Truncated SVD Z ≈ U diag(s) Vᵀ, singular values strictly above the
/// threshold, sorted descending.
struct TruncatedSvd {
    Eigen::MatrixXd left_vectors;
    Eigen::VectorXd singular_values;
    Eigen::MatrixXd right_vectors;
    double threshold_used = 0.0;
    Eigen::Index rank = 0;
};

struct EconomyQr {
    Eigen::MatrixXd q; // r×r orthogonal
    Eigen::MatrixXd r; // r×s upper triangular
};

/// Eigendecomposition of a symmetric PSD matrix, discarding eigenvalues
/// <= threshold. The input is symmetrized as (M + Mᵀ)/2 before factorizing.
/// Throws NonFiniteInput on NaN/Inf and AllTruncated when nothing survives.
TruncatedEig truncated_eig_psd(const Eigen::MatrixXd& m, double threshold);

/// SVD of an arbitrary matrix, discarding singular values <= threshold.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& z, double threshold);

/// Economy QR of a wide matrix B (r×s, r <= s): B = Q R with Q square
/// orthogonal and R upper triangular.
EconomyQr economy_qr(const Eigen::MatrixXd& b);

/// Solves (M + lambda I) X = RHS through a Cholesky factorization of the
/// symmetrized M. Throws FactorizationFailed when M + lambda I is not
/// numerically positive definite.
Eigen::MatrixXd regularized_symmetric_solve(const Eigen::MatrixXd& m,
                                            const Eigen::MatrixXd& rhs,
                                            double lambda);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& m);

} // namespace kspv
