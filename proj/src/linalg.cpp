#include "kspv/linalg.hpp"

#include <Eigen/SVD>

#include <string>

namespace kspv {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) {
        throw NonFiniteInput(std::string(what) + " contains NaN or Inf");
    }
}

} // namespace

TruncatedEig truncated_eig_psd(const Eigen::MatrixXd& m, double threshold) {
    require_finite(m, "truncated_eig_psd: input");
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("truncated_eig_psd: matrix must be square");
    }
    // Gram matrices accumulate asymmetric rounding; symmetrize before factorizing.
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw FactorizationFailed("truncated_eig_psd: eigensolver did not converge");
    }

    // Eigen sorts ascending; count the tail strictly above the threshold.
    const Eigen::VectorXd& values = eig.eigenvalues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = values.size() - 1; i >= 0 && values(i) > threshold; --i) {
        ++rank;
    }
    if (rank == 0) {
        throw AllTruncated("truncated_eig_psd: no eigenvalue above threshold " +
                           std::to_string(threshold));
    }

    TruncatedEig out;
    out.threshold_used = threshold;
    out.rank = rank;
    out.eigenvalues = values.tail(rank).reverse();
    out.eigenvectors = eig.eigenvectors().rightCols(rank).rowwise().reverse();
    return out;
}

TruncatedSvd truncated_svd(const Eigen::MatrixXd& z, double threshold) {
    require_finite(z, "truncated_svd: input");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();

    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > threshold) {
        ++rank;
    }
    if (rank == 0) {
        throw AllTruncated("truncated_svd: no singular value above threshold " +
                           std::to_string(threshold));
    }

    TruncatedSvd out;
    out.threshold_used = threshold;
    out.rank = rank;
    out.singular_values = sigma.head(rank);
    out.left_vectors = svd.matrixU().leftCols(rank);
    out.right_vectors = svd.matrixV().leftCols(rank);
    return out;
}

EconomyQr economy_qr(const Eigen::MatrixXd& b) {
    require_finite(b, "economy_qr: input");
    if (b.rows() > b.cols()) {
        throw DimensionMismatch("economy_qr: expected a wide matrix (rows <= cols)");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
    EconomyQr out;
    out.q = qr.householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.rows());
    out.r = qr.matrixQR().triangularView<Eigen::Upper>();
    return out;
}

Eigen::MatrixXd regularized_symmetric_solve(const Eigen::MatrixXd& m,
                                            const Eigen::MatrixXd& rhs,
                                            double lambda) {
    require_finite(m, "regularized_symmetric_solve: matrix");
    require_finite(rhs, "regularized_symmetric_solve: rhs");
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("regularized_symmetric_solve: matrix must be square");
    }
    if (m.rows() != rhs.rows()) {
        throw DimensionMismatch("regularized_symmetric_solve: rhs rows must match matrix");
    }
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("regularized_symmetric_solve: lambda must be positive");
    }

    Eigen::MatrixXd shifted = 0.5 * (m + m.transpose());
    shifted.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) {
        throw FactorizationFailed(
            "regularized_symmetric_solve: M + lambda I is not positive definite");
    }
    return llt.solve(rhs);
}

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    return m.jacobiSvd().singularValues()(0);
}

} // namespace kspv
