#include "kspv/koopman.hpp"

#include <algorithm>
#include <cmath>

#include "kspv/errors.hpp"
#include "kspv/linalg.hpp"

namespace kspv {

KoopmanMatrix kedmd_matrix(const SnapshotData& data, const KernelSpec& kernel,
                           double lambda) {
    if (lambda <= 0.0) throw ConfigError("kEDMD lambda must be positive");
    const Eigen::MatrixXd k_xx = gram(kernel, data.x, data.x);
    const Eigen::MatrixXd k_txx = gram(kernel, data.tx, data.x);

    KoopmanMatrix out;
    out.lambda_reg = lambda;
    // Section coefficients advance by beta = (K_XX + lambda I)^{-1} K_TXX alpha:
    // K_XX beta then matches the pushed-forward values K_TXX alpha at the data.
    out.k = regularized_symmetric_solve(k_xx, k_txx, lambda);
    return out;
}

KoopmanMatrix reduced_edmd_matrix(const GramTriple& gram, const Eigen::MatrixXd& basis_w,
                                  double threshold) {
    const TruncatedEig eig = truncated_eig_psd(gram.m_v, threshold);
    const Eigen::MatrixXd pinv_m_v = eig.eigenvectors *
                                     eig.eigenvalues.cwiseInverse().asDiagonal() *
                                     eig.eigenvectors.transpose();
    KoopmanMatrix out;
    out.basis_w = basis_w;
    out.k = pinv_m_v * gram.m_cross;
    return out;
}

std::vector<EigenPair> eigenpairs(const KoopmanMatrix& koopman, const SnapshotData& data,
                                  const KernelSpec& kernel) {
    if (koopman.k.rows() != koopman.k.cols()) {
        throw DimensionMismatch("Koopman matrix is not square");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(koopman.k);
    if (solver.info() != Eigen::Success) {
        throw EigenFailed("eigendecomposition of the Koopman matrix did not converge");
    }

    std::vector<EigenPair> pairs(static_cast<std::size_t>(koopman.k.rows()));
    for (Eigen::Index i = 0; i < koopman.k.rows(); ++i) {
        EigenPair& p = pairs[static_cast<std::size_t>(i)];
        p.eigenvalue = solver.eigenvalues()(i);
        p.coefficients = solver.eigenvectors().col(i);
        p.section_coefficients = koopman.basis_w.size() > 0
                                     ? Eigen::VectorXcd(koopman.basis_w * p.coefficients)
                                     : p.coefficients;

        const Eigen::VectorXcd values =
            evaluate_function_at(p.section_coefficients, data, kernel, data.x);
        const double peak = values.cwiseAbs().maxCoeff();
        if (peak > 0.0) {
            p.coefficients /= peak;
            p.section_coefficients /= peak;
        }
    }

    std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
        return std::abs(a.eigenvalue - 1.0) < std::abs(b.eigenvalue - 1.0);
    });
    return pairs;
}

Eigen::VectorXd prediction_error_map(const EigenPair& pair, const DiscreteSystem& system,
                                     const SnapshotData& data, const KernelSpec& kernel,
                                     int steps) {
    if (steps < 1) throw InvalidCount("prediction steps must be at least 1");

    Eigen::MatrixXd advanced(data.dim(), data.count());
    for (Eigen::Index j = 0; j < data.count(); ++j) {
        advanced.col(j) = advance(system, data.x.col(j), steps);
    }

    const Eigen::VectorXcd phi_now =
        evaluate_function_at(pair.section_coefficients, data, kernel, data.x);
    const Eigen::VectorXcd phi_later =
        evaluate_function_at(pair.section_coefficients, data, kernel, advanced);

    const std::complex<double> growth =
        std::pow(pair.eigenvalue, static_cast<double>(steps));
    return (phi_later - growth * phi_now).cwiseAbs();
}

} // namespace kspv
