#include "kspv/nystrom.hpp"

#include <cmath>
#include <utility>

#include "kspv/errors.hpp"

namespace kspv {

NystromModel nystrom_model_from_landmarks(Eigen::MatrixXd landmarks,
                                          const KernelSpec& kernel,
                                          double landmark_eig_threshold) {
    if (landmarks.cols() == 0) throw InvalidCount("landmark set is empty");
    if (!landmarks.allFinite()) throw NonFiniteInput("landmark states are not finite");

    NystromModel model;
    model.kernel = kernel;
    model.landmarks = std::move(landmarks);
    const Eigen::MatrixXd k_ll = gram(kernel, model.landmarks, model.landmarks);
    model.eig_l = truncated_eig_psd(k_ll, landmark_eig_threshold);
    return model;
}

NystromModel fit_landmarks(const SnapshotData& data, Eigen::Index landmark_count,
                           std::uint64_t seed, const KernelSpec& kernel,
                           double landmark_eig_threshold) {
    if (landmark_count < 1 || landmark_count > data.count()) {
        throw InvalidCount("landmark count " + std::to_string(landmark_count) +
                           " outside [1, " + std::to_string(data.count()) + "]");
    }
    std::vector<Eigen::Index> indices =
        sample_without_replacement(data.count(), landmark_count, seed);

    Eigen::MatrixXd landmarks(data.dim(), landmark_count);
    for (Eigen::Index j = 0; j < landmark_count; ++j) {
        landmarks.col(j) = data.x.col(indices[static_cast<std::size_t>(j)]);
    }

    NystromModel model =
        nystrom_model_from_landmarks(std::move(landmarks), kernel, landmark_eig_threshold);
    model.landmark_seed = seed;
    model.landmark_indices = std::move(indices);
    return model;
}

Eigen::VectorXd feature_map(const NystromModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.landmarks.rows()) {
        throw DimensionMismatch("state dimension " + std::to_string(x.size()) +
                                " does not match landmark dimension " +
                                std::to_string(model.landmarks.rows()));
    }
    Eigen::VectorXd k_l(model.landmark_count());
    for (Eigen::Index i = 0; i < model.landmark_count(); ++i) {
        k_l(i) = kernel_eval(model.kernel, model.landmarks.col(i), x);
    }
    return model.eig_l.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
           (model.eig_l.eigenvectors.transpose() * k_l);
}

Eigen::MatrixXd feature_matrix(const NystromModel& model, const Eigen::MatrixXd& states) {
    if (states.rows() != model.landmarks.rows()) {
        throw DimensionMismatch("state dimension " + std::to_string(states.rows()) +
                                " does not match landmark dimension " +
                                std::to_string(model.landmarks.rows()));
    }
    const Eigen::MatrixXd scaled_basis =
        model.eig_l.eigenvectors *
        model.eig_l.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal(); // D×d

    constexpr Eigen::Index block = 512;
    Eigen::MatrixXd psi(model.feature_dim(), states.cols());
    for (Eigen::Index start = 0; start < states.cols(); start += block) {
        const Eigen::Index len = std::min(block, states.cols() - start);
        const Eigen::MatrixXd k_lb =
            gram(model.kernel, model.landmarks, states.middleCols(start, len));
        psi.middleCols(start, len) = scaled_basis.transpose() * k_lb;
    }
    return psi;
}

NystromFeatures build_features(const NystromModel& model, const SnapshotData& data) {
    NystromFeatures f;
    f.psi_x = feature_matrix(model, data.x);
    f.psi_tx = feature_matrix(model, data.tx);
    return f;
}

double default_feature_lambda(const NystromFeatures& features, double lambda_rel) {
    const auto d = static_cast<double>(features.psi_x.rows());
    if (d == 0.0) throw EmptyDecomposition("feature map has dimension 0");
    return lambda_rel * features.psi_x.squaredNorm() / d;
}

double default_svd_threshold(const NystromModel& model, double c) {
    return c / std::sqrt(static_cast<double>(model.landmark_count()));
}

ImplicitQr implicit_factor_from_svd(const TruncatedSvd& svd) {
    ImplicitQr out;
    out.rank = svd.rank;
    out.r = svd.singular_values.asDiagonal() * svd.right_vectors.transpose();
    out.r_pinv = svd.right_vectors * svd.singular_values.cwiseInverse().asDiagonal();
    return out;
}

ApproxTargets target_matrices(const NystromFeatures& features,
                              const Eigen::MatrixXd& w_v, double lambda,
                              double tau_v, double tau_kv) {
    if (lambda <= 0.0) throw InvalidCount("Tikhonov lambda must be positive");
    if (w_v.rows() != features.psi_x.cols()) {
        throw DimensionMismatch("dictionary rows " + std::to_string(w_v.rows()) +
                                " do not match feature columns " +
                                std::to_string(features.psi_x.cols()));
    }

    ApproxTargets t;
    t.lambda = lambda;
    t.tau_v = tau_v;
    t.tau_kv = tau_kv;
    t.z_v = features.psi_x * w_v;

    // (Ψ(X)Ψ(X)ᵀ + λI) Z_KV = Ψ(X) Ψ(T(X))ᵀ Z_V, all products at most d×N.
    const Eigen::MatrixXd covariance = features.psi_x * features.psi_x.transpose();
    const Eigen::MatrixXd rhs = features.psi_x * (features.psi_tx.transpose() * t.z_v);
    t.z_kv = regularized_symmetric_solve(covariance, rhs, lambda);

    t.svd_v = truncated_svd(t.z_v, tau_v);
    t.svd_kv = truncated_svd(t.z_kv, tau_kv);
    t.factor_v = implicit_factor_from_svd(t.svd_v);
    t.factor_kv = implicit_factor_from_svd(t.svd_kv);
    return t;
}

PrincipalDecomposition approx_principal(const NystromFeatures& features,
                                        const Eigen::MatrixXd& w_v, double lambda,
                                        double tau_v, double tau_kv,
                                        double cosine_slack) {
    const ApproxTargets t = target_matrices(features, w_v, lambda, tau_v, tau_kv);
    const Eigen::MatrixXd z_tv = features.psi_tx * w_v;
    const Eigen::MatrixXd m_cross = z_tv.transpose() * t.z_v;
    return principal_from_factors(t.factor_v, t.factor_kv, m_cross, cosine_slack);
}

PrincipalDecomposition approx_principal(const NystromModel& model,
                                        const SnapshotData& data,
                                        const Eigen::MatrixXd& w_v, double lambda,
                                        double tau_v, double tau_kv,
                                        double cosine_slack) {
    return approx_principal(build_features(model, data), w_v, lambda, tau_v, tau_kv,
                            cosine_slack);
}

double orthonormality_residual(const ImplicitQr& factor, const Eigen::MatrixXd& exact_gram) {
    if (exact_gram.rows() != factor.r_pinv.rows()) {
        throw DimensionMismatch("Gram matrix size " + std::to_string(exact_gram.rows()) +
                                " does not match factor rows " +
                                std::to_string(factor.r_pinv.rows()));
    }
    Eigen::MatrixXd deviation =
        factor.r_pinv.transpose() * exact_gram * factor.r_pinv;
    deviation.diagonal().array() -= 1.0;
    return spectral_norm(deviation);
}

} // namespace kspv
