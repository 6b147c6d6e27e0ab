#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "kspv/dynamics.hpp"
#include "kspv/kernels.hpp"
#include "kspv/linalg.hpp"
#include "kspv/rkhs_geometry.hpp"

namespace kspv {

// Landmark-based low-rank factorization of the kernel. No routine in this
// header forms an N×N matrix; peak auxiliary storage is O(N·D + D²).

struct NystromModel {
    Eigen::MatrixXd landmarks; // n×D states
    TruncatedEig eig_l;        // of K_LL, retained dimension d <= D
    KernelSpec kernel;
    std::uint64_t landmark_seed = 0;
    std::vector<Eigen::Index> landmark_indices; // into the source dataset, empty if landmarks were given directly

    Eigen::Index landmark_count() const { return landmarks.cols(); }
    Eigen::Index feature_dim() const { return eig_l.rank; }
};

/// Feature images Ψ(X), Ψ(T(X)) of one dataset, each d×N.
struct NystromFeatures {
    Eigen::MatrixXd psi_x;
    Eigen::MatrixXd psi_tx;
};

/// Feature-space coordinates of a dictionary and its regularized Koopman
/// image, plus the rank-truncated triangular-equivalent factors of both.
struct ApproxTargets {
    Eigen::MatrixXd z_v;  // d×s, Ψ(X) W_V
    Eigen::MatrixXd z_kv; // d×s, (Ψ(X)Ψ(X)ᵀ + λI)⁻¹ Ψ(X)Ψ(T(X))ᵀ Z_V
    TruncatedSvd svd_v;
    TruncatedSvd svd_kv;
    ImplicitQr factor_v;  // r = Σ Vᵀ of the truncated SVD, r_pinv = V Σ⁻¹
    ImplicitQr factor_kv;
    double lambda = 0.0;
    double tau_v = 0.0;
    double tau_kv = 0.0;
};

/// Draws D landmark states uniformly without replacement from the dataset and
/// eigendecomposes their kernel matrix, truncated at `landmark_eig_threshold`.
NystromModel fit_landmarks(const SnapshotData& data, Eigen::Index landmark_count,
                           std::uint64_t seed, const KernelSpec& kernel,
                           double landmark_eig_threshold = 1e-10);

/// Builds the model from explicitly given landmark states (tests use this to
/// pin landmarks = X without permutation).
NystromModel nystrom_model_from_landmarks(Eigen::MatrixXd landmarks,
                                          const KernelSpec& kernel,
                                          double landmark_eig_threshold = 1e-10);

/// ψ(x) = Λ_L^{-1/2} U_Lᵀ k_L(x); satisfies ψ(x)ᵀψ(y) ≈ k(x, y).
Eigen::VectorXd feature_map(const NystromModel& model, const Eigen::VectorXd& x);

/// Column j = ψ(x_j); evaluated in column blocks.
Eigen::MatrixXd feature_matrix(const NystromModel& model, const Eigen::MatrixXd& states);

NystromFeatures build_features(const NystromModel& model, const SnapshotData& data);

/// Default Tikhonov scale λ = lambda_rel · trace(Ψ(X)Ψ(X)ᵀ) / d.
double default_feature_lambda(const NystromFeatures& features, double lambda_rel = 1e-8);

/// Default singular-value cutoff c / sqrt(D). The constant trades rank
/// retention against noise amplification as the landmark count grows.
double default_svd_threshold(const NystromModel& model, double c = 1e-3);

/// Reinterprets a truncated SVD Z ≈ QR̃ (Q = U) as a triangular-equivalent
/// factor: R̃ = ΣVᵀ with pseudoinverse VΣ⁻¹.
ImplicitQr implicit_factor_from_svd(const TruncatedSvd& svd);

ApproxTargets target_matrices(const NystromFeatures& features,
                              const Eigen::MatrixXd& w_v, double lambda,
                              double tau_v, double tau_kv);

/// Approximate principal angles/vectors between span(V) and its Koopman
/// image, entirely in the d-dimensional feature space. The cross matrix is
/// assembled as (Ψ(T(X))W_V)ᵀ(Ψ(X)W_V).
PrincipalDecomposition approx_principal(const NystromFeatures& features,
                                        const Eigen::MatrixXd& w_v, double lambda,
                                        double tau_v, double tau_kv,
                                        double cosine_slack = 1e-3);
PrincipalDecomposition approx_principal(const NystromModel& model,
                                        const SnapshotData& data,
                                        const Eigen::MatrixXd& w_v, double lambda,
                                        double tau_v, double tau_kv,
                                        double cosine_slack = 1e-3);

/// ‖(R̃†)ᵀ M R̃† − I‖₂ against an exact Gram matrix M. Diagnostic only: the
/// caller pays for M (O(N²) kernel evaluations).
double orthonormality_residual(const ImplicitQr& factor, const Eigen::MatrixXd& exact_gram);

} // namespace kspv
