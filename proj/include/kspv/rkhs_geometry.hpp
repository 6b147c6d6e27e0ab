#pragma once

#include <Eigen/Dense>

#include <optional>

#include "kspv/dynamics.hpp"
#include "kspv/kernels.hpp"
#include "kspv/linalg.hpp"

namespace kspv {

// A dictionary of s observables is an N×s coefficient matrix W over the
// kernel sections anchored at the data states: function j is sum_i W(i,j) k(x_i, .).
//
// Kernel-matrix index convention used throughout: gram(A, B)(i, j) = k(a_i, b_j),
// so K_TXX = gram(tx, x) has entry (i, j) = k(T(x_i), x_j).

/// RKHS Gram matrices of a dictionary V and its image KV:
///   m_v     = Wᵥᵀ K_XX Wᵥ
///   m_kv    = Wₖᵥᵀ K_XX Wₖᵥ
///   m_cross = Wᵥᵀ K_TXX Wᵥ   (inner products ⟨v_i, Kv_j⟩)
struct GramTriple {
    Eigen::MatrixXd m_v;
    Eigen::MatrixXd m_kv;
    Eigen::MatrixXd m_cross;
};

/// Implicit QR of a function collection through its Gram matrix: R is the
/// rank×s triangular factor with RᵀR equal to the truncated Gram matrix, and
/// r_pinv its pseudoinverse, so that V·r_pinv is an orthonormal basis.
struct ImplicitQr {
    Eigen::MatrixXd r;
    Eigen::MatrixXd r_pinv;
    Eigen::Index rank = 0;
};

/// Principal angles and vectors between span(V) and span(KV). Angles are in
/// radians, sorted nondecreasing; cosines are the matching singular values
/// clamped into [0, 1]. Columns of a_v / a_kv hold the principal-vector
/// coefficients in the V / KV bases; only angle values and subspace spans are
/// contract-stable (individual vectors are non-unique under cosine ties).
struct PrincipalDecomposition {
    Eigen::VectorXd angles;
    Eigen::VectorXd cosines;
    Eigen::MatrixXd a_v;
    Eigen::MatrixXd a_kv;
    Eigen::Index rank_v = 0;
    Eigen::Index rank_kv = 0;
    /// Relative residual ‖K_XX W_KV − K_TXX W_V‖_F / ‖K_TXX W_V‖_F measuring
    /// how badly finite data violates the idealized containment of KV in the
    /// section span. Reported by the exact path only.
    std::optional<double> containment_residual;

    Eigen::Index pair_count() const { return angles.size(); }
};

struct ExactOptions {
    /// Tikhonov scale: lambda = lambda_rel * trace(K_XX) / N.
    double lambda_rel = 1e-10;
    /// Hard absolute eigenvalue cutoff for Gram-matrix truncation.
    double eig_threshold = 1e-8;
    /// Cosines above 1 + cosine_slack raise NumericalInconsistency.
    double cosine_slack = 1e-6;
};

/// Kernel matrices and the Tikhonov factorization for one dataset, reusable
/// across dictionaries (the pruning loop re-solves with changing W only).
struct ExactWorkspace {
    Eigen::MatrixXd k_xx;
    Eigen::MatrixXd k_txx;
    double lambda = 0.0;
    Eigen::LLT<Eigen::MatrixXd> cholesky; // of K_XX + lambda I
};

ExactWorkspace make_exact_workspace(const SnapshotData& data, const KernelSpec& kernel,
                                    double lambda_rel = ExactOptions{}.lambda_rel);

/// Coefficients of the Koopman image: solves (K_XX + lambda I) W_KV = K_TXX W_V.
Eigen::MatrixXd solve_koopman_image(const Eigen::MatrixXd& w_v,
                                    const Eigen::MatrixXd& k_xx,
                                    const Eigen::MatrixXd& k_txx, double lambda);
Eigen::MatrixXd solve_koopman_image(const ExactWorkspace& ws, const Eigen::MatrixXd& w_v);

GramTriple gram_triple(const Eigen::MatrixXd& w_v, const Eigen::MatrixXd& w_kv,
                       const Eigen::MatrixXd& k_xx, const Eigen::MatrixXd& k_txx);

/// Spectral-truncation QR: eigendecompose the Gram matrix above `threshold`,
/// QR the balanced factor Λ^{1/2}Ṽᵀ and assemble R† = Ṽ Λ^{-1/2} Q_B.
ImplicitQr implicit_qr(const Eigen::MatrixXd& gram_matrix, double threshold);

/// SVD of the cosine matrix (R_V†)ᵀ M_cross R_KV† shared by the exact and
/// approximate pipelines.
PrincipalDecomposition principal_from_factors(const ImplicitQr& qr_v,
                                              const ImplicitQr& qr_kv,
                                              const Eigen::MatrixXd& m_cross,
                                              double cosine_slack);

/// Exact principal angles/vectors between span(V) and its Koopman image:
/// kernel matrices, image solve, Gram triple, implicit QRs, cosine SVD.
PrincipalDecomposition exact_principal(const Eigen::MatrixXd& w_v,
                                       const SnapshotData& data,
                                       const KernelSpec& kernel,
                                       const ExactOptions& opts = {});
PrincipalDecomposition exact_principal(const ExactWorkspace& ws,
                                       const Eigen::MatrixXd& w_v,
                                       const ExactOptions& opts = {});

/// Evaluates f = Φ_X w at one query state via the reproducing property.
double evaluate_function(const Eigen::VectorXd& w, const SnapshotData& data,
                         const KernelSpec& kernel, const Eigen::VectorXd& x);

/// Same, batched over query columns; work is blocked so no N×M kernel matrix
/// is materialized for large query sets.
Eigen::VectorXd evaluate_function_at(const Eigen::VectorXd& w, const SnapshotData& data,
                                     const KernelSpec& kernel,
                                     const Eigen::MatrixXd& queries);
Eigen::VectorXcd evaluate_function_at(const Eigen::VectorXcd& w, const SnapshotData& data,
                                      const KernelSpec& kernel,
                                      const Eigen::MatrixXd& queries);

/// Invariance proximity δ = sin(largest principal angle).
double invariance_proximity(const PrincipalDecomposition& pd);

} // namespace kspv
