#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "kspv/dynamics.hpp"
#include "kspv/kernels.hpp"
#include "kspv/rkhs_geometry.hpp"

namespace kspv {

/// Matrix representation of the projected Koopman operator on a dictionary.
/// basis_w holds the N×s dictionary coefficients; empty basis_w means the full
/// kernel-section dictionary (one section per data point, coefficients I).
struct KoopmanMatrix {
    Eigen::MatrixXd k;
    Eigen::MatrixXd basis_w;
    double lambda_reg = 0.0;

    Eigen::Index dim() const { return k.rows(); }
};

/// Eigenvalue with coefficients in two coordinate systems: over the producing
/// matrix's dictionary and expanded over the kernel sections (for pointwise
/// evaluation). Scaled so the maximum modulus over the dataset is 1.
struct EigenPair {
    std::complex<double> eigenvalue;
    Eigen::VectorXcd coefficients;
    Eigen::VectorXcd section_coefficients;
};

/// Full kernel EDMD matrix (K_XX + lambda I)⁻¹ K_TXX; advances section
/// coefficients one step of the dynamics.
KoopmanMatrix kedmd_matrix(const SnapshotData& data, const KernelSpec& kernel,
                           double lambda);

/// Projected operator in dictionary coordinates: K_S = M_V† M_cross, with the
/// pseudoinverse through eigenvalue truncation at `threshold`. Derivation from
/// the projection normal equations: f = Vα, M_V β = M_cross α.
KoopmanMatrix reduced_edmd_matrix(const GramTriple& gram, const Eigen::MatrixXd& basis_w,
                                  double threshold);

/// All eigenpairs sorted by |λ − 1| ascending, each normalized to unit max
/// modulus over the dataset.
std::vector<EigenPair> eigenpairs(const KoopmanMatrix& koopman, const SnapshotData& data,
                                  const KernelSpec& kernel);

/// Pointwise eigenfunction defect after `steps` applications of the dynamics:
/// out(i) = |φ(T^steps(x_i)) − λ^steps φ(x_i)|.
Eigen::VectorXd prediction_error_map(const EigenPair& pair, const DiscreteSystem& system,
                                     const SnapshotData& data, const KernelSpec& kernel,
                                     int steps);

} // namespace kspv
