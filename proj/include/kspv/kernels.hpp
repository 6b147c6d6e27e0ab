#pragma once

#include <Eigen/Dense>

#include <string>

#include "kspv/errors.hpp"

namespace kspv {

enum class KernelFamily { wendland, gaussian, linear };

KernelFamily kernel_family_from_string(const std::string& name);
std::string to_string(KernelFamily family);

/// A symmetric positive-definite kernel: family plus shape parameters.
/// `shape` is the Wendland support radius or the Gaussian bandwidth and is
/// ignored by the linear kernel. `smoothness` selects the Wendland family:
/// 1 for the C2 function (1-r)^4 (4r+1), 2 for the C4 function
/// (1-r)^6 (35r^2+18r+3)/3, both normalized to 1 at r = 0.
struct KernelSpec {
    KernelFamily family = KernelFamily::wendland;
    double shape = 2.0;
    int smoothness = 2;
};

/// Throws ConfigError if the parameters are outside the supported ranges.
void validate(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

/// Cross-kernel matrix for column-state collections X (n×N) and Y (n×M):
/// entry (i, j) equals kernel_eval(spec, X.col(i), Y.col(j)). Entries are
/// filled sequentially so repeated assembly is bit-identical.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& y);

} // namespace kspv
