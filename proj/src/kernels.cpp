#include "kspv/kernels.hpp"

#include <cmath>

namespace kspv {

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "wendland") return KernelFamily::wendland;
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "linear") return KernelFamily::linear;
    throw ConfigError("unknown kernel family: " + name);
}

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::wendland: return "wendland";
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::linear: return "linear";
    }
    return "unknown";
}

void validate(const KernelSpec& spec) {
    if (spec.family != KernelFamily::linear && !(spec.shape > 0.0)) {
        throw ConfigError("kernel shape parameter must be positive");
    }
    if (spec.family == KernelFamily::wendland && spec.smoothness != 1 &&
        spec.smoothness != 2) {
        throw ConfigError("wendland smoothness must be 1 (C2) or 2 (C4)");
    }
}

namespace {

double wendland(double r, int smoothness) {
    if (r >= 1.0) {
        return 0.0;
    }
    const double u = 1.0 - r;
    if (smoothness == 1) {
        const double u2 = u * u;
        return u2 * u2 * (4.0 * r + 1.0);
    }
    const double u2 = u * u;
    const double u6 = u2 * u2 * u2;
    return u6 * (35.0 * r * r + 18.0 * r + 3.0) / 3.0;
}

double eval(const KernelSpec& spec, const Eigen::VectorXd& x,
            const Eigen::VectorXd& y) {
    switch (spec.family) {
        case KernelFamily::linear:
            return x.dot(y);
        case KernelFamily::gaussian:
            return std::exp(-(x - y).squaredNorm() / (2.0 * spec.shape * spec.shape));
        case KernelFamily::wendland:
            return wendland((x - y).norm() / spec.shape, spec.smoothness);
    }
    return 0.0;
}

} // namespace

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
    if (x.size() != y.size()) {
        throw DimensionMismatch("kernel_eval: state dimensions differ");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw NonFiniteInput("kernel_eval: non-finite state");
    }
    return eval(spec, x, y);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& y) {
    if (x.rows() != y.rows()) {
        throw DimensionMismatch("gram: state dimensions differ");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw NonFiniteInput("gram: non-finite state");
    }
    Eigen::MatrixXd values(x.cols(), y.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            values(i, j) = eval(spec, x.col(i), y.col(j));
        }
    }
    return values;
}

} // namespace kspv
