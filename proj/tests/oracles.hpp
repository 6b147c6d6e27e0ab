#pragma once

// Reference computations the tests trust instead of the library's own
// algebra: double-loop Gram sums, Euclidean principal angles on explicit
// coordinates, and brute-force sphere-grid cosine maximization. Each is
// deliberately naive so a bug in the optimized path cannot hide in both.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kspv/dynamics.hpp"
#include "kspv/kernels.hpp"

namespace kspv::testing {

/// Entry-by-entry cross-kernel matrix, no vectorized shortcuts.
inline Eigen::MatrixXd gram_reference(const KernelSpec& spec, const Eigen::MatrixXd& x,
                                      const Eigen::MatrixXd& y) {
    Eigen::MatrixXd out(x.cols(), y.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            out(i, j) = kernel_eval(spec, x.col(i), y.col(j));
        }
    }
    return out;
}

/// Principal angles between the column spans of two explicit coordinate
/// matrices, via Householder QR and an SVD of Q_aᵀQ_b. Ascending.
inline Eigen::VectorXd euclidean_angles(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qa(a), qb(b);
    const Eigen::MatrixXd q_a =
        qa.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd q_b =
        qb.householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.cols());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q_a.transpose() * q_b);
    const Eigen::Index k = svd.singularValues().size();
    Eigen::VectorXd angles(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        angles(i) = std::acos(std::clamp(svd.singularValues()(i), 0.0, 1.0));
    }
    return angles;
}

/// Brute-force top cosine: max |aᵀ G b| over unit vectors a, b walked on
/// angle grids of the given step. G must be 1x1 or 2x2.
inline double grid_top_cosine(const Eigen::MatrixXd& g, double step) {
    if (g.rows() == 1 && g.cols() == 1) return std::abs(g(0, 0));
    double best = 0.0;
    for (double t = 0.0; t < M_PI; t += step) {
        const Eigen::Vector2d a(std::cos(t), std::sin(t));
        for (double r = 0.0; r < M_PI; r += step) {
            const Eigen::Vector2d b(std::cos(r), std::sin(r));
            best = std::max(best, std::abs(a.dot(g * b)));
        }
    }
    return best;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

/// Nearest-rank 95th percentile, matching the CLI summary convention.
inline double percentile_95(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::ptrdiff_t>(
                          std::ceil(0.95 * static_cast<double>(v.size()))) - 1;
    return v[static_cast<std::size_t>(std::max<std::ptrdiff_t>(rank, 0))];
}

/// N×s selection dictionary: column j is the indicator of a sampled center.
inline Eigen::MatrixXd center_dictionary(Eigen::Index n, Eigen::Index s,
                                         std::uint64_t seed) {
    const std::vector<Eigen::Index> centers = sample_without_replacement(n, s, seed);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, s);
    for (Eigen::Index j = 0; j < s; ++j) w(centers[j], j) = 1.0;
    return w;
}

/// Dense dictionary with entries uniform in [-1, 1].
inline Eigen::MatrixXd random_dictionary(Eigen::Index n, Eigen::Index s,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd w(n, s);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < s; ++j) {
            w(i, j) = 2.0 * uniform_unit(rng) - 1.0;
        }
    }
    return w;
}

inline Eigen::MatrixXd square_box(double lo, double hi, Eigen::Index dim = 2) {
    Eigen::MatrixXd box(dim, 2);
    for (Eigen::Index i = 0; i < dim; ++i) {
        box(i, 0) = lo;
        box(i, 1) = hi;
    }
    return box;
}

/// Seeded dense matrix with entries uniform in [-1, 1] (system matrices,
/// synthetic operators).
inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = 2.0 * uniform_unit(rng) - 1.0;
        }
    }
    return m;
}

} // namespace kspv::testing
