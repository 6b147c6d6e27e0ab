#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "kspv/errors.hpp"

namespace kspv {

/// Discrete-time system x+ = step(x) on R^n. The descriptor identifies the
/// map and its parameters for dataset metadata.
struct DiscreteSystem {
    int state_dim = 0;
    std::string descriptor;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> step;
};

/// Paired snapshot matrices: column i of `tx` is step applied to column i of
/// `x`. `domain_box` holds per-dimension [lo, hi] bounds (n×2).
struct SnapshotData {
    Eigen::MatrixXd x;
    Eigen::MatrixXd tx;
    std::uint64_t seed = 0;
    Eigen::MatrixXd domain_box;
    std::string system_descriptor;

    Eigen::Index count() const { return x.cols(); }
    Eigen::Index dim() const { return x.rows(); }
};

/// Explicit-Euler Duffing update:
///   x1+ = x1 + dt * x2
///   x2+ = x2 + dt * (x1 - 3 x1^3)
Eigen::Vector2d duffing_step(const Eigen::Vector2d& x, double dt);

DiscreteSystem duffing_system(double dt);
DiscreteSystem linear_system(const Eigen::MatrixXd& a);
DiscreteSystem identity_system(int n);

/// x mapped forward `steps` times; steps = 0 returns x unchanged.
Eigen::VectorXd advance(const DiscreteSystem& system, Eigen::VectorXd x, int steps);

/// Draws `count` i.i.d. uniform states from the box and pairs each with its
/// image under the system. Deterministic for a fixed seed; see rng notes below.
SnapshotData sample_uniform(const DiscreteSystem& system, Eigen::Index count,
                            const Eigen::MatrixXd& box, std::uint64_t seed);

/// Wraps externally chosen states (oracle constructions, tests).
SnapshotData snapshots_from_states(const DiscreteSystem& system,
                                   const Eigen::MatrixXd& x);

// --- rng -------------------------------------------------------------------
// All sampling uses std::mt19937_64 (bit-reproducible across platforms) with
// explicit output mappings instead of std::*_distribution, whose outputs are
// implementation-defined. Substreams are derived with splitmix64 so datasets,
// dictionary centers and landmarks draw from independent streams.

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double uniform_unit(std::mt19937_64& rng);

/// Unbiased uniform index in [0, bound) via rejection sampling.
Eigen::Index uniform_index(std::mt19937_64& rng, Eigen::Index bound);

/// First k entries of a Fisher-Yates shuffle of 0..n-1, in draw order.
std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k,
                                                     std::uint64_t seed);

} // namespace kspv
