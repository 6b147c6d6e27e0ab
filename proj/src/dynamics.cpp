#include "kspv/dynamics.hpp"

#include <limits>
#include <sstream>

namespace kspv {

Eigen::Vector2d duffing_step(const Eigen::Vector2d& x, double dt) {
    return {x(0) + dt * x(1), x(1) + dt * (x(0) - 3.0 * x(0) * x(0) * x(0))};
}

DiscreteSystem duffing_system(double dt) {
    DiscreteSystem sys;
    sys.state_dim = 2;
    std::ostringstream name;
    name << "duffing(dt=" << dt << ")";
    sys.descriptor = name.str();
    sys.step = [dt](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return duffing_step(Eigen::Vector2d(x), dt);
    };
    return sys;
}

DiscreteSystem linear_system(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("linear_system: matrix must be square");
    }
    if (!a.allFinite()) {
        throw NonFiniteInput("linear_system: matrix contains NaN or Inf");
    }
    DiscreteSystem sys;
    sys.state_dim = static_cast<int>(a.rows());
    sys.descriptor = "linear(n=" + std::to_string(a.rows()) + ")";
    sys.step = [a](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
    return sys;
}

DiscreteSystem identity_system(int n) {
    DiscreteSystem sys;
    sys.state_dim = n;
    sys.descriptor = "identity(n=" + std::to_string(n) + ")";
    sys.step = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x; };
    return sys;
}

Eigen::VectorXd advance(const DiscreteSystem& system, Eigen::VectorXd x, int steps) {
    if (steps < 0) {
        throw InvalidCount("advance: steps must be >= 0");
    }
    for (int i = 0; i < steps; ++i) {
        x = system.step(x);
    }
    return x;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over seed + stream increments
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::Index uniform_index(std::mt19937_64& rng, Eigen::Index bound) {
    if (bound <= 0) {
        throw InvalidCount("uniform_index: bound must be positive");
    }
    const std::uint64_t n = static_cast<std::uint64_t>(bound);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t draw = rng();
    while (draw >= limit) {
        draw = rng();
    }
    return static_cast<Eigen::Index>(draw % n);
}

std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k,
                                                     std::uint64_t seed) {
    if (k < 0 || k > n) {
        throw InvalidCount("sample_without_replacement: need 0 <= k <= n");
    }
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        pool[static_cast<std::size_t>(i)] = i;
    }
    std::mt19937_64 rng(seed);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index j = i + uniform_index(rng, n - i);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

SnapshotData sample_uniform(const DiscreteSystem& system, Eigen::Index count,
                            const Eigen::MatrixXd& box, std::uint64_t seed) {
    if (count < 1) {
        throw InvalidCount("sample_uniform: need at least one sample");
    }
    if (box.rows() != system.state_dim || box.cols() != 2) {
        throw InvalidBox("sample_uniform: box must be state_dim x 2");
    }
    for (Eigen::Index d = 0; d < box.rows(); ++d) {
        if (!(box(d, 0) <= box(d, 1)) || !box.row(d).allFinite()) {
            throw InvalidBox("sample_uniform: box bounds must satisfy lo <= hi");
        }
    }

    SnapshotData data;
    data.seed = seed;
    data.domain_box = box;
    data.system_descriptor = system.descriptor;
    data.x.resize(system.state_dim, count);
    data.tx.resize(system.state_dim, count);

    std::mt19937_64 rng(seed);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index d = 0; d < box.rows(); ++d) {
            data.x(d, i) = box(d, 0) + (box(d, 1) - box(d, 0)) * uniform_unit(rng);
        }
        data.tx.col(i) = system.step(data.x.col(i));
    }
    return data;
}

SnapshotData snapshots_from_states(const DiscreteSystem& system,
                                   const Eigen::MatrixXd& x) {
    if (x.rows() != system.state_dim) {
        throw DimensionMismatch("snapshots_from_states: state dimension mismatch");
    }
    SnapshotData data;
    data.system_descriptor = system.descriptor;
    data.x = x;
    data.tx.resize(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        data.tx.col(i) = system.step(x.col(i));
    }
    // box spans the actual samples; informational only for wrapped states
    data.domain_box.resize(x.rows(), 2);
    if (x.cols() > 0) {
        data.domain_box.col(0) = x.rowwise().minCoeff();
        data.domain_box.col(1) = x.rowwise().maxCoeff();
    }
    return data;
}

} // namespace kspv
