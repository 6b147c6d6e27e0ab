#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kspv/kernels.hpp"
#include "oracles.hpp"

using namespace kspv;
using kspv::testing::gram_reference;
using kspv::testing::random_matrix;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_CASE("wendland values match independently coded polynomials") {
    KernelSpec c2;
    c2.shape = 1.0;
    c2.smoothness = 1;
    KernelSpec c4;
    c4.shape = 1.0;
    c4.smoothness = 2;

    const Eigen::VectorXd origin = vec2(0.0, 0.0);
    for (double r : {0.0, 0.1, 0.25, 0.5, 0.75, 0.99}) {
        const Eigen::VectorXd y = vec2(r, 0.0);
        const double c2_expected = std::pow(1.0 - r, 4) * (4.0 * r + 1.0);
        const double c4_expected =
            std::pow(1.0 - r, 6) * (35.0 * r * r + 18.0 * r + 3.0) / 3.0;
        CHECK(kernel_eval(c2, origin, y) == doctest::Approx(c2_expected).epsilon(1e-14));
        CHECK(kernel_eval(c4, origin, y) == doctest::Approx(c4_expected).epsilon(1e-14));
    }
    CHECK(kernel_eval(c2, origin, origin) == 1.0);
    CHECK(kernel_eval(c4, origin, origin) == 1.0);
}

TEST_CASE("wendland support ends exactly at the radius") {
    KernelSpec spec;
    spec.shape = 0.5;
    const Eigen::VectorXd origin = vec2(0.0, 0.0);
    CHECK(kernel_eval(spec, origin, vec2(0.5, 0.0)) == 0.0);
    CHECK(kernel_eval(spec, origin, vec2(0.6, 0.0)) == 0.0);
    CHECK(kernel_eval(spec, origin, vec2(0.49, 0.0)) > 0.0);
    // the radius rescales distance, not just a cutoff
    KernelSpec wide = spec;
    wide.shape = 2.0;
    CHECK(kernel_eval(wide, origin, vec2(1.0, 0.0)) ==
          doctest::Approx(kernel_eval(spec, origin, vec2(0.25, 0.0))).epsilon(1e-14));
}

TEST_CASE("gaussian and linear kernels") {
    KernelSpec gauss;
    gauss.family = KernelFamily::gaussian;
    gauss.shape = 1.5;
    const Eigen::VectorXd x = vec2(0.3, -0.4);
    const Eigen::VectorXd y = vec2(-0.2, 1.0);
    const double d2 = (x - y).squaredNorm();
    CHECK(kernel_eval(gauss, x, y) ==
          doctest::Approx(std::exp(-d2 / (2.0 * 1.5 * 1.5))).epsilon(1e-14));
    CHECK(kernel_eval(gauss, x, x) == 1.0);

    KernelSpec lin;
    lin.family = KernelFamily::linear;
    CHECK(kernel_eval(lin, x, y) == doctest::Approx(x.dot(y)).epsilon(1e-15));
}

TEST_CASE("kernels are symmetric in their arguments") {
    const Eigen::MatrixXd pts = random_matrix(2, 6, 17);
    for (auto family : {KernelFamily::wendland, KernelFamily::gaussian, KernelFamily::linear}) {
        KernelSpec spec;
        spec.family = family;
        spec.shape = 1.3;
        for (Eigen::Index i = 0; i < pts.cols(); ++i) {
            for (Eigen::Index j = 0; j < pts.cols(); ++j) {
                CHECK(kernel_eval(spec, pts.col(i), pts.col(j)) ==
                      kernel_eval(spec, pts.col(j), pts.col(i)));
            }
        }
    }
}

TEST_CASE("gram follows the (i, j) = k(x_i, y_j) convention") {
    const Eigen::MatrixXd x = random_matrix(2, 5, 23);
    const Eigen::MatrixXd y = random_matrix(2, 3, 24);
    KernelSpec spec;
    spec.shape = 1.0;
    const Eigen::MatrixXd g = gram(spec, x, y);
    REQUIRE(g.rows() == 5);
    REQUIRE(g.cols() == 3);
    CHECK((g - gram_reference(spec, x, y)).norm() == 0.0);
    // entry check against a direct evaluation
    CHECK(g(4, 2) == kernel_eval(spec, x.col(4), y.col(2)));
}

TEST_CASE("kernel parameter validation") {
    KernelSpec spec;
    spec.shape = 0.0;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.shape = -1.0;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.shape = 1.0;
    spec.smoothness = 3;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.smoothness = 2;
    CHECK_NOTHROW(validate(spec));
    // the linear kernel ignores shape entirely
    KernelSpec lin;
    lin.family = KernelFamily::linear;
    lin.shape = -5.0;
    CHECK_NOTHROW(validate(lin));
}

TEST_CASE("kernel family names round-trip") {
    for (auto family : {KernelFamily::wendland, KernelFamily::gaussian, KernelFamily::linear}) {
        CHECK(kernel_family_from_string(to_string(family)) == family);
    }
    CHECK_THROWS_AS(kernel_family_from_string("cubic"), ConfigError);
}

TEST_CASE("non-finite and mismatched inputs are rejected") {
    KernelSpec spec;
    Eigen::VectorXd bad = vec2(1.0, std::nan(""));
    CHECK_THROWS_AS(kernel_eval(spec, bad, vec2(0.0, 0.0)), NonFiniteInput);
    Eigen::VectorXd three(3);
    three << 1, 2, 3;
    CHECK_THROWS_AS(kernel_eval(spec, three, vec2(0.0, 0.0)), DimensionMismatch);
    Eigen::MatrixXd bad_states = random_matrix(2, 3, 1);
    bad_states(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(gram(spec, bad_states, bad_states), NonFiniteInput);
}
