#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kspv/rkhs_geometry.hpp"
#include "oracles.hpp"

using namespace kspv;
using kspv::testing::center_dictionary;
using kspv::testing::euclidean_angles;
using kspv::testing::gram_reference;
using kspv::testing::random_dictionary;
using kspv::testing::random_matrix;
using kspv::testing::square_box;

namespace {

SnapshotData duffing_data(Eigen::Index n, std::uint64_t seed, double dt = 0.01) {
    return sample_uniform(duffing_system(dt), n, square_box(-2.0, 2.0), seed);
}

KernelSpec wendland(double shape) {
    KernelSpec spec;
    spec.shape = shape;
    return spec;
}

} // namespace

TEST_CASE("make_exact_workspace assembles kernel matrices and the scaled lambda") {
    const SnapshotData data = duffing_data(25, 0);
    const KernelSpec kernel = wendland(1.0);
    const ExactWorkspace ws = make_exact_workspace(data, kernel, 1e-10);

    const Eigen::MatrixXd k_xx = gram_reference(kernel, data.x, data.x);
    const Eigen::MatrixXd k_txx = gram_reference(kernel, data.tx, data.x);
    CHECK((ws.k_xx - k_xx).norm() == 0.0);
    CHECK((ws.k_txx - k_txx).norm() == 0.0);
    CHECK(ws.lambda == doctest::Approx(1e-10 * k_xx.trace() / 25.0).epsilon(1e-14));
    CHECK((ws.k_xx - ws.k_xx.transpose()).norm() == 0.0);
}

TEST_CASE("solve_koopman_image satisfies its normal equations") {
    const SnapshotData data = duffing_data(30, 1);
    const KernelSpec kernel = wendland(1.0);
    const ExactWorkspace ws = make_exact_workspace(data, kernel, 1e-10);
    const Eigen::MatrixXd w = random_dictionary(30, 5, 2);

    const Eigen::MatrixXd w_kv = solve_koopman_image(ws, w);
    const Eigen::MatrixXd lhs =
        (ws.k_xx + ws.lambda * Eigen::MatrixXd::Identity(30, 30)) * w_kv;
    const Eigen::MatrixXd rhs = ws.k_txx * w;
    CHECK((lhs - rhs).norm() / rhs.norm() < 1e-10);

    // the matrix overload solves the same system
    const Eigen::MatrixXd w_kv2 = solve_koopman_image(w, ws.k_xx, ws.k_txx, ws.lambda);
    CHECK((w_kv - w_kv2).norm() / w_kv.norm() < 1e-12);
}

TEST_CASE("gram_triple matches double-loop kernel sums") {
    const SnapshotData data = duffing_data(12, 3);
    const KernelSpec kernel = wendland(1.5);
    const ExactWorkspace ws = make_exact_workspace(data, kernel, 1e-10);
    const Eigen::MatrixXd w = random_dictionary(12, 3, 4);
    const Eigen::MatrixXd w_kv = solve_koopman_image(ws, w);
    const GramTriple g = gram_triple(w, w_kv, ws.k_xx, ws.k_txx);

    // m_v(i,j) = sum_ab w(a,i) w(b,j) k(x_a, x_b)
    // m_cross(i,j) = sum_ab w(a,i) w(b,j) k(T(x_a), x_b)
    Eigen::MatrixXd m_v_ref = Eigen::MatrixXd::Zero(3, 3);
    Eigen::MatrixXd m_kv_ref = Eigen::MatrixXd::Zero(3, 3);
    Eigen::MatrixXd m_cross_ref = Eigen::MatrixXd::Zero(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            for (Eigen::Index a = 0; a < 12; ++a) {
                for (Eigen::Index b = 0; b < 12; ++b) {
                    const double k_ab = kernel_eval(kernel, data.x.col(a), data.x.col(b));
                    const double kt_ab = kernel_eval(kernel, data.tx.col(a), data.x.col(b));
                    m_v_ref(i, j) += w(a, i) * k_ab * w(b, j);
                    m_kv_ref(i, j) += w_kv(a, i) * k_ab * w_kv(b, j);
                    m_cross_ref(i, j) += w(a, i) * kt_ab * w(b, j);
                }
            }
        }
    }
    CHECK((g.m_v - m_v_ref).norm() < 1e-11);
    CHECK((g.m_kv - m_kv_ref).norm() < 1e-11);
    CHECK((g.m_cross - m_cross_ref).norm() < 1e-11);
    CHECK((g.m_v - g.m_v.transpose()).norm() == 0.0);
    CHECK((g.m_kv - g.m_kv.transpose()).norm() == 0.0);
}

TEST_CASE("implicit_qr whitens the Gram matrix it factors") {
    const Eigen::MatrixXd b = random_matrix(6, 4, 8);
    const Eigen::MatrixXd m = b.transpose() * b; // PSD, full rank 4
    const ImplicitQr qr = implicit_qr(m, 1e-10);
    REQUIRE(qr.rank == 4);
    const Eigen::MatrixXd white = qr.r_pinv.transpose() * m * qr.r_pinv;
    CHECK((white - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
    // R recomposes the truncated Gram matrix
    CHECK((qr.r.transpose() * qr.r - m).norm() / m.norm() < 1e-12);
}

TEST_CASE("implicit_qr detects rank deficiency") {
    Eigen::MatrixXd b = random_matrix(6, 3, 9);
    Eigen::MatrixXd b_dup(6, 4);
    b_dup << b, b.col(2); // duplicated function
    const Eigen::MatrixXd m = b_dup.transpose() * b_dup;
    const ImplicitQr qr = implicit_qr(m, 1e-10);
    CHECK(qr.rank == 3);
    const Eigen::MatrixXd white = qr.r_pinv.transpose() * m * qr.r_pinv;
    CHECK((white - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10);
    CHECK_THROWS_AS(implicit_qr(Eigen::MatrixXd::Zero(3, 3), 1e-10), AllTruncated);
}

TEST_CASE("exact_principal angles are sorted, bounded, and permutation invariant") {
    const SnapshotData data = duffing_data(60, 5);
    const KernelSpec kernel = wendland(1.0);
    const Eigen::MatrixXd w = center_dictionary(60, 8, 6);
    const PrincipalDecomposition pd = exact_principal(w, data, kernel);

    REQUIRE(pd.pair_count() == 8);
    for (Eigen::Index i = 0; i + 1 < pd.pair_count(); ++i) {
        CHECK(pd.angles(i) <= pd.angles(i + 1));
    }
    CHECK(pd.angles.minCoeff() >= 0.0);
    CHECK(pd.angles.maxCoeff() <= M_PI / 2.0 + 1e-12);
    for (Eigen::Index i = 0; i < pd.pair_count(); ++i) {
        CHECK(pd.cosines(i) == doctest::Approx(std::cos(pd.angles(i))).epsilon(1e-12));
    }
    CHECK(invariance_proximity(pd) ==
          doctest::Approx(std::sin(pd.angles(pd.pair_count() - 1))).epsilon(1e-12));

    // permuting dataset columns together with dictionary rows is a relabeling
    std::vector<Eigen::Index> perm = sample_without_replacement(60, 60, 99);
    SnapshotData shuffled = data;
    Eigen::MatrixXd w_perm(60, 8);
    for (Eigen::Index i = 0; i < 60; ++i) {
        shuffled.x.col(i) = data.x.col(perm[i]);
        shuffled.tx.col(i) = data.tx.col(perm[i]);
        w_perm.row(i) = w.row(perm[i]);
    }
    const PrincipalDecomposition pd_perm = exact_principal(w_perm, shuffled, kernel);
    CHECK((pd.angles - pd_perm.angles).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("identity dynamics gives vanishing angles for every kernel family") {
    const DiscreteSystem id = identity_system(2);
    const SnapshotData data = sample_uniform(id, 40, square_box(-2.0, 2.0), 7);
    for (auto family : {KernelFamily::wendland, KernelFamily::gaussian, KernelFamily::linear}) {
        KernelSpec kernel;
        kernel.family = family;
        kernel.shape = 1.0;
        const Eigen::MatrixXd w = random_dictionary(40, 6, 8);
        const PrincipalDecomposition pd = exact_principal(w, data, kernel);
        CHECK(pd.angles.maxCoeff() <= 1e-6);
        CHECK(invariance_proximity(pd) <= 1e-6);
    }
}

TEST_CASE("exact angles match a Euclidean oracle under the linear kernel") {
    // With k(x, y) = x.y the section span is coefficient space itself, so the
    // same subspaces can be orthonormalized with ordinary QR and compared.
    const Eigen::MatrixXd a = random_matrix(4, 4, 10);
    const DiscreteSystem sys = linear_system(a);
    const SnapshotData data = sample_uniform(sys, 40, square_box(-1.0, 1.0, 4), 11);
    KernelSpec kernel;
    kernel.family = KernelFamily::linear;
    const Eigen::MatrixXd w = random_dictionary(40, 2, 12);

    const ExactWorkspace ws = make_exact_workspace(data, kernel, 1e-12);
    const PrincipalDecomposition pd = exact_principal(ws, w);
    const Eigen::MatrixXd w_kv = solve_koopman_image(ws, w);
    const Eigen::VectorXd oracle = euclidean_angles(data.x * w, data.x * w_kv);

    REQUIRE(pd.pair_count() == oracle.size());
    CHECK((pd.angles - oracle).cwiseAbs().maxCoeff() < 1e-8);
    // the instance is nontrivial: the image genuinely tilts away
    CHECK(pd.angles.maxCoeff() > 0.05);
}

TEST_CASE("containment residual is small when the solve is clean") {
    const SnapshotData data = duffing_data(50, 13);
    const KernelSpec kernel = wendland(0.8);
    const Eigen::MatrixXd w = center_dictionary(50, 6, 14);
    const PrincipalDecomposition pd = exact_principal(w, data, kernel);
    REQUIRE(pd.containment_residual.has_value());
    CHECK(*pd.containment_residual < 1e-6);
}

TEST_CASE("duplicated dictionary columns reduce the pair count") {
    const SnapshotData data = duffing_data(40, 15);
    const KernelSpec kernel = wendland(1.0);
    Eigen::MatrixXd w = center_dictionary(40, 5, 16);
    Eigen::MatrixXd w_dup(40, 6);
    w_dup << w, w.col(0);
    const PrincipalDecomposition pd = exact_principal(w_dup, data, kernel);
    CHECK(pd.rank_v == 5);
    CHECK(pd.pair_count() == std::min(pd.rank_v, pd.rank_kv));
}

TEST_CASE("principal vectors are orthonormal in their Gram metrics") {
    const SnapshotData data = duffing_data(80, 17);
    const KernelSpec kernel = wendland(1.0);
    const Eigen::MatrixXd w = center_dictionary(80, 10, 18);
    const ExactWorkspace ws = make_exact_workspace(data, kernel);
    const PrincipalDecomposition pd = exact_principal(ws, w);
    const Eigen::MatrixXd w_kv = solve_koopman_image(ws, w);
    const GramTriple g = gram_triple(w, w_kv, ws.k_xx, ws.k_txx);

    const Eigen::Index k = pd.pair_count();
    const Eigen::MatrixXd id_v = pd.a_v.transpose() * g.m_v * pd.a_v;
    const Eigen::MatrixXd id_kv = pd.a_kv.transpose() * g.m_kv * pd.a_kv;
    const Eigen::MatrixXd diag = pd.a_v.transpose() * g.m_cross * pd.a_kv;
    CHECK((id_v - Eigen::MatrixXd::Identity(k, k)).norm() < 1e-9);
    CHECK((id_kv - Eigen::MatrixXd::Identity(k, k)).norm() < 1e-9);
    CHECK((diag - Eigen::MatrixXd(pd.cosines.asDiagonal())).norm() < 1e-9);
}

TEST_CASE("cosines above one beyond the slack raise, within the slack clamp") {
    // Identity factors with a fabricated cross matrix isolate the guard.
    ImplicitQr qr;
    qr.r = Eigen::MatrixXd::Identity(2, 2);
    qr.r_pinv = Eigen::MatrixXd::Identity(2, 2);
    qr.rank = 2;
    Eigen::MatrixXd cross = Eigen::MatrixXd::Identity(2, 2);
    cross(0, 0) = 1.5;
    CHECK_THROWS_AS(principal_from_factors(qr, qr, cross, 1e-6), NumericalInconsistency);
    const PrincipalDecomposition pd = principal_from_factors(qr, qr, cross, 0.6);
    CHECK(pd.angles(0) == 0.0);
    CHECK(pd.cosines(0) == 1.0);
}

TEST_CASE("evaluate_function_at applies the reproducing expansion") {
    const SnapshotData data = duffing_data(300, 19);
    const KernelSpec kernel = wendland(1.2);
    const Eigen::VectorXd w = random_dictionary(300, 1, 20);
    const Eigen::MatrixXd queries = random_matrix(2, 521, 21);

    // block boundaries at 256/512 are interior to this query set
    const Eigen::VectorXd values = evaluate_function_at(w, data, kernel, queries);
    for (Eigen::Index j : {Eigen::Index(0), Eigen::Index(255), Eigen::Index(256),
                           Eigen::Index(511), Eigen::Index(520)}) {
        double direct = 0.0;
        for (Eigen::Index a = 0; a < 300; ++a) {
            direct += w(a) * kernel_eval(kernel, queries.col(j), data.x.col(a));
        }
        CHECK(values(j) == doctest::Approx(direct).epsilon(1e-12));
    }
    CHECK(evaluate_function(w, data, kernel, queries.col(3)) ==
          doctest::Approx(values(3)).epsilon(1e-14));

    // complex coefficients evaluate component-wise
    Eigen::VectorXcd wc = w.cast<std::complex<double>>();
    wc(0) += std::complex<double>(0.0, 0.5);
    const Eigen::VectorXcd cvalues = evaluate_function_at(wc, data, kernel, queries);
    CHECK(cvalues(7).real() == doctest::Approx(values(7)).epsilon(1e-10));
}

TEST_CASE("input validation rejects malformed dictionaries") {
    const SnapshotData data = duffing_data(20, 22);
    const KernelSpec kernel = wendland(1.0);
    CHECK_THROWS_AS(exact_principal(Eigen::MatrixXd::Zero(19, 3), data, kernel),
                    DimensionMismatch);
    CHECK_THROWS_AS(exact_principal(Eigen::MatrixXd(20, 0), data, kernel),
                    EmptyDecomposition);
    Eigen::MatrixXd nan_w = Eigen::MatrixXd::Zero(20, 2);
    nan_w(0, 0) = std::nan("");
    CHECK_THROWS_AS(exact_principal(nan_w, data, kernel), NonFiniteInput);
}
