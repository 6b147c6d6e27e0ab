#include "kspv/rkhs_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "kspv/errors.hpp"

namespace kspv {

namespace {

void check_dictionary(const Eigen::MatrixXd& w_v, Eigen::Index n) {
    if (w_v.rows() != n) {
        throw DimensionMismatch("dictionary has " + std::to_string(w_v.rows()) +
                                " rows, dataset has " + std::to_string(n) + " states");
    }
    if (w_v.cols() == 0) throw EmptyDecomposition("dictionary has no columns");
    if (!w_v.allFinite()) throw NonFiniteInput("dictionary coefficients are not finite");
}

} // namespace

ExactWorkspace make_exact_workspace(const SnapshotData& data, const KernelSpec& kernel,
                                    double lambda_rel) {
    ExactWorkspace ws;
    ws.k_xx = gram(kernel, data.x, data.x);
    ws.k_txx = gram(kernel, data.tx, data.x);
    ws.lambda = lambda_rel * ws.k_xx.trace() / static_cast<double>(data.count());

    Eigen::MatrixXd reg = 0.5 * (ws.k_xx + ws.k_xx.transpose());
    reg.diagonal().array() += ws.lambda;
    ws.cholesky.compute(reg);
    if (ws.cholesky.info() != Eigen::Success) {
        throw FactorizationFailed("regularized kernel matrix is not positive definite "
                                  "(lambda = " + std::to_string(ws.lambda) + ")");
    }
    return ws;
}

Eigen::MatrixXd solve_koopman_image(const Eigen::MatrixXd& w_v,
                                    const Eigen::MatrixXd& k_xx,
                                    const Eigen::MatrixXd& k_txx, double lambda) {
    if (k_xx.rows() != k_xx.cols()) throw DimensionMismatch("K_XX must be square");
    if (k_txx.cols() != k_xx.cols()) {
        throw DimensionMismatch("K_TXX has " + std::to_string(k_txx.cols()) +
                                " columns, K_XX has " + std::to_string(k_xx.cols()));
    }
    check_dictionary(w_v, k_xx.rows());
    return regularized_symmetric_solve(k_xx, k_txx * w_v, lambda);
}

Eigen::MatrixXd solve_koopman_image(const ExactWorkspace& ws, const Eigen::MatrixXd& w_v) {
    check_dictionary(w_v, ws.k_xx.rows());
    return ws.cholesky.solve(ws.k_txx * w_v);
}

GramTriple gram_triple(const Eigen::MatrixXd& w_v, const Eigen::MatrixXd& w_kv,
                       const Eigen::MatrixXd& k_xx, const Eigen::MatrixXd& k_txx) {
    GramTriple g;
    g.m_v = w_v.transpose() * k_xx * w_v;
    g.m_kv = w_kv.transpose() * k_xx * w_kv;
    g.m_cross = w_v.transpose() * k_txx * w_v;
    // Gram matrices are symmetric up to roundoff; the eigensolver downstream
    // assumes it exactly.
    g.m_v = 0.5 * (g.m_v + g.m_v.transpose()).eval();
    g.m_kv = 0.5 * (g.m_kv + g.m_kv.transpose()).eval();
    return g;
}

ImplicitQr implicit_qr(const Eigen::MatrixXd& gram_matrix, double threshold) {
    const TruncatedEig eig = truncated_eig_psd(gram_matrix, threshold);

    const Eigen::VectorXd sqrt_vals = eig.eigenvalues.cwiseSqrt();
    // Balanced square root Λ^{1/2} Ṽᵀ of the truncated Gram matrix; its QR
    // gives a triangular R with RᵀR = ṼΛṼᵀ.
    const Eigen::MatrixXd b = sqrt_vals.asDiagonal() * eig.eigenvectors.transpose();
    const EconomyQr qr = economy_qr(b);

    ImplicitQr out;
    out.rank = eig.rank;
    out.r = qr.r;
    out.r_pinv = eig.eigenvectors * sqrt_vals.cwiseInverse().asDiagonal() * qr.q;
    return out;
}

PrincipalDecomposition principal_from_factors(const ImplicitQr& qr_v,
                                              const ImplicitQr& qr_kv,
                                              const Eigen::MatrixXd& m_cross,
                                              double cosine_slack) {
    const Eigen::MatrixXd cosine_matrix =
        qr_v.r_pinv.transpose() * m_cross * qr_kv.r_pinv;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cosine_matrix,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);

    PrincipalDecomposition pd;
    pd.rank_v = qr_v.rank;
    pd.rank_kv = qr_kv.rank;

    const Eigen::Index k = std::min(qr_v.rank, qr_kv.rank);
    pd.cosines.resize(k);
    pd.angles.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        double c = svd.singularValues()(i);
        if (c > 1.0 + cosine_slack) {
            throw NumericalInconsistency("principal cosine " + std::to_string(c) +
                                         " exceeds 1 beyond slack " +
                                         std::to_string(cosine_slack));
        }
        pd.cosines(i) = std::clamp(c, 0.0, 1.0);
        pd.angles(i) = std::acos(pd.cosines(i));
    }

    pd.a_v = qr_v.r_pinv * svd.matrixU().leftCols(k);
    pd.a_kv = qr_kv.r_pinv * svd.matrixV().leftCols(k);
    return pd;
}

PrincipalDecomposition exact_principal(const ExactWorkspace& ws,
                                       const Eigen::MatrixXd& w_v,
                                       const ExactOptions& opts) {
    check_dictionary(w_v, ws.k_xx.rows());

    const Eigen::MatrixXd w_kv = solve_koopman_image(ws, w_v);
    const GramTriple g = gram_triple(w_v, w_kv, ws.k_xx, ws.k_txx);

    const ImplicitQr qr_v = implicit_qr(g.m_v, opts.eig_threshold);
    const ImplicitQr qr_kv = implicit_qr(g.m_kv, opts.eig_threshold);

    PrincipalDecomposition pd =
        principal_from_factors(qr_v, qr_kv, g.m_cross, opts.cosine_slack);

    const Eigen::MatrixXd target = ws.k_txx * w_v;
    const double target_norm = target.norm();
    if (target_norm > 0.0) {
        pd.containment_residual = (ws.k_xx * w_kv - target).norm() / target_norm;
    } else {
        pd.containment_residual = 0.0;
    }
    return pd;
}

PrincipalDecomposition exact_principal(const Eigen::MatrixXd& w_v,
                                       const SnapshotData& data,
                                       const KernelSpec& kernel,
                                       const ExactOptions& opts) {
    const ExactWorkspace ws = make_exact_workspace(data, kernel, opts.lambda_rel);
    return exact_principal(ws, w_v, opts);
}

double evaluate_function(const Eigen::VectorXd& w, const SnapshotData& data,
                         const KernelSpec& kernel, const Eigen::VectorXd& x) {
    if (w.size() != data.count()) {
        throw DimensionMismatch("coefficient vector length " + std::to_string(w.size()) +
                                " does not match dataset size " +
                                std::to_string(data.count()));
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.count(); ++i) {
        acc += w(i) * kernel_eval(kernel, x, data.x.col(i));
    }
    return acc;
}

namespace {

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic>
evaluate_blocked(const Eigen::Vector<Scalar, Eigen::Dynamic>& w, const SnapshotData& data,
                 const KernelSpec& kernel, const Eigen::MatrixXd& queries) {
    if (w.size() != data.count()) {
        throw DimensionMismatch("coefficient vector length " + std::to_string(w.size()) +
                                " does not match dataset size " +
                                std::to_string(data.count()));
    }
    if (queries.rows() != data.dim()) {
        throw DimensionMismatch("query dimension " + std::to_string(queries.rows()) +
                                " does not match state dimension " +
                                std::to_string(data.dim()));
    }
    constexpr Eigen::Index block = 256;
    Eigen::Vector<Scalar, Eigen::Dynamic> out(queries.cols());
    for (Eigen::Index start = 0; start < queries.cols(); start += block) {
        const Eigen::Index len = std::min(block, queries.cols() - start);
        const Eigen::MatrixXd k_block =
            gram(kernel, data.x, queries.middleCols(start, len));
        out.segment(start, len) = k_block.transpose() * w;
    }
    return out;
}

} // namespace

Eigen::VectorXd evaluate_function_at(const Eigen::VectorXd& w, const SnapshotData& data,
                                     const KernelSpec& kernel,
                                     const Eigen::MatrixXd& queries) {
    return evaluate_blocked<double>(w, data, kernel, queries);
}

Eigen::VectorXcd evaluate_function_at(const Eigen::VectorXcd& w, const SnapshotData& data,
                                      const KernelSpec& kernel,
                                      const Eigen::MatrixXd& queries) {
    return evaluate_blocked<std::complex<double>>(w, data, kernel, queries);
}

double invariance_proximity(const PrincipalDecomposition& pd) {
    if (pd.pair_count() == 0) throw EmptyDecomposition("no principal pairs");
    return std::sin(pd.angles(pd.angles.size() - 1));
}

} // namespace kspv
