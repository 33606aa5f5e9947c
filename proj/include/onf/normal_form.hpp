#pragma once

#include <utility>

#include <Eigen/Cholesky>

#include "onf/pair.hpp"
#include "onf/stein.hpp"
#include "onf/types.hpp"

namespace onf {

/// Invertible state-space change of basis; the inverse is stored explicitly.
struct SimilarityTransform {
    Matrix T;
    Matrix T_inv;
};

/// Transforms a stable observable pair to output-normal form. With P the
/// observability Grammian and P = L L^T its Cholesky factorization (positive
/// diagonal), the transform is T = L^{-T}, so T_inv = L^T exactly and the
/// result (T^{-1} A T, C T) satisfies A^T A + C^T C = I.
///
/// A Grammian with a near-zero eigenvalue is rejected as unobservable rather
/// than regularized.
inline std::pair<OutputPair, SimilarityTransform> to_output_normal(const OutputPair& pair)
{
    pair.validate();
    const Index n = pair.n();
    const Matrix P = solve_dual_stein(pair.A, pair.C);

    Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-12 * P.trace() / static_cast<double>(n)) {
        fail_domain("to_output_normal: pair is unobservable (Grammian numerically singular)");
    }
    Eigen::LLT<Matrix> llt(P);
    if (llt.info() != Eigen::Success) {
        fail_domain("to_output_normal: Grammian is not positive definite");
    }
    const Matrix L = llt.matrixL();

    SimilarityTransform t;
    t.T_inv = L.transpose();
    t.T = L.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(n, n));

    OutputPair out;
    out.A = t.T_inv * pair.A * t.T;
    out.C = pair.C * t.T;
    return {out, t};
}

/// Duality map (A, B) -> (A^T, B^T): input normality of the argument is
/// output normality of the result, so controller problems reuse this toolkit.
inline OutputPair dual_input_pair(const Matrix& A, const Matrix& B)
{
    if (A.rows() != A.cols()) fail_domain("dual_input_pair: A must be square");
    if (B.rows() != A.rows()) fail_domain("dual_input_pair: B must have as many rows as A");
    return OutputPair{A.transpose(), B.transpose()};
}

} // namespace onf
