#pragma once

#include <string>

#include "onf/givens.hpp"
#include "onf/types.hpp"

namespace onf {

/// A discrete-time output pair: n x n advance matrix A and d x n measurement
/// matrix C, n >= d >= 1. Output normal means A^T A + C^T C = I.
struct OutputPair {
    Matrix A;
    Matrix C;

    Index n() const { return A.rows(); }
    Index d() const { return C.rows(); }

    void validate() const
    {
        if (A.rows() != A.cols()) fail_domain("output pair: A must be square");
        if (C.cols() != A.rows()) fail_domain("output pair: C must have n columns");
        if (C.rows() < 1 || C.rows() > A.rows()) fail_domain("output pair: requires n >= d >= 1");
        if (!A.allFinite() || !C.allFinite()) fail_domain("output pair: non-finite entry");
    }
};

/// The (n+d) x n stack Q = [C; A]; column orthonormal exactly when the pair
/// is output normal.
struct StackMatrix {
    Matrix Q;
    Index d = 0;

    static StackMatrix from_pair(const OutputPair& pair)
    {
        StackMatrix s;
        s.d = pair.d();
        s.Q.resize(pair.n() + pair.d(), pair.n());
        s.Q.topRows(pair.d()) = pair.C;
        s.Q.bottomRows(pair.n()) = pair.A;
        return s;
    }

    OutputPair to_pair() const
    {
        const Index n = Q.cols();
        return OutputPair{Q.bottomRows(n), Q.topRows(d)};
    }

    double orthonormality_residual() const
    {
        const Index n = Q.cols();
        return (Q.transpose() * Q - Matrix::Identity(n, n)).norm();
    }
};

inline Matrix stack_of(const OutputPair& pair)
{
    return StackMatrix::from_pair(pair).Q;
}

inline OutputPair pair_from_stack(const Matrix& Q, Index d)
{
    return StackMatrix{Q, d}.to_pair();
}

/// Frobenius norm of I - A^T A - C^T C.
inline double output_normal_residual(const OutputPair& pair)
{
    const Index n = pair.n();
    return (Matrix::Identity(n, n) - pair.A.transpose() * pair.A - pair.C.transpose() * pair.C).norm();
}

inline bool is_output_normal(const OutputPair& pair, double tol = 1e-8)
{
    return output_normal_residual(pair) <= tol;
}

/// Signature conjugation (A, C) -> (E A E, C E). Exact in floating point and
/// preserves output normality and the transfer behaviour.
inline OutputPair apply_signature(const OutputPair& pair, const SignatureMatrix& E)
{
    pair.validate();
    if (E.size() != pair.n()) fail_domain("apply_signature: signature size mismatch");
    OutputPair out = pair;
    for (Index j = 0; j < pair.n(); ++j) {
        if (E.signs[j] == -1) {
            out.A.col(j) = -out.A.col(j);
            out.A.row(j) = -out.A.row(j);
            out.C.col(j) = -out.C.col(j);
        }
    }
    return out;
}

} // namespace onf
