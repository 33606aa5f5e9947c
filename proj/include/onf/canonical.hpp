#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "onf/givens.hpp"
#include "onf/pair.hpp"
#include "onf/schur.hpp"
#include "onf/types.hpp"

namespace onf {

enum class CanonicalForm { ots, ho, schur, none };

/// Structure flags for an output pair, all measured against one zero
/// tolerance so classification and reduction agree on strictness.
/// reducible_index is zero based: the first k with stack(k,k) ~ 0 (OTS) or
/// A(k+1,k) ~ 0 (HO).
struct FormClassification {
    CanonicalForm form = CanonicalForm::none;
    bool standard = false;
    bool unreduced = false;
    bool strict = false;
    bool degenerate = false; ///< HO only: |C(0,0)| >= 1 - tol
    std::optional<Index> reducible_index;
};

/// Similarity-invariant fingerprint s_k = C A^k C^T, k = 0 .. 2n-1, used as
/// the cross-form equivalence oracle (invariant under orthogonal similarity).
struct SignatureSequence {
    std::vector<Matrix> s;
};

inline SignatureSequence signature_sequence(const OutputPair& pair)
{
    pair.validate();
    SignatureSequence seq;
    seq.s.reserve(static_cast<std::size_t>(2 * pair.n()));
    Matrix X = pair.C.transpose();
    for (Index k = 0; k < 2 * pair.n(); ++k) {
        seq.s.push_back(pair.C * X);
        X = (pair.A * X).eval();
    }
    return seq;
}

inline double signature_distance(const SignatureSequence& a, const SignatureSequence& b)
{
    if (a.s.size() != b.s.size() || (!a.s.empty() && a.s.front().rows() != b.s.front().rows())) {
        fail_domain("signature_distance: sequences are not comparable");
    }
    double dist = 0.0;
    for (std::size_t k = 0; k < a.s.size(); ++k) {
        dist = std::max(dist, (a.s[k] - b.s[k]).cwiseAbs().maxCoeff());
    }
    return dist;
}

inline double default_classify_tol(const OutputPair& pair)
{
    return 1e-8 * stack_of(pair).norm();
}

namespace detail {

inline bool is_ots_structure(const Matrix& Q, double tol)
{
    for (Index i = 0; i < Q.rows(); ++i) {
        for (Index j = i + 1; j < Q.cols(); ++j) {
            if (std::abs(Q(i, j)) > tol) return false;
        }
    }
    return true;
}

inline bool is_ho_structure(const OutputPair& pair, double tol)
{
    for (Index j = 1; j < pair.n(); ++j) {
        if (std::abs(pair.C(0, j)) > tol) return false;
    }
    for (Index j = 0; j < pair.n(); ++j) {
        for (Index i = j + 2; i < pair.n(); ++i) {
            if (std::abs(pair.A(i, j)) > tol) return false;
        }
    }
    return true;
}

inline bool is_schur_structure(const Matrix& A, double tol)
{
    const Index n = A.rows();
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 2; i < n; ++i) {
            if (std::abs(A(i, j)) > tol) return false;
        }
    }
    bool seen_real = false;
    Index p = 0;
    while (p < n) {
        const bool two = p + 1 < n && std::abs(A(p + 1, p)) > tol;
        if (two) {
            if (seen_real) return false; // complex blocks must come first
            const double disc = (A(p, p) - A(p + 1, p + 1)) * (A(p, p) - A(p + 1, p + 1)) +
                                4.0 * A(p, p + 1) * A(p + 1, p);
            if (disc >= 0.0) return false;
            p += 2;
        } else {
            seen_real = true;
            p += 1;
        }
    }
    return true;
}

} // namespace detail

/// Classifies the pair against the OTS / HO / Schur structure definitions,
/// with |.| < tol as the zero test (default 1e-8 * ||stack||_F).
inline FormClassification classify(const OutputPair& pair, double tol = -1.0)
{
    pair.validate();
    if (tol < 0.0) tol = default_classify_tol(pair);
    const Index n = pair.n();
    const Index d = pair.d();
    FormClassification out;
    const Matrix Q = stack_of(pair);

    if (detail::is_ots_structure(Q, tol)) {
        out.form = CanonicalForm::ots;
        out.unreduced = true;
        out.standard = true;
        for (Index i = 0; i < n; ++i) {
            const double q = Q(i, i);
            if (std::abs(q) <= tol) {
                out.unreduced = false;
                if (!out.reducible_index) out.reducible_index = i;
            }
            if (q < -tol) out.standard = false;
        }
        out.strict = out.standard && out.unreduced;
        return out;
    }

    if (detail::is_ho_structure(pair, tol)) {
        out.form = CanonicalForm::ho;
        const double c11 = pair.C(0, 0);
        out.degenerate = std::abs(c11) >= 1.0 - tol;
        out.unreduced = std::abs(c11) > tol;
        out.standard = c11 > -tol && !out.degenerate;
        for (Index i = 0; i + 1 < n; ++i) {
            const double sub = pair.A(i + 1, i);
            if (std::abs(sub) <= tol) {
                out.unreduced = false;
                if (!out.reducible_index) out.reducible_index = i;
            }
            if (sub < -tol) out.standard = false;
        }
        out.strict = out.standard && out.unreduced;
        return out;
    }

    if (detail::is_schur_structure(pair.A, tol)) {
        out.form = CanonicalForm::schur;
        return out;
    }
    return out;
}

/// Chooses the signature matrix that makes the form's standard inequalities
/// hold (stack diagonal nonnegative for OTS; subdiagonal of A and C(0,0)
/// nonnegative for HO) by greedy left-to-right sign propagation.
inline std::pair<OutputPair, SignatureMatrix> standardize(const OutputPair& pair, CanonicalForm form)
{
    pair.validate();
    const Index n = pair.n();
    const Index d = pair.d();
    SignatureMatrix E = SignatureMatrix::identity(n);
    if (form == CanonicalForm::ots) {
        for (Index i = 0; i < n; ++i) {
            const double value = (i < d) ? pair.C(i, i)
                                         : static_cast<double>(E.signs[i - d]) * pair.A(i - d, i);
            E.signs[i] = value < 0.0 ? -1 : 1;
        }
    } else if (form == CanonicalForm::ho) {
        E.signs[0] = pair.C(0, 0) < 0.0 ? -1 : 1;
        for (Index i = 0; i + 1 < n; ++i) {
            E.signs[i + 1] = static_cast<double>(E.signs[i]) * pair.A(i + 1, i) < 0.0 ? -1 : 1;
        }
    } else {
        fail_domain("standardize: only OTS and HO forms have a signature standardization");
    }
    return {apply_signature(pair, E), E};
}

namespace detail {

inline void require_output_normal(const OutputPair& pair, const char* who)
{
    const double residual = output_normal_residual(pair);
    if (residual > 1e-8) {
        fail_domain(std::string(who) + ": input pair is not output normal (residual " +
                    std::to_string(residual) + ")");
    }
}

// Zeroing kernel selection for the reductions.
enum class Kernel { givens, householder };

// State of an in-progress orthogonal similarity reduction.
struct Reduction {
    Matrix A;
    Matrix C;
    Matrix U;

    explicit Reduction(const OutputPair& pair)
        : A(pair.A), C(pair.C), U(Matrix::Identity(pair.n(), pair.n()))
    {
    }

    void rotate(const GivensRotation& g)
    {
        apply_givens_cols(g, C);
        apply_givens_cols(g, A);
        apply_givens_rows(g, A, GivensSide::left_transpose);
        apply_givens_cols(g, U);
    }

    // Similarity by the reflector I - 2 w w^T supported on the contiguous
    // coordinate range [first, first + len).
    void reflect(Index first, Index len, const Vector& w)
    {
        C.middleCols(first, len) -= (C.middleCols(first, len) * w) * (2.0 * w.transpose());
        A.middleCols(first, len) -= (A.middleCols(first, len) * w) * (2.0 * w.transpose());
        A.middleRows(first, len) -= (2.0 * w) * (w.transpose() * A.middleRows(first, len));
        U.middleCols(first, len) -= (U.middleCols(first, len) * w) * (2.0 * w.transpose());
    }

    OutputPair pair() const { return OutputPair{A, C}; }
};

inline Vector reflector_normal(const Vector& h)
{
    Vector w = h;
    w[0] += (h[0] >= 0.0 ? 1.0 : -1.0) * h.norm();
    const double norm = w.norm();
    return norm == 0.0 ? w : Vector(w / norm);
}

// Zeroes source(row, pivot+1 .. n-1) against source(row, pivot) by a
// similarity; source must reference this reduction's A or C.
inline void zero_row_tail(Reduction& r, const Matrix& source, Index row, Index pivot,
                          Kernel kernel)
{
    const Index n = r.A.cols();
    if (pivot + 1 >= n) return;
    if (kernel == Kernel::givens) {
        for (Index j = n - 1; j > pivot; --j) {
            r.rotate({pivot, j, std::atan2(-source(row, j), source(row, pivot))});
        }
        return;
    }
    const Index len = n - pivot;
    const Vector h = source.row(row).segment(pivot, len).transpose();
    if (h.norm() == 0.0) return;
    r.reflect(pivot, len, reflector_normal(h));
}

// Orthogonal reduction to observer-triangular structure; no ON gate so the
// degenerate-splitting path can reuse it on slightly perturbed stacks.
inline std::pair<OutputPair, Matrix> reduce_ots(const OutputPair& pair, Kernel kernel)
{
    const Index n = pair.n();
    const Index d = pair.d();
    Reduction r(pair);
    for (Index i = 0; i < d; ++i) zero_row_tail(r, r.C, i, i, kernel);
    for (Index k = 0; k + d + 1 < n; ++k) zero_row_tail(r, r.A, k, k + d, kernel);
    return {r.pair(), r.U};
}

inline std::pair<OutputPair, Matrix> reduce_ho(const OutputPair& pair, Kernel kernel)
{
    const Index n = pair.n();
    Reduction r(pair);
    zero_row_tail(r, r.C, 0, 0, kernel);
    // Hessenberg reduction of A fixing coordinate 0: zero A(i, k) for i > k+1
    for (Index k = 0; k + 2 < n; ++k) {
        if (kernel == Kernel::givens) {
            for (Index i = n - 1; i >= k + 2; --i) {
                r.rotate({k + 1, i, std::atan2(-r.A(i, k), r.A(k + 1, k))});
            }
        } else {
            const Index len = n - k - 1;
            const Vector h = r.A.col(k).segment(k + 1, len);
            if (h.norm() == 0.0) continue;
            r.reflect(k + 1, len, reflector_normal(h));
        }
    }
    return {r.pair(), r.U};
}

} // namespace detail

enum class ReductionKernel { givens, householder };

/// Orthogonally reduces an output-normal pair to Hessenberg-observer form:
/// A upper Hessenberg, C row 0 supported on its first entry, standardized so
/// A(i+1,i) >= 0 and C(0,0) >= 0.
inline std::pair<OutputPair, Matrix> to_hessenberg_observer(
    const OutputPair& pair, ReductionKernel kernel = ReductionKernel::givens)
{
    pair.validate();
    detail::require_output_normal(pair, "to_hessenberg_observer");
    auto [reduced, U] = detail::reduce_ho(pair, kernel == ReductionKernel::givens
                                                    ? detail::Kernel::givens
                                                    : detail::Kernel::householder);
    auto [standard, E] = standardize(reduced, CanonicalForm::ho);
    for (Index j = 0; j < U.cols(); ++j) {
        if (E.signs[j] == -1) U.col(j) = -U.col(j);
    }
    return {standard, U};
}

/// Orthogonally reduces an output-normal pair to observer-triangular-system
/// form: the stack [C; A] is lower triangular (A has upper bandwidth d) with
/// nonnegative diagonal.
inline std::pair<OutputPair, Matrix> to_ots(const OutputPair& pair,
                                            ReductionKernel kernel = ReductionKernel::givens)
{
    pair.validate();
    detail::require_output_normal(pair, "to_ots");
    auto [reduced, U] = detail::reduce_ots(pair, kernel == ReductionKernel::givens
                                                     ? detail::Kernel::givens
                                                     : detail::Kernel::householder);
    auto [standard, E] = standardize(reduced, CanonicalForm::ots);
    for (Index j = 0; j < U.cols(); ++j) {
        if (E.signs[j] == -1) U.col(j) = -U.col(j);
    }
    return {standard, U};
}

/// Strips leading exactly-observed directions off a degenerate HO ON pair:
/// while |C(0,0)| is within 1e-8 of one, the first state is split off as an
/// identity direct summand and the remainder re-reduced. Returns the number
/// of stripped directions (at most d) and the nondegenerate remainder.
inline std::pair<Index, OutputPair> split_degenerate(const OutputPair& pair)
{
    pair.validate();
    constexpr double kDegTol = 1e-8;
    if (classify(pair).form != CanonicalForm::ho) {
        fail_domain("split_degenerate: pair is not in Hessenberg-observer form");
    }
    detail::require_output_normal(pair, "split_degenerate");

    OutputPair cur = pair;
    Index m = 0;
    while (std::abs(cur.C(0, 0)) >= 1.0 - kDegTol) {
        if (m == pair.d()) fail_domain("split_degenerate: more than d identity directions");
        if (cur.n() <= 1) fail_domain("split_degenerate: nothing left to split");
        const Index n = cur.n();
        const Index d = cur.d();
        const double sign = cur.C(0, 0) >= 0.0 ? 1.0 : -1.0;
        Matrix C2(d, n - 1);
        C2.topRows(d - 1) = cur.C.block(1, 1, d - 1, n - 1);
        C2.row(d - 1) = sign * cur.A.block(0, 1, 1, n - 1);
        Matrix A2 = cur.A.block(1, 1, n - 1, n - 1);
        cur = OutputPair{A2, C2};
        ++m;
        if (classify(cur).form != CanonicalForm::ho) {
            cur = detail::reduce_ho(cur, detail::Kernel::givens).first;
            cur = standardize(cur, CanonicalForm::ho).first;
        }
    }
    return {m, cur};
}

/// Brings the trailing block of a reducible nondegenerate HO ON pair to
/// ordered qd Schur form through a similarity of the form I_k (+) U_{n-k}.
/// The leading k x k part of A and the leading k columns of C are untouched.
inline std::pair<OutputPair, Matrix> reduce_partial_schur(const OutputPair& pair)
{
    pair.validate();
    const FormClassification cls = classify(pair);
    if (cls.form != CanonicalForm::ho) {
        fail_domain("reduce_partial_schur: pair is not in Hessenberg-observer form");
    }
    if (cls.degenerate) fail_domain("reduce_partial_schur: pair is degenerate");
    detail::require_output_normal(pair, "reduce_partial_schur");
    if (!cls.reducible_index) fail_domain("reduce_partial_schur: pair is not reducible");

    const Index n = pair.n();
    const Index k = *cls.reducible_index + 1; // leading block size
    const SchurForm sf = ordered_qd_schur(pair.A.block(k, k, n - k, n - k));

    Matrix U = Matrix::Identity(n, n);
    U.block(k, k, n - k, n - k) = sf.U;

    OutputPair out = pair;
    out.A.block(k, k, n - k, n - k) = sf.T;
    out.A.block(0, k, k, n - k) = (pair.A.block(0, k, k, n - k) * sf.U).eval();
    out.A.block(k, 0, n - k, k) = (sf.U.transpose() * pair.A.block(k, 0, n - k, k)).eval();
    out.C.rightCols(n - k) = (pair.C.rightCols(n - k) * sf.U).eval();
    return {out, U};
}

} // namespace onf
