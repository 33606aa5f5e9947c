#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "onf/normal_form.hpp"
#include "onf/pair.hpp"
#include "onf/types.hpp"

namespace onf {

enum class SchurMode { raw, lambda_r, qd };

/// Real Schur decomposition A = U T U^T with T quasi upper triangular.
/// Complex-conjugate blocks always precede the real eigenvalues: block k
/// (zero based) starts at row 2k for k < ell and at row k + ell otherwise.
struct SchurForm {
    Matrix U;
    Matrix T;
    Index ell = 0; ///< number of 2 x 2 (complex-pair) blocks
    SchurMode mode = SchurMode::raw;

    Index n() const { return T.rows(); }
    Index block_count() const { return n() - ell; }
    Index block_start(Index k) const { return k < ell ? 2 * k : k + ell; }
    Index block_size(Index k) const { return k < ell ? 2 : 1; }
};

/// A standardized 2 x 2 diagonal subblock. In qd mode Z factors as an
/// orthogonal Q times diag(d1, d2) with s = Q(0,1) >= 0 and d1 >= d2 > 0;
/// in lambda_r mode the diagonal entries are equal, z12 z21 < 0 and
/// z12 + z21 > 0.
struct TwoByTwoBlock {
    Matrix Z;
    SchurMode standardization = SchurMode::qd;
    double c = 1.0;
    double s = 0.0;
    double d1 = 1.0;
    double d2 = 1.0;
};

namespace detail {

struct BlockInfo {
    Index start = 0;
    Index size = 1;
    double re = 0.0;
    double im = 0.0; ///< nonnegative
    double modulus = 0.0;
};

inline BlockInfo block_info(const Matrix& T, Index p, Index size)
{
    BlockInfo b;
    b.start = p;
    b.size = size;
    if (size == 1) {
        b.re = T(p, p);
        b.im = 0.0;
        b.modulus = std::abs(b.re);
    } else {
        const double z11 = T(p, p), z12 = T(p, p + 1);
        const double z21 = T(p + 1, p), z22 = T(p + 1, p + 1);
        b.re = 0.5 * (z11 + z22);
        const double disc = (z11 - z22) * (z11 - z22) + 4.0 * z12 * z21;
        b.im = disc < 0.0 ? 0.5 * std::sqrt(-disc) : 0.0;
        b.modulus = std::sqrt(std::abs(z11 * z22 - z12 * z21));
    }
    return b;
}

inline std::vector<BlockInfo> enumerate_blocks(const Matrix& T)
{
    std::vector<BlockInfo> blocks;
    Index p = 0;
    while (p < T.rows()) {
        const Index size = (p + 1 < T.rows() && T(p + 1, p) != 0.0) ? 2 : 1;
        blocks.push_back(block_info(T, p, size));
        p += size;
    }
    return blocks;
}

inline Matrix kron(const Matrix& A, const Matrix& B)
{
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

// Exchanges the adjacent diagonal blocks starting at p (sizes s1, s2) by the
// direct-swap method: solve T11 X - X T22 = T12, orthogonalize [-X; I] and
// apply the resulting similarity to T and U.
inline void swap_adjacent_blocks(Matrix& T, Matrix& U, Index p, Index s1, Index s2)
{
    const Index w = s1 + s2;
    const Matrix T11 = T.block(p, p, s1, s1);
    const Matrix T22 = T.block(p + s1, p + s1, s2, s2);
    const Matrix T12 = T.block(p, p + s1, s1, s2);

    // vec form of the little Sylvester system
    const Matrix K = kron(Matrix::Identity(s2, s2), T11) -
                     kron(T22.transpose(), Matrix::Identity(s1, s1));
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) fail_numerical("schur block exchange: coincident eigenvalues");
    const Vector rhs = Eigen::Map<const Vector>(T12.data(), s1 * s2);
    const Vector xv = lu.solve(rhs);
    Matrix X = Eigen::Map<const Matrix>(xv.data(), s1, s2);

    Matrix W(w, s2);
    W.topRows(s1) = -X;
    W.bottomRows(s2) = Matrix::Identity(s2, s2);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(W).householderQ();

    T.middleRows(p, w) = (Q.transpose() * T.middleRows(p, w)).eval();
    T.middleCols(p, w) = (T.middleCols(p, w) * Q).eval();
    U.middleCols(p, w) = (U.middleCols(p, w) * Q).eval();

    const double residual = T.block(p + s2, p, s1, s2).cwiseAbs().maxCoeff();
    if (residual > 1e-8 * std::max(1.0, T.norm())) {
        fail_numerical("schur block exchange failed (residual " + std::to_string(residual) + ")");
    }
    T.block(p + s2, p, s1, s2).setZero();
    if (s2 == 2) {
        const Matrix Z = T.block(p, p, 2, 2);
        if ((Z(0, 0) - Z(1, 1)) * (Z(0, 0) - Z(1, 1)) + 4.0 * Z(0, 1) * Z(1, 0) >= 0.0) {
            fail_numerical("schur block exchange produced a real-spectrum 2 x 2 block");
        }
    }
}

inline void zero_below_blocks(Matrix& T)
{
    for (Index j = 0; j + 2 < T.rows(); ++j) T.col(j).tail(T.rows() - j - 2).setZero();
    // lone subdiagonal entries that are numerically dead
    for (Index j = 0; j + 1 < T.rows(); ++j) {
        if (T(j + 1, j) != 0.0 && j + 2 < T.rows() && T(j + 2, j + 1) != 0.0) {
            fail_invariant("schur form: consecutive nonzero subdiagonal entries");
        }
    }
}

inline void refresh_ell(SchurForm& sf)
{
    sf.ell = 0;
    for (const auto& b : enumerate_blocks(sf.T)) {
        if (b.size == 2) ++sf.ell;
    }
}

} // namespace detail

/// Real Schur decomposition (Francis QR via Eigen) followed by adjacent-block
/// exchanges that move every complex-pair block ahead of the real
/// eigenvalues, as the block layout requires.
inline SchurForm real_schur(const Matrix& A)
{
    if (A.rows() != A.cols()) fail_domain("real_schur: matrix must be square");
    if (!A.allFinite()) fail_domain("real_schur: non-finite entry");
    SchurForm sf;
    if (A.rows() == 0) {
        sf.U.resize(0, 0);
        sf.T.resize(0, 0);
        return sf;
    }
    Eigen::RealSchur<Matrix> schur;
    schur.setMaxIterations(30 * A.rows());
    schur.compute(A, /*computeU=*/true);
    if (schur.info() != Eigen::Success) fail_numerical("real_schur: QR iteration did not converge");
    sf.U = schur.matrixU();
    sf.T = schur.matrixT();
    detail::zero_below_blocks(sf.T);

    // stable partition: bubble complex blocks ahead of real ones
    bool changed = true;
    while (changed) {
        changed = false;
        auto blocks = detail::enumerate_blocks(sf.T);
        for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
            if (blocks[b].size == 1 && blocks[b + 1].size == 2) {
                detail::swap_adjacent_blocks(sf.T, sf.U, blocks[b].start, 1, 2);
                changed = true;
                break;
            }
        }
    }
    detail::refresh_ell(sf);
    sf.mode = SchurMode::raw;
    return sf;
}

/// Orders the complex-pair group and the real group separately, moduli
/// nondecreasing with ties broken by nonincreasing real part and then by
/// nondecreasing |Im|. Set descending to use the reversed modulus order.
inline SchurForm order_blocks(SchurForm sf, bool descending = false)
{
    auto less_than = [descending](const detail::BlockInfo& a, const detail::BlockInfo& b) {
        const double ma = descending ? -a.modulus : a.modulus;
        const double mb = descending ? -b.modulus : b.modulus;
        if (ma != mb) return ma < mb;
        if (a.re != b.re) return a.re > b.re;
        return a.im < b.im;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        const auto blocks = detail::enumerate_blocks(sf.T);
        for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
            if (blocks[b].size != blocks[b + 1].size) continue; // distinct groups
            if (less_than(blocks[b + 1], blocks[b])) {
                detail::swap_adjacent_blocks(sf.T, sf.U, blocks[b].start, blocks[b].size,
                                             blocks[b + 1].size);
                changed = true;
                break;
            }
        }
    }
    detail::refresh_ell(sf);
    sf.mode = SchurMode::raw;
    return sf;
}

/// Rotates every 2 x 2 block into lambda_r form: equal diagonal entries,
/// z12 z21 < 0, z12 + z21 > 0. The quantity (z11 - z22, z12 + z21) rotates
/// as a plane vector under the 2-angle Givens similarity, so one rotation
/// aligns it with (0, r).
inline SchurForm standardize_lambda_r(SchurForm sf)
{
    for (const auto& b : detail::enumerate_blocks(sf.T)) {
        if (b.size != 2) continue;
        const Index p = b.start;
        const double v1 = sf.T(p, p) - sf.T(p + 1, p + 1);
        const double v2 = sf.T(p, p + 1) + sf.T(p + 1, p);
        if (v1 != 0.0 || v2 != 0.0) {
            const double phi = 0.5 * std::atan2(v1, v2);
            const GivensRotation g{p, p + 1, phi};
            apply_givens_rows(g, sf.T, GivensSide::left_transpose);
            apply_givens_cols(g, sf.T);
            apply_givens_cols(g, sf.U);
        }
        if (sf.T(p, p + 1) * sf.T(p + 1, p) >= 0.0) {
            fail_invariant("standardize_lambda_r: block has real eigenvalues (mis-split block)");
        }
        if (sf.T(p, p + 1) + sf.T(p + 1, p) < 0.0 ||
            (sf.T(p, p + 1) + sf.T(p + 1, p) == 0.0 && sf.T(p, p + 1) < 0.0)) {
            sf.T.row(p + 1) *= -1.0;
            sf.T.col(p + 1) *= -1.0;
            sf.U.col(p + 1) *= -1.0;
        }
    }
    sf.mode = SchurMode::lambda_r;
    return sf;
}

/// Standardizes a nonsingular 2 x 2 matrix into qd form: returns the block
/// and the orthogonal similarity W with W^T Z W in qd form. The similarity
/// is built from the right singular vectors, so d1, d2 are the singular
/// values of Z and the result is invariant under orthogonal pre-similarity.
inline std::pair<TwoByTwoBlock, Matrix> standardize_qd_block(const Matrix& Z)
{
    if (Z.rows() != 2 || Z.cols() != 2) fail_domain("standardize_qd_block: Z must be 2 x 2");
    if (!Z.allFinite()) fail_domain("standardize_qd_block: non-finite entry");
    Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double d1 = svd.singularValues()[0];
    const double d2 = svd.singularValues()[1];
    if (d2 <= 0.0) fail_domain("standardize_qd_block: Z is singular");

    Matrix W = svd.matrixV();
    if (W.determinant() < 0.0) W.col(1) *= -1.0;
    Matrix Zhat = W.transpose() * Z * W;
    if (Zhat(0, 1) < 0.0) {
        Zhat.row(1) *= -1.0;
        Zhat.col(1) *= -1.0;
        W.col(1) *= -1.0;
    }
    TwoByTwoBlock blk;
    blk.Z = Zhat;
    blk.standardization = SchurMode::qd;
    blk.d1 = d1;
    blk.d2 = d2;
    blk.c = Zhat(0, 0) / d1;
    blk.s = Zhat(0, 1) / d2;
    return {blk, W};
}

/// qd-standardizes every 2 x 2 diagonal block of an (ordered) Schur form.
inline SchurForm standardize_qd(SchurForm sf)
{
    for (const auto& b : detail::enumerate_blocks(sf.T)) {
        if (b.size != 2) continue;
        const Index p = b.start;
        auto [blk, W] = standardize_qd_block(sf.T.block(p, p, 2, 2));
        sf.T.middleRows(p, 2) = (W.transpose() * sf.T.middleRows(p, 2)).eval();
        sf.T.middleCols(p, 2) = (sf.T.middleCols(p, 2) * W).eval();
        sf.U.middleCols(p, 2) = (sf.U.middleCols(p, 2) * W).eval();
        sf.T.block(p, p, 2, 2) = blk.Z;
    }
    sf.mode = SchurMode::qd;
    return sf;
}

/// Ordered qd Schur form of a square matrix.
inline SchurForm ordered_qd_schur(const Matrix& A)
{
    return standardize_qd(order_blocks(real_schur(A)));
}

/// Full Schur-ON pipeline: normalize, decompose the advance matrix, order the
/// blocks and qd-standardize them. The returned pair is output normal with an
/// ordered qd Schur advance matrix; for distinct eigenvalues it is unique up
/// to the remaining diagonal unitary freedom.
inline std::pair<OutputPair, SchurForm> schur_on(const OutputPair& pair)
{
    auto [on_pair, t] = to_output_normal(pair);
    SchurForm sf = ordered_qd_schur(on_pair.A);
    OutputPair out;
    out.A = sf.T;
    out.C = on_pair.C * sf.U;
    return {out, sf};
}

/// Diagnostic for the block structure of a similarity between two ordered
/// Schur forms: partitions the rows by groups of (near-)equal eigenvalues and
/// reports the largest |U| entry outside the group-diagonal blocks.
struct BlockDiagonalReport {
    std::vector<std::pair<Index, Index>> groups; ///< (start row, row count)
    double max_offblock = 0.0;
};

inline BlockDiagonalReport block_diagonal_structure_check(const SchurForm& a, const SchurForm& b,
                                                          const Matrix& U, double group_tol = 1e-4)
{
    if (a.n() != b.n() || U.rows() != a.n() || U.cols() != a.n()) {
        fail_domain("block_diagonal_structure_check: dimension mismatch");
    }
    const auto blocks = detail::enumerate_blocks(a.T);
    BlockDiagonalReport report;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const bool same_group =
            k > 0 && std::hypot(blocks[k].re - blocks[k - 1].re, blocks[k].im - blocks[k - 1].im) <=
                         group_tol;
        if (same_group) {
            report.groups.back().second += blocks[k].size;
        } else {
            report.groups.emplace_back(blocks[k].start, blocks[k].size);
        }
    }
    for (const auto& [start, rows] : report.groups) {
        for (Index i = 0; i < U.rows(); ++i) {
            for (Index j = start; j < start + rows; ++j) {
                if (i >= start && i < start + rows) continue;
                report.max_offblock = std::max(report.max_offblock, std::abs(U(i, j)));
            }
        }
    }
    return report;
}

} // namespace onf
