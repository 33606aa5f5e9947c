#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "onf/canonical.hpp"
#include "onf/orp.hpp"
#include "onf/otson.hpp"
#include "onf/pair.hpp"
#include "onf/types.hpp"

namespace onf {

/// Minimal parameterization of a nondegenerate Hessenberg-observer
/// output-normal pair: a scalar gamma with C(0,0) = sqrt(1 - gamma^2),
/// n-1 angle d-vectors (reductions of O(d+1) onto e_d) and one final
/// (d-1)-vector (a reduction of O(d) onto e_{d-1}).
struct HoonParams {
    double gamma = 0.0;
    Index d = 1;
    std::vector<Vector> thetas; ///< n entries: n-1 of length d, last of length d-1

    Index n() const { return static_cast<Index>(thetas.size()); }

    void validate() const
    {
        if (!(gamma >= 0.0 && gamma < 1.0)) {
            fail_domain("hoon params: gamma must lie in [0, 1)");
        }
        if (n() < 2 || d < 1 || d > n()) fail_domain("hoon params: requires n >= 2, n >= d >= 1");
        for (Index k = 0; k + 1 < n(); ++k) {
            orp_require_domain({OrpFamily::q3(d + 1), thetas[static_cast<std::size_t>(k)]});
        }
        orp_require_domain({OrpFamily::q3(d), thetas[static_cast<std::size_t>(n() - 1)]});
    }

    double c11() const { return std::sqrt(1.0 - gamma * gamma); }
};

/// The n x n scaled permutation P(gamma): P(1,0) = gamma, P(k+1,k) = 1 for
/// 1 <= k < n-1, P(0,n-1) = 1 (zero-based indices). P^T P = diag(gamma^2, 1, ..., 1).
inline Matrix scaled_permutation(Index n, double gamma)
{
    if (n < 2) fail_domain("scaled_permutation: requires n >= 2");
    if (!(gamma >= 0.0 && gamma < 1.0)) fail_domain("scaled_permutation: gamma must lie in [0, 1)");
    Matrix P = Matrix::Zero(n, n);
    P(1, 0) = gamma;
    for (Index k = 1; k + 1 < n; ++k) P(k + 1, k) = 1.0;
    P(0, n - 1) = 1.0;
    return P;
}

/// Running subblocks of the stage product: N_k is (d+k) x d, H_k is
/// (d+k) x k and upper triangular in the d-shifted sense (column j supported
/// on rows 0 .. d+j).
struct XState {
    Matrix N;
    Matrix H;
};

/// Advances the recurrences N_k = [N_{k-1} O_k; y_k^T],
/// H_k = [H_{k-1}, N_{k-1} x_k; 0, mu_k] through `stages` <= n-1 stages.
inline XState hoon_x_state(const HoonParams& params, Index stages)
{
    const Index d = params.d;
    XState x;
    x.N = Matrix::Zero(d + stages, d);
    x.N.topLeftCorner(d, d) = Matrix::Identity(d, d);
    x.H = Matrix::Zero(d + stages, stages);
    const OrpFamily family = OrpFamily::q3(d + 1);
    for (Index k = 0; k < stages; ++k) {
        const OrpBlocks b = orp_blocks_last({family, params.thetas[static_cast<std::size_t>(k)]});
        x.H.col(k).head(d + k) = x.N.topRows(d + k) * b.x;
        x.H(d + k, k) = b.mu;
        x.N.topRows(d + k) = (x.N.topRows(d + k) * b.o_tilde).eval();
        x.N.row(d + k) = b.y.transpose();
    }
    return x;
}

/// Rebuilds the pair from (gamma, thetas). The (C-hat; A) stack is the stage
/// product applied to [0; P(gamma)], so A comes out upper Hessenberg with
/// A(1,0) = gamma mu_1 and A(k+1,k) = mu_{k+1}; the first row of C is
/// (sqrt(1-gamma^2), 0, ..., 0).
inline OutputPair hoon_reconstruct(const HoonParams& params)
{
    params.validate();
    const Index n = params.n();
    const Index d = params.d;

    XState x = hoon_x_state(params, n - 1);
    const Matrix Vd = orp_matrix({OrpFamily::q3(d), params.thetas[static_cast<std::size_t>(n - 1)]});
    x.N = (x.N * Vd).eval();

    // stack = [column product] * P(gamma): column 0 is gamma * H(:,0),
    // columns 1..n-2 are H(:,1..n-2), column n-1 is the last column of N.
    Matrix S(n + d - 1, n);
    S.col(0) = params.gamma * x.H.col(0);
    if (n >= 3) S.middleCols(1, n - 2) = x.H.rightCols(n - 2);
    S.col(n - 1) = x.N.col(d - 1);

    OutputPair out;
    out.A = S.bottomRows(n);
    out.C = Matrix::Zero(d, n);
    out.C(0, 0) = params.c11();
    out.C.bottomRows(d - 1) = S.topRows(d - 1);
    return out;
}

/// Factors a standardized nondegenerate HOON pair: gamma comes from C(0,0)
/// and stage k's angles zero the top d rows of column k of the running
/// (C-hat; A) stack, pushing its mass onto row d+k with positive sign.
inline HoonParams hoon_factor(const OutputPair& pair)
{
    pair.validate();
    const Index n = pair.n();
    const Index d = pair.d();
    if (n < 2) fail_domain("hoon_factor: requires n >= 2");
    const FormClassification cls = classify(pair);
    if (cls.form != CanonicalForm::ho) {
        fail_domain("hoon_factor: pair is not in Hessenberg-observer form");
    }
    detail::require_output_normal(pair, "hoon_factor");
    const double c11 = pair.C(0, 0);
    if (c11 < 0.0) fail_domain("hoon_factor: pair must be standardized (C(0,0) >= 0)");
    if (c11 >= 1.0 - 1e-8) {
        fail_domain("hoon_factor: degenerate pair (C(0,0) = " + std::to_string(c11) + ")");
    }
    if (c11 <= 1e-10) {
        fail_domain("hoon_factor: C(0,0) = 0 lies outside the representation domain (gamma = 1)");
    }

    HoonParams params;
    params.gamma = std::sqrt(std::max(0.0, 1.0 - c11 * c11));
    params.d = d;
    params.thetas.resize(static_cast<std::size_t>(n));

    Matrix W(n + d - 1, n);
    W.topRows(d - 1) = pair.C.bottomRows(d - 1);
    W.bottomRows(n) = pair.A;

    const OrpFamily family = OrpFamily::q3(d + 1);
    Vector h(d + 1);
    for (Index k = 0; k + 1 < n; ++k) {
        h.head(d) = W.col(k).head(d);
        h[d] = W(d + k, k);
        const OrpParam p = orp_reduce(family, h);
        params.thetas[static_cast<std::size_t>(k)] = p.thetas;
        for (Index c = 0; c < n; ++c) {
            h.head(d) = W.col(c).head(d);
            h[d] = W(d + k, c);
            orp_apply_transpose(p, h);
            W.col(c).head(d) = h.head(d);
            W(d + k, c) = h[d];
        }
    }
    const OrpFamily last = OrpFamily::q3(d);
    Vector hd = W.col(n - 1).head(d);
    const OrpParam p = orp_reduce(last, hd);
    params.thetas[static_cast<std::size_t>(n - 1)] = p.thetas;
    return params;
}

/// Per-stage mu values, mu_k = A(k+1,k) of the reconstruction for k >= 1 and
/// gamma mu_0 = A(1,0).
inline Vector hoon_mu(const HoonParams& params)
{
    params.validate();
    Vector mu(params.n() - 1);
    const OrpFamily family = OrpFamily::q3(params.d + 1);
    for (Index k = 0; k + 1 < params.n(); ++k) {
        mu[k] = orp_blocks_last({family, params.thetas[static_cast<std::size_t>(k)]}).mu;
    }
    return mu;
}

/// Parameter-domain classification matching otson_domain_check: strict needs
/// all mu_k > 0 and 0 < gamma < 1.
inline ParameterDomain hoon_domain_check(const HoonParams& params, double tol = 1e-10)
{
    const Vector mu = hoon_mu(params);
    if ((mu.cwiseAbs().array() <= tol).any() || params.gamma <= tol) {
        return ParameterDomain::boundary;
    }
    if ((mu.array() > 0.0).all()) return ParameterDomain::strict;
    return ParameterDomain::unreduced;
}

} // namespace onf
