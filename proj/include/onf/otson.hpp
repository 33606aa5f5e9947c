#pragma once

#include <utility>
#include <vector>

#include "onf/canonical.hpp"
#include "onf/orp.hpp"
#include "onf/pair.hpp"
#include "onf/types.hpp"

namespace onf {

/// Minimal parameterization of an observer-triangular output-normal pair:
/// n angle d-vectors, one per stack column, for a reduction family of
/// O(d+1) onto e_0. Stage k contributes the embedded factor that acts on
/// stack coordinates {k} and {n..n+d-1}.
struct OtsonParams {
    OrpFamily family;            ///< q1 or q2 (householder accepted by reconstruct only)
    std::vector<Vector> thetas;  ///< n entries of length d

    Index n() const { return static_cast<Index>(thetas.size()); }
    Index d() const { return family.m - 1; }

    void validate() const
    {
        if (family.target != 0) fail_domain("otson params: family must target e_0");
        if (n() < d() || d() < 1) fail_domain("otson params: requires n >= d >= 1");
        for (const auto& t : thetas) {
            orp_require_domain({family, t});
        }
    }
};

/// Running subblocks of the stage product (lower-triangular L, the bottom
/// rows M, and the trailing-column blocks N, P).
struct GammaState {
    Matrix L; ///< k x k lower triangular
    Matrix M; ///< d x k
    Matrix N; ///< k x d
    Matrix P; ///< d x d
};

/// Advances the product recurrences through the first `stages` stages:
///   L_k = [L_{k-1}, 0; y_k^T M_{k-1}, mu_k],  N_k = [N_{k-1}; y_k^T P_{k-1}],
///   M_k = [O_k M_{k-1}, x_k],                 P_k = O_k P_{k-1}.
inline GammaState gamma_state(const OtsonParams& params, Index stages)
{
    const Index d = params.d();
    GammaState g;
    g.L = Matrix::Zero(stages, stages);
    g.M = Matrix::Zero(d, stages);
    g.N = Matrix::Zero(stages, d);
    g.P = Matrix::Identity(d, d);
    for (Index k = 0; k < stages; ++k) {
        const OrpBlocks b = orp_blocks({params.family, params.thetas[static_cast<std::size_t>(k)]});
        g.L.row(k).head(k) = b.y.transpose() * g.M.leftCols(k);
        g.L(k, k) = b.mu;
        g.N.row(k) = b.y.transpose() * g.P;
        g.M.leftCols(k) = (b.o_tilde * g.M.leftCols(k)).eval();
        g.M.col(k) = b.x;
        g.P = (b.o_tilde * g.P).eval();
    }
    return g;
}

/// Rebuilds the output pair from its stage angles. The stack [C; A] comes out
/// lower triangular with exact zeros above the diagonal band and is output
/// normal up to roundoff in the angle evaluations.
inline OutputPair otson_reconstruct(const OtsonParams& params)
{
    params.validate();
    const Index n = params.n();
    const Index d = params.d();
    const GammaState g = gamma_state(params, n);
    OutputPair out;
    out.C = g.L.topRows(d);
    out.A.resize(n, n);
    out.A.topRows(n - d) = g.L.bottomRows(n - d);
    out.A.bottomRows(d) = g.M;
    return out;
}

/// Factors an OTSON pair into its stage angles by sweeping the stack columns
/// from the right: at stage k the d+1 active entries of column k (row k and
/// the last d rows) are reduced onto e_0 with unit positive pivot.
inline OtsonParams otson_factor(const OutputPair& pair, OrpKind kind = OrpKind::q1)
{
    pair.validate();
    if (kind != OrpKind::q1 && kind != OrpKind::q2) {
        fail_domain("otson_factor: factorization needs a signed e_0 reduction family");
    }
    const FormClassification cls = classify(pair);
    if (cls.form != CanonicalForm::ots) {
        fail_domain("otson_factor: pair is not in observer-triangular form");
    }
    detail::require_output_normal(pair, "otson_factor");

    const Index n = pair.n();
    const Index d = pair.d();
    const OrpFamily family = (kind == OrpKind::q1) ? OrpFamily::q1(d) : OrpFamily::q2(d);

    Matrix W = stack_of(pair);
    OtsonParams params{family, std::vector<Vector>(static_cast<std::size_t>(n))};
    Vector h(d + 1);
    for (Index k = n - 1; k >= 0; --k) {
        h[0] = W(k, k);
        h.tail(d) = W.col(k).tail(d);
        if (h.norm() < 1e-8) {
            fail_domain("otson_factor: zero active column " + std::to_string(k) +
                        " (input not output normal)");
        }
        const OrpParam p = orp_reduce(family, h);
        params.thetas[static_cast<std::size_t>(k)] = p.thetas;
        for (Index c = 0; c <= k; ++c) {
            h[0] = W(k, c);
            h.tail(d) = W.col(c).tail(d);
            orp_apply_transpose(p, h);
            W(k, c) = h[0];
            W.col(c).tail(d) = h.tail(d);
        }
    }
    return params;
}

/// Per-stage mu values (the reconstructed stack diagonal).
inline Vector otson_mu(const OtsonParams& params)
{
    params.validate();
    Vector mu(params.n());
    for (Index k = 0; k < params.n(); ++k) {
        mu[k] = orp_blocks({params.family, params.thetas[static_cast<std::size_t>(k)]}).mu;
    }
    return mu;
}

enum class ParameterDomain { strict, unreduced, boundary };

/// Classifies the parameter vector against the bijection domain: boundary if
/// some |mu_k| <= tol (non-identifiable), strict if all mu_k > 0, otherwise
/// unreduced.
inline ParameterDomain otson_domain_check(const OtsonParams& params, double tol = 1e-10)
{
    const Vector mu = otson_mu(params);
    if ((mu.cwiseAbs().array() <= tol).any()) return ParameterDomain::boundary;
    if ((mu.array() > 0.0).all()) return ParameterDomain::strict;
    return ParameterDomain::unreduced;
}

/// Closed form for the last d+2 rows of A:
///   [ y_{n-1}^T M_{n-2}          mu_{n-1}        0    ]
///   [ y_n^T O_{n-1} M_{n-2}      y_n^T x_{n-1}   mu_n ]
///   [ O_n O_{n-1} M_{n-2}        O_n x_{n-1}     x_n  ]
/// Checked against the recurrence reconstruction before returning.
inline Matrix otson_bottom_rows(const OtsonParams& params)
{
    params.validate();
    const Index n = params.n();
    const Index d = params.d();
    if (n < d + 2) fail_domain("otson_bottom_rows: requires n >= d + 2");

    const GammaState g = gamma_state(params, n - 2);
    const OrpBlocks b1 = orp_blocks({params.family, params.thetas[static_cast<std::size_t>(n - 2)]});
    const OrpBlocks b2 = orp_blocks({params.family, params.thetas[static_cast<std::size_t>(n - 1)]});

    Matrix rows(d + 2, n);
    rows.row(0).head(n - 2) = b1.y.transpose() * g.M;
    rows(0, n - 2) = b1.mu;
    rows(0, n - 1) = 0.0;
    rows.row(1).head(n - 2) = b2.y.transpose() * b1.o_tilde * g.M;
    rows(1, n - 2) = b2.y.dot(b1.x);
    rows(1, n - 1) = b2.mu;
    rows.bottomRows(d).leftCols(n - 2) = b2.o_tilde * b1.o_tilde * g.M;
    rows.bottomRows(d).col(n - 2) = b2.o_tilde * b1.x;
    rows.bottomRows(d).col(n - 1) = b2.x;

    const OutputPair rebuilt = otson_reconstruct(params);
    const double drift = (rebuilt.A.bottomRows(d + 2) - rows).cwiseAbs().maxCoeff();
    if (drift > 1e-12) {
        fail_invariant("otson_bottom_rows: closed form disagrees with the recurrences (drift " +
                       std::to_string(drift) + ")");
    }
    return rows;
}

} // namespace onf
