#pragma once

#include <cmath>
#include <variant>

#include "onf/hoon.hpp"
#include "onf/orp.hpp"
#include "onf/otson.hpp"
#include "onf/types.hpp"

namespace onf {

/// Identifies one angle of a staged parameterization.
struct AngleIndex {
    Index stage = 0; ///< 0 .. n-1
    Index index = 0; ///< 0 .. (angles in that stage) - 1
};

/// Implicit view of the stack [C; A] of a staged parameterization. A and C
/// are never materialized; matrix-vector products walk the sparse factor
/// chain in O(nd) multiplies. The embedded counter accumulates across calls
/// on this instance; pass a per-call counter for concurrent use.
class ImplicitStack {
public:
    explicit ImplicitStack(OtsonParams params) : params_(std::move(params))
    {
        otson().validate();
    }

    explicit ImplicitStack(HoonParams params) : params_(std::move(params))
    {
        hoon().validate();
        c11_ = hoon().c11();
    }

    bool is_otson() const { return std::holds_alternative<OtsonParams>(params_); }
    const OtsonParams& otson() const { return std::get<OtsonParams>(params_); }
    const HoonParams& hoon() const { return std::get<HoonParams>(params_); }

    Index n() const { return is_otson() ? otson().n() : hoon().n(); }
    Index d() const { return is_otson() ? otson().d() : hoon().d; }
    double c11() const { return c11_; }

    MultiplyCounter& counter() const { return counter_; }

private:
    std::variant<OtsonParams, HoonParams> params_;
    double c11_ = 1.0;
    mutable MultiplyCounter counter_;
};

namespace detail {

// Embedded plane of an OTSON stage factor: family coordinate 0 maps to the
// stage column k, coordinates 1..d map to the last d stack rows n..n+d-1.
// f.j >= 1 always, so the mapped plane stays ordered.
inline GivensRotation map_otson_plane(const OrpFactor& f, double theta, Index stage, Index n)
{
    const Index a = (f.i == 0) ? stage : n + f.i - 1;
    return {a, n + f.j - 1, theta};
}

// Embedded plane of a HOON stage factor for zero-based stage k < n-1:
// family coordinates 0..d-1 map to the top rows, coordinate d maps to
// stack row d+k.
inline GivensRotation map_hoon_plane(const OrpFactor& f, double theta, Index stage, Index d)
{
    return {f.i, (f.j == d) ? d + stage : f.j, theta};
}

// Applies the stage-k OTSON factor (or its derivative in one angle) to w.
inline void apply_otson_stage(const OtsonParams& p, Index stage, Eigen::Ref<Vector> w,
                              Index tangent_index, MultiplyCounter* counter)
{
    const Index n = p.n();
    const Vector& th = p.thetas[static_cast<std::size_t>(stage)];
    if (p.family.kind == OrpKind::householder) {
        if (tangent_index >= 0) fail_domain("gradients need a givens family");
        const Vector u = householder_normal(th);
        const Index d = p.d();
        Vector active(d + 1);
        active[0] = w[stage];
        active.tail(d) = w.tail(d);
        const double t = 2.0 * u.dot(active);
        active -= t * u;
        count_multiplies(counter, static_cast<std::uint64_t>(2 * (d + 1) + 1));
        w[stage] = active[0];
        w.tail(d) = active.tail(d);
        return;
    }
    const auto pattern = orp_factor_pattern(p.family);
    // product order: rightmost written factor acts first
    for (auto it = pattern.rbegin(); it != pattern.rend(); ++it) {
        const GivensRotation g = map_otson_plane(*it, th[it->theta_index], stage, n);
        if (it->theta_index == tangent_index) {
            apply_givens_tangent(g, w, GivensSide::left, counter);
        } else {
            apply_givens(g, w, GivensSide::left, counter);
        }
    }
}

inline void apply_hoon_stage(const HoonParams& p, Index stage, Eigen::Ref<Vector> w,
                             Index tangent_index, MultiplyCounter* counter)
{
    const Index d = p.d;
    const bool last = (stage == p.n() - 1);
    const OrpFamily family = last ? OrpFamily::q3(d) : OrpFamily::q3(d + 1);
    const Vector& th = p.thetas[static_cast<std::size_t>(stage)];
    const auto pattern = orp_factor_pattern(family);
    for (auto it = pattern.rbegin(); it != pattern.rend(); ++it) {
        const GivensRotation g =
            last ? GivensRotation{it->i, it->j, th[it->theta_index]}
                 : map_hoon_plane(*it, th[it->theta_index], stage, d);
        if (it->theta_index == tangent_index) {
            apply_givens_tangent(g, w, GivensSide::left, counter);
        } else {
            apply_givens(g, w, GivensSide::left, counter);
        }
    }
}

} // namespace detail

/// [C; A] v through the factor chain; O(nd) multiplies (at most 4nd + 2 for
/// the givens families).
inline Vector stack_matvec(const ImplicitStack& s, const Vector& v,
                           MultiplyCounter* counter = nullptr)
{
    const Index n = s.n();
    const Index d = s.d();
    if (v.size() != n) fail_domain("stack_matvec: vector length mismatch");
    MultiplyCounter local;

    Vector out(n + d);
    if (s.is_otson()) {
        Vector w = Vector::Zero(n + d);
        w.head(n) = v;
        for (Index k = 0; k < n; ++k) {
            detail::apply_otson_stage(s.otson(), k, w, -1, &local);
        }
        out = w;
    } else {
        const HoonParams& p = s.hoon();
        Vector w = Vector::Zero(n + d - 1);
        // [0; P(gamma) v]
        w[d - 1] = v[n - 1];
        w[d] = p.gamma * v[0];
        for (Index i = 1; i + 1 < n; ++i) w[d + i] = v[i];
        count_multiplies(&local, 1);
        for (Index k = n - 1; k >= 0; --k) {
            detail::apply_hoon_stage(p, k, w, -1, &local);
        }
        out[0] = s.c11() * v[0];
        count_multiplies(&local, 1);
        out.segment(1, d - 1) = w.head(d - 1);
        out.tail(n) = w.tail(n);
    }
    s.counter().multiplies += local.multiplies;
    count_multiplies(counter, local.multiplies);
    return out;
}

inline Vector advance_matvec(const ImplicitStack& s, const Vector& v,
                             MultiplyCounter* counter = nullptr)
{
    return stack_matvec(s, v, counter).tail(s.n());
}

inline Vector measure_matvec(const ImplicitStack& s, const Vector& v,
                             MultiplyCounter* counter = nullptr)
{
    return stack_matvec(s, v, counter).head(s.d());
}

/// Derivative of stack_matvec with respect to one angle, computed by
/// replacing that angle's factor with its derivative in the product chain
/// (exact, and the same O(nd) cost).
inline Vector stack_matvec_grad(const ImplicitStack& s, const Vector& v, AngleIndex which,
                                MultiplyCounter* counter = nullptr)
{
    const Index n = s.n();
    const Index d = s.d();
    if (v.size() != n) fail_domain("stack_matvec_grad: vector length mismatch");
    if (which.stage < 0 || which.stage >= n) fail_domain("stack_matvec_grad: stage out of range");
    MultiplyCounter local;

    Vector out(n + d);
    if (s.is_otson()) {
        const OtsonParams& p = s.otson();
        if (p.family.kind == OrpKind::householder) {
            fail_domain("stack_matvec_grad: gradients need a givens family");
        }
        if (which.index < 0 || which.index >= d) {
            fail_domain("stack_matvec_grad: angle index out of range");
        }
        Vector w = Vector::Zero(n + d);
        w.head(n) = v;
        for (Index k = 0; k < n; ++k) {
            detail::apply_otson_stage(p, k, w, k == which.stage ? which.index : Index{-1}, &local);
        }
        out = w;
    } else {
        const HoonParams& p = s.hoon();
        const Index stage_len = (which.stage == n - 1) ? d - 1 : d;
        if (which.index < 0 || which.index >= stage_len) {
            fail_domain("stack_matvec_grad: angle index out of range");
        }
        Vector w = Vector::Zero(n + d - 1);
        w[d - 1] = v[n - 1];
        w[d] = p.gamma * v[0];
        for (Index i = 1; i + 1 < n; ++i) w[d + i] = v[i];
        count_multiplies(&local, 1);
        for (Index k = n - 1; k >= 0; --k) {
            detail::apply_hoon_stage(p, k, w, k == which.stage ? which.index : Index{-1}, &local);
        }
        out[0] = 0.0; // the C(0,0) row does not depend on the angles
        out.segment(1, d - 1) = w.head(d - 1);
        out.tail(n) = w.tail(n);
    }
    s.counter().multiplies += local.multiplies;
    count_multiplies(counter, local.multiplies);
    return out;
}

/// Dense debug bridge: rebuilds (A, C) through the stage recurrences.
inline OutputPair materialize(const ImplicitStack& s)
{
    return s.is_otson() ? otson_reconstruct(s.otson()) : hoon_reconstruct(s.hoon());
}

} // namespace onf
