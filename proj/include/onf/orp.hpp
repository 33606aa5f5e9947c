#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "onf/givens.hpp"
#include "onf/types.hpp"

namespace onf {

/// Orthogonal reduction parameterization families. Each family is a minimal
/// (m-1)-parameter set of m x m orthogonal matrices Q(theta) such that for
/// every vector h there is a unique theta with Q(theta)^T h = ||h|| e_target.
///
///   q1:  G_{0,m-1}(t_{m-2}) G_{0,m-2}(t_{m-3}) ... G_{0,1}(t_0),  target e_0
///   q2:  G_{m-2,m-1}(t_{m-2}) ... G_{1,2}(t_1) G_{0,1}(t_0),      target e_0
///   q3:  G_{0,1}(t_0) G_{1,2}(t_1) ... G_{m-2,m-1}(t_{m-2}),      target e_{m-1}
///
/// The extended-range angle (the rightmost written factor for q1/q2, the last
/// for q3) lives in (-pi, pi] and fixes the sign of the reduced pivot; all
/// other angles live in (-pi/2, pi/2]. The householder family is the unsigned
/// alternative: reflections I - 2uu^T with u in spherical coordinates; it only
/// pins the reduced direction, not its sign.
enum class OrpKind { q1, q2, q3, householder };

struct OrpFamily {
    OrpKind kind = OrpKind::q1;
    Index m = 2;      ///< ambient dimension
    Index target = 0; ///< coordinate the family reduces onto (zero based)

    static OrpFamily q1(Index d) { return {OrpKind::q1, d + 1, 0}; }
    static OrpFamily q2(Index d) { return {OrpKind::q2, d + 1, 0}; }
    static OrpFamily q3(Index m) { return {OrpKind::q3, m, m - 1}; }
    static OrpFamily householder(Index m, Index target) { return {OrpKind::householder, m, target}; }

    Index parameter_count() const { return m - 1; }
    bool is_unsigned() const { return kind == OrpKind::householder; }

    bool operator==(const OrpFamily&) const = default;
};

struct OrpParam {
    OrpFamily family;
    Vector thetas; ///< length m - 1
};

/// Block partition of a reduction member (the paper's mu / x / y / O-tilde
/// split): for target e_0 the matrix reads [mu, y^T; x, O], for target
/// e_{m-1} it reads [O, x; y^T, mu].
struct OrpBlocks {
    double mu = 1.0;
    Vector x;
    Vector y;
    Matrix o_tilde;
};

/// One Givens plane of a family member plus the index of the angle it uses.
struct OrpFactor {
    Index i = 0;
    Index j = 1;
    Index theta_index = 0;
};

namespace detail {

// Folds an angle into the restricted domain (-pi/2, pi/2].
inline double fold_half(double theta)
{
    if (theta <= -0.5 * M_PI) return theta + M_PI;
    if (theta > 0.5 * M_PI) return theta - M_PI;
    return theta;
}

// atan2 lands in [-pi, pi]; the domain convention is half open.
inline double fold_full(double theta)
{
    return (theta <= -M_PI) ? M_PI : theta;
}

inline bool in_restricted(double t) { return t > -0.5 * M_PI && t <= 0.5 * M_PI; }
inline bool in_extended(double t) { return t > -M_PI && t <= M_PI; }

} // namespace detail

/// Givens plane pattern of a family member in the paper's written
/// (left-to-right) product order. Empty for the householder family.
inline std::vector<OrpFactor> orp_factor_pattern(const OrpFamily& family)
{
    const Index m = family.m;
    std::vector<OrpFactor> pattern;
    if (m < 2) return pattern;
    pattern.reserve(static_cast<std::size_t>(m - 1));
    switch (family.kind) {
    case OrpKind::q1:
        for (Index p = 0; p < m - 1; ++p) pattern.push_back({0, m - 1 - p, m - 2 - p});
        break;
    case OrpKind::q2:
        for (Index p = 0; p < m - 1; ++p) pattern.push_back({m - 2 - p, m - 1 - p, m - 2 - p});
        break;
    case OrpKind::q3:
        for (Index p = 0; p < m - 1; ++p) pattern.push_back({p, p + 1, p});
        break;
    case OrpKind::householder:
        break;
    }
    return pattern;
}

namespace detail {

inline void check_shape(const OrpParam& p)
{
    if (p.thetas.size() != p.family.parameter_count()) {
        fail_domain("orp parameter has " + std::to_string(p.thetas.size()) +
                    " angles, family expects " + std::to_string(p.family.parameter_count()));
    }
}

// Index of the extended-range angle slot; -1 when the family has none.
inline Index extended_slot(const OrpFamily& family)
{
    switch (family.kind) {
    case OrpKind::q1:
    case OrpKind::q2:
        return 0;
    case OrpKind::q3:
        return family.m - 2;
    case OrpKind::householder:
        return family.m - 2;
    }
    return -1;
}

// Householder unit normal from spherical angles: the first m-2 angles are
// polar (domain [0, pi]), the last is azimuthal (domain (-pi, pi]).
inline Vector householder_normal(const Vector& thetas)
{
    const Index m = thetas.size() + 1;
    Vector u(m);
    double prefix = 1.0;
    for (Index i = 0; i < m - 1; ++i) {
        u[i] = prefix * std::cos(thetas[i]);
        prefix *= std::sin(thetas[i]);
    }
    u[m - 1] = prefix;
    return u;
}

inline Vector householder_angles(const Vector& u)
{
    const Index m = u.size();
    Vector thetas(m - 1);
    for (Index i = 0; i < m - 2; ++i) {
        thetas[i] = std::atan2(u.segment(i + 1, m - i - 1).norm(), u[i]);
    }
    if (m >= 2) thetas[m - 2] = std::atan2(u[m - 1], u[m - 2]);
    return thetas;
}

} // namespace detail

/// Checks the family's angle-domain restrictions.
inline bool orp_in_domain(const OrpParam& p)
{
    detail::check_shape(p);
    if (p.family.kind == OrpKind::householder) {
        for (Index i = 0; i < p.thetas.size() - 1; ++i) {
            if (p.thetas[i] < 0.0 || p.thetas[i] > M_PI) return false;
        }
        if (p.thetas.size() > 0 && !detail::in_extended(p.thetas[p.thetas.size() - 1])) return false;
        return true;
    }
    const Index ext = detail::extended_slot(p.family);
    for (Index i = 0; i < p.thetas.size(); ++i) {
        if (i == ext ? !detail::in_extended(p.thetas[i]) : !detail::in_restricted(p.thetas[i])) {
            return false;
        }
    }
    return true;
}

inline void orp_require_domain(const OrpParam& p)
{
    if (!orp_in_domain(p)) fail_domain("orp angle outside the family's domain");
}

/// Dense m x m member Q(theta); orthogonal by construction.
inline Matrix orp_matrix(const OrpParam& p)
{
    orp_require_domain(p);
    const Index m = p.family.m;
    if (p.family.kind == OrpKind::householder) {
        const Vector u = detail::householder_normal(p.thetas);
        return Matrix::Identity(m, m) - 2.0 * u * u.transpose();
    }
    Matrix Q = Matrix::Identity(m, m);
    const auto pattern = orp_factor_pattern(p.family);
    // Product F_1 F_2 ... F_k accumulated by left-applying factors right to left.
    for (auto it = pattern.rbegin(); it != pattern.rend(); ++it) {
        apply_givens_rows({it->i, it->j, p.thetas[it->theta_index]}, Q, GivensSide::left);
    }
    return Q;
}

/// Applies Q(theta)^T to a vector of length m in place.
inline void orp_apply_transpose(const OrpParam& p, Eigen::Ref<Vector> v,
                                MultiplyCounter* counter = nullptr)
{
    detail::check_shape(p);
    if (v.size() != p.family.m) fail_domain("orp_apply_transpose: dimension mismatch");
    if (p.family.kind == OrpKind::householder) {
        const Vector u = detail::householder_normal(p.thetas);
        const double t = 2.0 * u.dot(v);
        v -= t * u;
        count_multiplies(counter, static_cast<std::uint64_t>(2 * p.family.m + 1));
        return;
    }
    // Q^T = F_k^T ... F_1^T: the leftmost written factor is applied first.
    for (const auto& f : orp_factor_pattern(p.family)) {
        apply_givens({f.i, f.j, p.thetas[f.theta_index]}, v, GivensSide::left_transpose, counter);
    }
}

/// Unique angles with Q(theta)^T h = ||h|| e_target (signed families) or
/// Q(theta)^T h parallel to e_target (householder). Exact-zero pivot pairs
/// resolve to angle 0, so the map is total for the signed families.
inline OrpParam orp_reduce(const OrpFamily& family, const Vector& h)
{
    if (h.size() != family.m) {
        fail_domain("orp_reduce: vector has length " + std::to_string(h.size()) +
                    ", family ambient dimension is " + std::to_string(family.m));
    }
    const Index m = family.m;
    Vector thetas = Vector::Zero(m - 1);
    Vector v = h;
    switch (family.kind) {
    case OrpKind::q1:
        for (Index i = m - 2; i >= 1; --i) {
            thetas[i] = detail::fold_half(std::atan2(-v[i + 1], v[0]));
            apply_givens({0, i + 1, thetas[i]}, v, GivensSide::left_transpose);
        }
        if (m >= 2) {
            thetas[0] = detail::fold_full(std::atan2(-v[1], v[0]));
            apply_givens({0, 1, thetas[0]}, v, GivensSide::left_transpose);
        }
        break;
    case OrpKind::q2:
        for (Index i = m - 2; i >= 1; --i) {
            thetas[i] = detail::fold_half(std::atan2(-v[i + 1], v[i]));
            apply_givens({i, i + 1, thetas[i]}, v, GivensSide::left_transpose);
        }
        if (m >= 2) {
            thetas[0] = detail::fold_full(std::atan2(-v[1], v[0]));
            apply_givens({0, 1, thetas[0]}, v, GivensSide::left_transpose);
        }
        break;
    case OrpKind::q3:
        for (Index i = 0; i + 2 < m; ++i) {
            thetas[i] = detail::fold_half(std::atan2(v[i], v[i + 1]));
            apply_givens({i, i + 1, thetas[i]}, v, GivensSide::left_transpose);
        }
        if (m >= 2) {
            thetas[m - 2] = detail::fold_full(std::atan2(v[m - 2], v[m - 1]));
            apply_givens({m - 2, m - 1, thetas[m - 2]}, v, GivensSide::left_transpose);
        }
        break;
    case OrpKind::householder: {
        const double norm = h.norm();
        if (norm == 0.0) fail_domain("orp_reduce: zero vector for unsigned family");
        const double sign = h[family.target] >= 0.0 ? 1.0 : -1.0;
        Vector w = h;
        w[family.target] += sign * norm;
        thetas = detail::householder_angles(w / w.norm());
        break;
    }
    }
    return {family, thetas};
}

/// Partition of a target-e_0 member per the paper's [mu, y^T; x, O] layout.
inline OrpBlocks orp_blocks(const OrpParam& p)
{
    if (p.family.target != 0) {
        fail_domain("orp_blocks: family must target e_0");
    }
    const Index d = p.family.m - 1;
    const Matrix Q = orp_matrix(p);
    OrpBlocks b;
    b.mu = Q(0, 0);
    b.y = Q.row(0).segment(1, d).transpose();
    b.x = Q.col(0).segment(1, d);
    b.o_tilde = Q.block(1, 1, d, d);
    return b;
}

/// Partition of a target-e_{m-1} member per the [O, x; y^T, mu] layout used
/// by the Hessenberg-observer factors.
inline OrpBlocks orp_blocks_last(const OrpParam& p)
{
    if (p.family.target != p.family.m - 1) {
        fail_domain("orp_blocks_last: family must target e_{m-1}");
    }
    const Index d = p.family.m - 1;
    const Matrix Q = orp_matrix(p);
    OrpBlocks b;
    b.mu = Q(d, d);
    b.x = Q.col(d).head(d);
    b.y = Q.row(d).head(d).transpose();
    b.o_tilde = Q.topLeftCorner(d, d);
    return b;
}

} // namespace onf
