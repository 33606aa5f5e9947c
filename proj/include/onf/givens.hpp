#pragma once

#include <cmath>
#include <string>

#include "onf/types.hpp"

namespace onf {

/// Plane rotation in coordinates (i, j), i < j, zero based. Its dense matrix
/// G has g_ii = g_jj = cos(theta) and g_ij = -g_ji = sin(theta).
struct GivensRotation {
    Index i = 0;
    Index j = 1;
    double theta = 0.0;
};

enum class GivensSide {
    left,           ///< v <- G v
    left_transpose, ///< v <- G^T v
};

namespace detail {

inline void check_plane(const GivensRotation& g, Index size)
{
    if (g.i < 0 || g.j <= g.i || g.j >= size) {
        fail_domain("givens plane (" + std::to_string(g.i) + "," + std::to_string(g.j) +
                    ") out of range for dimension " + std::to_string(size));
    }
}

} // namespace detail

/// Applies the rotation to a vector. Touches only v[i] and v[j] and costs
/// exactly 4 multiplies.
inline void apply_givens(const GivensRotation& g, Eigen::Ref<Vector> v, GivensSide side,
                         MultiplyCounter* counter = nullptr)
{
    detail::check_plane(g, v.size());
    const double c = std::cos(g.theta);
    const double s = (side == GivensSide::left) ? std::sin(g.theta) : -std::sin(g.theta);
    const double a = v[g.i];
    const double b = v[g.j];
    v[g.i] = c * a + s * b;
    v[g.j] = -s * a + c * b;
    count_multiplies(counter, 4);
}

/// Applies dG/dtheta instead of G. On the (i,j) plane dG/dtheta is the
/// rotation at theta + pi/2; everywhere else it is zero (the embedded
/// identity part differentiates away), so all other entries of v are zeroed.
inline void apply_givens_tangent(const GivensRotation& g, Eigen::Ref<Vector> v, GivensSide side,
                                 MultiplyCounter* counter = nullptr)
{
    detail::check_plane(g, v.size());
    const double shifted = g.theta + 0.5 * M_PI;
    const double c = std::cos(shifted);
    const double s = (side == GivensSide::left) ? std::sin(shifted) : -std::sin(shifted);
    const double a = v[g.i];
    const double b = v[g.j];
    v.setZero();
    v[g.i] = c * a + s * b;
    v[g.j] = -s * a + c * b;
    count_multiplies(counter, 4);
}

/// Rows i and j of M <- the same rows of G M (or G^T M).
inline void apply_givens_rows(const GivensRotation& g, Eigen::Ref<Matrix> M, GivensSide side,
                              MultiplyCounter* counter = nullptr)
{
    detail::check_plane(g, M.rows());
    const double c = std::cos(g.theta);
    const double s = (side == GivensSide::left) ? std::sin(g.theta) : -std::sin(g.theta);
    const Eigen::RowVectorXd a = M.row(g.i);
    const Eigen::RowVectorXd b = M.row(g.j);
    M.row(g.i) = c * a + s * b;
    M.row(g.j) = -s * a + c * b;
    count_multiplies(counter, 4 * static_cast<std::uint64_t>(M.cols()));
}

/// Columns i and j of M <- the same columns of M G (right multiplication).
inline void apply_givens_cols(const GivensRotation& g, Eigen::Ref<Matrix> M,
                              MultiplyCounter* counter = nullptr)
{
    detail::check_plane(g, M.cols());
    const double c = std::cos(g.theta);
    const double s = std::sin(g.theta);
    const Vector a = M.col(g.i);
    const Vector b = M.col(g.j);
    M.col(g.i) = c * a - s * b;
    M.col(g.j) = s * a + c * b;
    count_multiplies(counter, 4 * static_cast<std::uint64_t>(M.rows()));
}

inline Matrix givens_matrix(const GivensRotation& g, Index m)
{
    detail::check_plane(g, m);
    Matrix G = Matrix::Identity(m, m);
    const double c = std::cos(g.theta);
    const double s = std::sin(g.theta);
    G(g.i, g.i) = c;
    G(g.j, g.j) = c;
    G(g.i, g.j) = s;
    G(g.j, g.i) = -s;
    return G;
}

/// Diagonal matrix of +-1 entries. E * E = I exactly.
struct SignatureMatrix {
    Eigen::VectorXi signs;

    static SignatureMatrix identity(Index n)
    {
        return SignatureMatrix{Eigen::VectorXi::Ones(n)};
    }

    Index size() const { return signs.size(); }

    Matrix dense() const
    {
        Matrix E = Matrix::Zero(signs.size(), signs.size());
        for (Index i = 0; i < signs.size(); ++i) E(i, i) = static_cast<double>(signs[i]);
        return E;
    }

    bool is_identity() const { return (signs.array() == 1).all(); }
};

} // namespace onf
