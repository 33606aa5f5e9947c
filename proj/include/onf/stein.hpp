#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "onf/pair.hpp"
#include "onf/types.hpp"

namespace onf {

inline double spectral_radius(const Matrix& A)
{
    if (A.rows() != A.cols()) fail_domain("spectral_radius: matrix must be square");
    if (A.rows() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) fail_numerical("spectral_radius: eigen solver failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

constexpr double kStabilityMargin = 1e-10;

inline bool is_stable(const Matrix& A)
{
    return spectral_radius(A) < 1.0 - kStabilityMargin;
}

/// Solves the Stein equation P - A P A^T = B B^T by the squaring/doubling
/// iteration P <- P + M P M^T, M <- M^2; converges geometrically for
/// spectral radius < 1. Marginally stable inputs are rejected because the
/// equation then has no unique bounded solution.
inline Matrix solve_stein(const Matrix& A, const Matrix& B)
{
    if (A.rows() != A.cols()) fail_domain("solve_stein: A must be square");
    if (B.rows() != A.rows()) fail_domain("solve_stein: B must have as many rows as A");
    const double rho = spectral_radius(A);
    if (rho >= 1.0 - kStabilityMargin) {
        if (rho < 1.0 + kStabilityMargin) {
            fail_domain("solve_stein: A is marginally stable (spectral radius " +
                        std::to_string(rho) + "), no unique bounded solution");
        }
        fail_domain("solve_stein: A is unstable (spectral radius " + std::to_string(rho) + ")");
    }
    Matrix P = B * B.transpose();
    Matrix M = A;
    for (int iter = 0; iter < 128; ++iter) {
        const Matrix increment = M * P * M.transpose();
        P += increment;
        P = 0.5 * (P + P.transpose());
        if (increment.norm() <= 1e-14 * std::max(1.0, P.norm())) return P;
        M = (M * M).eval();
    }
    fail_numerical("solve_stein: doubling iteration did not converge within 128 steps");
}

/// Dual Stein equation P - A^T P A = C^T C; same code path as solve_stein.
inline Matrix solve_dual_stein(const Matrix& A, const Matrix& C)
{
    if (C.cols() != A.rows()) fail_domain("solve_dual_stein: C must have n columns");
    return solve_stein(A.transpose(), C.transpose());
}

/// Grammian-based conditioning diagnostics.
struct GrammianReport {
    Matrix P_ctrl;      ///< controllability Grammian P_{A,B}
    Matrix P_obs;       ///< observability Grammian P_{A*,C*}
    Vector hankel;      ///< Hankel singular values, nonincreasing
    double kappa_ctrl = 1.0;
    double kappa_obs = 1.0;
    double kappa_sigma = 1.0;
    double excess = 1.0; ///< kappa_ctrl * kappa_obs / kappa_sigma^2, >= 1 up to roundoff
};

namespace detail {

inline double symmetric_condition_number(const Matrix& P)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) fail_numerical("condition number: Grammian is numerically singular");
    return hi / lo;
}

} // namespace detail

/// Computes both Grammians, their condition numbers, the Hankel singular
/// values (eigenvalues of the symmetrized product L_obs^T P_ctrl L_obs) and
/// the excess-conditioning ratio.
inline GrammianReport grammian_report(const Matrix& A, const Matrix& B, const Matrix& C)
{
    if (B.size() == 0) fail_domain("grammian_report: B required");
    if (C.size() == 0) fail_domain("grammian_report: C required");
    if (B.norm() == 0.0 || C.norm() == 0.0) fail_domain("grammian_report: B and C must be nonzero");
    GrammianReport report;
    report.P_ctrl = solve_stein(A, B);
    report.P_obs = solve_dual_stein(A, C);
    report.kappa_ctrl = detail::symmetric_condition_number(report.P_ctrl);
    report.kappa_obs = detail::symmetric_condition_number(report.P_obs);

    Eigen::LLT<Matrix> llt(report.P_obs);
    if (llt.info() != Eigen::Success) {
        fail_numerical("grammian_report: observability Grammian is not positive definite");
    }
    const Matrix L = llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Matrix> es(L.transpose() * report.P_ctrl * L, Eigen::EigenvaluesOnly);
    report.hankel = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse();

    const double lo = report.hankel[report.hankel.size() - 1];
    if (lo <= 0.0) fail_numerical("grammian_report: zero Hankel singular value");
    report.kappa_sigma = report.hankel[0] / lo;
    report.excess = report.kappa_ctrl * report.kappa_obs / (report.kappa_sigma * report.kappa_sigma);
    return report;
}

} // namespace onf
