#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "onf/canonical.hpp"
#include "onf/model_io.hpp"
#include "onf/normal_form.hpp"
#include "test_support.hpp"

using namespace onf;
using namespace onf::testing;

namespace {

Vector sorted_abs_eigenvalues(const Matrix& A)
{
    Eigen::EigenSolver<Matrix> es(A, false);
    Vector mags = es.eigenvalues().cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size());
    return mags;
}

} // namespace

TEST_CASE("scalar normalization has the closed form")
{
    OutputPair pair;
    pair.A = Matrix::Constant(1, 1, 0.5);
    pair.C = Matrix::Constant(1, 1, 1.0);
    auto [on, t] = to_output_normal(pair);
    CHECK_THAT(t.T(0, 0), Catch::Matchers::WithinAbs(std::sqrt(3.0) / 2.0, 1e-14));
    CHECK_THAT(t.T_inv(0, 0), Catch::Matchers::WithinAbs(2.0 / std::sqrt(3.0), 1e-14));
    CHECK_THAT(on.A(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(on.C(0, 0), Catch::Matchers::WithinAbs(std::sqrt(3.0) / 2.0, 1e-14));
    CHECK_THAT(on.A(0, 0) * on.A(0, 0) + on.C(0, 0) * on.C(0, 0),
               Catch::Matchers::WithinAbs(1.0, 1e-15));
}

TEST_CASE("an already normal pair maps through the identity")
{
    std::mt19937_64 rng(3);
    const OutputPair pair = random_on_pair(rng, 5, 2);
    if (spectral_radius(pair.A) >= 1.0 - 1e-10) return;
    auto [on, t] = to_output_normal(pair);
    CHECK((t.T - Matrix::Identity(5, 5)).norm() <= 1e-10);
    CHECK(max_abs_diff(on.A, pair.A) <= 1e-10);
    CHECK(max_abs_diff(on.C, pair.C) <= 1e-10);
}

TEST_CASE("random stable observable pairs normalize tightly")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const ModelFile model = random_system(10, 3, 1, 0.55 + 0.04 * trial, 500 + trial);
        auto [on, t] = to_output_normal(model.pair());
        CHECK(output_normal_residual(on) <= 1e-10);
        CHECK((t.T * t.T_inv - Matrix::Identity(10, 10)).norm() <= 1e-10);
        // spectrum is a similarity invariant
        CHECK((sorted_abs_eigenvalues(on.A) - sorted_abs_eigenvalues(model.A)).cwiseAbs()
                  .maxCoeff() <= 1e-8);
        CHECK_THAT(spectral_radius(on.A),
                   Catch::Matchers::WithinAbs(spectral_radius(model.A), 1e-8));
    }
}

TEST_CASE("normalization preserves the signature sequence up to the transform")
{
    // two different output-normal realizations of one pair have equal
    // signature sequences when they differ by an orthogonal similarity
    std::mt19937_64 rng(7);
    const ModelFile model = random_system(7, 2, 1, 0.8, 1234);
    auto [on, t] = to_output_normal(model.pair());
    const Matrix W = random_orthogonal(rng, 7);
    const OutputPair rotated{W.transpose() * on.A * W, on.C * W};
    CHECK(signature_distance(signature_sequence(on), signature_sequence(rotated)) <= 1e-9);
}

TEST_CASE("unobservable pairs are rejected rather than regularized")
{
    OutputPair pair;
    pair.A = Matrix::Zero(2, 2);
    pair.A(0, 0) = 0.5;
    pair.A(1, 1) = 0.25;
    pair.C = Matrix::Zero(1, 2);
    pair.C(0, 0) = 1.0; // second state never appears in the output
    CHECK_THROWS_WITH(to_output_normal(pair),
                      Catch::Matchers::ContainsSubstring("unobservable"));
}

TEST_CASE("unstable pairs are rejected")
{
    OutputPair pair;
    pair.A = Matrix::Constant(1, 1, 1.2);
    pair.C = Matrix::Constant(1, 1, 1.0);
    CHECK_THROWS_AS(to_output_normal(pair), Error);
}

TEST_CASE("input duality maps input normality onto output normality")
{
    std::mt19937_64 rng(11);
    // an input-normal pair is the transpose of an output-normal one
    const OutputPair on = random_on_pair(rng, 6, 2);
    const Matrix A = on.A.transpose();
    const Matrix B = on.C.transpose();
    CHECK((A * A.transpose() + B * B.transpose() - Matrix::Identity(6, 6)).norm() <= 1e-12);
    const OutputPair dual = dual_input_pair(A, B);
    CHECK(output_normal_residual(dual) <= 1e-12);

    // the map is an involution: transposing the result fields recovers (A, B)
    CHECK(max_abs_diff(dual.A.transpose(), A) == 0.0);
    CHECK(max_abs_diff(dual.C.transpose(), B) == 0.0);

    // scalar: a^2 + b^2 = 1 passes through directly
    const OutputPair scalar = dual_input_pair(Matrix::Constant(1, 1, 0.6),
                                              Matrix::Constant(1, 1, 0.8));
    CHECK(output_normal_residual(scalar) <= 1e-15);
}
