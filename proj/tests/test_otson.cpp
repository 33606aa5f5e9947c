#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "onf/canonical.hpp"
#include "onf/otson.hpp"
#include "test_support.hpp"

using namespace onf;
using namespace onf::testing;

namespace {

double theta_distance(const OtsonParams& a, const OtsonParams& b)
{
    double dist = 0.0;
    for (std::size_t k = 0; k < a.thetas.size(); ++k) {
        dist = std::max(dist, (a.thetas[k] - b.thetas[k]).cwiseAbs().maxCoeff());
    }
    return dist;
}

} // namespace

TEST_CASE("zero angles reconstruct the shift pair")
{
    OtsonParams params{OrpFamily::q1(2), std::vector<Vector>(5, Vector::Zero(2))};
    const OutputPair pair = otson_reconstruct(params);
    CHECK(max_abs_diff(pair.C, (Matrix(2, 5) << Matrix::Identity(2, 2), Matrix::Zero(2, 3))
                                   .finished()) == 0.0);
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 5; ++j) {
            CHECK(pair.A(i, j) == ((j == i + 2) ? 1.0 : 0.0));
        }
    }
    CHECK(output_normal_residual(pair) == 0.0);
}

TEST_CASE("scalar stack factors into a single angle")
{
    OutputPair pair;
    pair.A = Matrix::Constant(1, 1, 0.8);
    pair.C = Matrix::Constant(1, 1, 0.6);
    const OtsonParams params = otson_factor(pair);
    CHECK_THAT(params.thetas[0][0], Catch::Matchers::WithinAbs(std::atan2(-0.8, 0.6), 1e-14));
    const OutputPair rebuilt = otson_reconstruct(params);
    CHECK_THAT(rebuilt.C(0, 0), Catch::Matchers::WithinAbs(0.6, 1e-14));
    CHECK_THAT(rebuilt.A(0, 0), Catch::Matchers::WithinAbs(0.8, 1e-14));
    const Vector mu = otson_mu(params);
    CHECK_THAT(mu[0], Catch::Matchers::WithinAbs(0.6, 1e-14));
}

TEST_CASE("the shift pair factors into zero angles")
{
    OtsonParams zero{OrpFamily::q1(3), std::vector<Vector>(7, Vector::Zero(3))};
    const OutputPair pair = otson_reconstruct(zero);
    const OtsonParams params = otson_factor(pair);
    CHECK(theta_distance(params, zero) == 0.0);
}

TEST_CASE("strict parameters round trip through the pair")
{
    std::mt19937_64 rng(3);
    for (const OrpKind kind : {OrpKind::q1, OrpKind::q2}) {
        for (int trial = 0; trial < 10; ++trial) {
            const OtsonParams params = random_strict_otson(rng, 8, 2, kind);
            const OutputPair pair = otson_reconstruct(params);
            CHECK(output_normal_residual(pair) <= 1e-11);
            const OtsonParams back = otson_factor(pair, kind);
            CHECK(theta_distance(back, params) <= 1e-10);
        }
    }
}

TEST_CASE("factored pairs rebuild their stack")
{
    std::mt19937_64 rng(5);
    const OutputPair pair = to_ots(random_on_pair(rng, 9, 3)).first;
    const OtsonParams params = otson_factor(pair);
    const OutputPair rebuilt = otson_reconstruct(params);
    CHECK(max_abs_diff(stack_of(rebuilt), stack_of(pair)) <= 1e-10);
}

TEST_CASE("recurrence reconstruction equals the dense product")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const OtsonParams params = random_strict_otson(rng, 6, 3);
        CHECK(max_abs_diff(stack_of(otson_reconstruct(params)), dense_otson_stack(params)) <= 1e-12);
    }
}

TEST_CASE("reconstruction output is structurally triangular")
{
    std::mt19937_64 rng(11);
    const OtsonParams params = random_strict_otson(rng, 10, 2);
    const OutputPair pair = otson_reconstruct(params);
    const Matrix Q = stack_of(pair);
    for (Index i = 0; i < Q.rows(); ++i) {
        for (Index j = std::max<Index>(i + 1, 0); j < Q.cols(); ++j) {
            CHECK(Q(i, j) == 0.0); // exact zeros by construction
        }
    }
    CHECK((Q.transpose() * Q - Matrix::Identity(10, 10)).norm() <= 1e-11);
    const Vector mu = otson_mu(params);
    for (Index k = 0; k < 10; ++k) {
        CHECK_THAT(Q(k, k), Catch::Matchers::WithinAbs(mu[k], 1e-12));
    }
}

TEST_CASE("gamma-state blocks keep orthonormal columns")
{
    std::mt19937_64 rng(13);
    const OtsonParams params = random_strict_otson(rng, 7, 2);
    for (Index k = 1; k <= 7; ++k) {
        const GammaState g = gamma_state(params, k);
        Matrix stacked(k + 2, k);
        stacked.topRows(k) = g.L;
        stacked.bottomRows(2) = g.M;
        CHECK((stacked.transpose() * stacked - Matrix::Identity(k, k)).norm() <= 1e-11);
    }
}

TEST_CASE("bottom rows match the closed form")
{
    std::mt19937_64 rng(17);
    const OtsonParams params = random_strict_otson(rng, 6, 2);
    const Matrix rows = otson_bottom_rows(params);
    const OutputPair pair = otson_reconstruct(params);
    CHECK(max_abs_diff(rows, pair.A.bottomRows(4)) <= 1e-12);

    // boundary case n = d + 2 covers all of A
    const OtsonParams small = random_strict_otson(rng, 5, 3);
    const Matrix all = otson_bottom_rows(small);
    CHECK(max_abs_diff(all, otson_reconstruct(small).A) <= 1e-12);

    OtsonParams zero{OrpFamily::q1(2), std::vector<Vector>(6, Vector::Zero(2))};
    const Matrix shift_rows = otson_bottom_rows(zero);
    CHECK(max_abs_diff(shift_rows, otson_reconstruct(zero).A.bottomRows(4)) == 0.0);

    CHECK_THROWS_AS(otson_bottom_rows(random_strict_otson(rng, 3, 2)), Error);
}

TEST_CASE("domain classification tracks the mu signs")
{
    std::mt19937_64 rng(19);
    OtsonParams params{OrpFamily::q1(2), std::vector<Vector>(4, Vector::Zero(2))};
    CHECK(otson_domain_check(params) == ParameterDomain::strict);

    OtsonParams random_params = random_strict_otson(rng, 6, 2);
    CHECK(otson_domain_check(random_params) == ParameterDomain::strict);

    OtsonParams boundary = random_params;
    boundary.thetas[2][0] = M_PI / 2; // cos = 0 forces mu_2 ~ 0
    CHECK(otson_domain_check(boundary) == ParameterDomain::boundary);

    OtsonParams flipped = random_params;
    flipped.thetas[1][0] = M_PI; // extended slot: mu_1 < 0
    CHECK(otson_domain_check(flipped) == ParameterDomain::unreduced);
}

TEST_CASE("signature orbit collapses back to one parameter vector")
{
    std::mt19937_64 rng(23);
    const OtsonParams params = random_strict_otson(rng, 6, 2);
    const OutputPair pair = otson_reconstruct(params);
    SignatureMatrix E = SignatureMatrix::identity(6);
    for (Index i = 0; i < 6; ++i) E.signs[i] = (rng() % 2 == 0) ? 1 : -1;
    const OutputPair flipped = apply_signature(pair, E);
    auto [standard, E2] = standardize(flipped, CanonicalForm::ots);
    const OtsonParams back = otson_factor(standard);
    CHECK(theta_distance(back, params) <= 1e-10);
}

TEST_CASE("factor rejects unsuitable inputs")
{
    std::mt19937_64 rng(29);
    // not triangular
    const OutputPair on = random_on_pair(rng, 5, 2);
    CHECK_THROWS_AS(otson_factor(on), Error);
    // triangular but not normal
    OutputPair pair = otson_reconstruct(random_strict_otson(rng, 5, 2));
    pair.A *= 0.9;
    CHECK_THROWS_AS(otson_factor(pair), Error);
    // householder family cannot carry the signed sweep
    const OutputPair good = otson_reconstruct(random_strict_otson(rng, 5, 2));
    CHECK_THROWS_AS(otson_factor(good, OrpKind::householder), Error);
}

TEST_CASE("householder parameters still reconstruct a normal triangular pair")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> polar(0.2, M_PI - 0.2);
    std::uniform_real_distribution<double> azimuth(-3.0, 3.0);
    OtsonParams params{OrpFamily::householder(3, 0), {}};
    params.thetas.resize(6);
    for (auto& t : params.thetas) {
        t.resize(2);
        t[0] = polar(rng);
        t[1] = azimuth(rng);
    }
    const OutputPair pair = otson_reconstruct(params);
    CHECK(output_normal_residual(pair) <= 1e-11);
    CHECK(classify(pair).form == CanonicalForm::ots);
}
