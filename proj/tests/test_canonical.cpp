#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "onf/canonical.hpp"
#include "onf/hoon.hpp"
#include "onf/otson.hpp"
#include "test_support.hpp"

using namespace onf;
using namespace onf::testing;

namespace {

double ho_structure_residual(const OutputPair& pair)
{
    double r = 0.0;
    for (Index j = 1; j < pair.n(); ++j) r = std::max(r, std::abs(pair.C(0, j)));
    for (Index j = 0; j < pair.n(); ++j) {
        for (Index i = j + 2; i < pair.n(); ++i) r = std::max(r, std::abs(pair.A(i, j)));
    }
    return r;
}

double ots_structure_residual(const OutputPair& pair)
{
    const Matrix Q = stack_of(pair);
    double r = 0.0;
    for (Index i = 0; i < Q.rows(); ++i) {
        for (Index j = i + 1; j < Q.cols(); ++j) r = std::max(r, std::abs(Q(i, j)));
    }
    return r;
}

// theta = 0 reconstruction pair: C = [I_d 0], A the d-step shift
OutputPair shift_pair(Index n, Index d)
{
    return otson_reconstruct(OtsonParams{OrpFamily::q1(d),
                                         std::vector<Vector>(static_cast<std::size_t>(n),
                                                             Vector::Zero(d))});
}

HoonParams zero_hoon(Index n, Index d, double gamma)
{
    HoonParams p;
    p.gamma = gamma;
    p.d = d;
    p.thetas.assign(static_cast<std::size_t>(n), Vector());
    for (Index k = 0; k < n; ++k) {
        p.thetas[static_cast<std::size_t>(k)] = Vector::Zero(k + 1 < n ? d : d - 1);
    }
    return p;
}

} // namespace

TEST_CASE("scalar signature sequence has the closed form")
{
    OutputPair pair;
    pair.A = Matrix::Constant(1, 1, 0.5);
    pair.C = Matrix::Constant(1, 1, std::sqrt(0.75));
    const SignatureSequence seq = signature_sequence(pair);
    REQUIRE(seq.s.size() == 2);
    for (std::size_t k = 0; k < seq.s.size(); ++k) {
        CHECK_THAT(seq.s[k](0, 0),
                   Catch::Matchers::WithinAbs(0.75 * std::pow(0.5, double(k)), 1e-14));
    }
}

TEST_CASE("signature sequence is an orthogonal-similarity invariant")
{
    std::mt19937_64 rng(3);
    const OutputPair pair = random_on_pair(rng, 6, 2);
    const Matrix W = random_orthogonal(rng, 6);
    const OutputPair rotated{W.transpose() * pair.A * W, pair.C * W};
    CHECK(signature_distance(signature_sequence(pair), signature_sequence(rotated)) <= 1e-9);

    OutputPair different = pair;
    different.C(0, 0) += 0.5;
    CHECK((signature_sequence(different).s[0] - signature_sequence(pair).s[0]).norm() > 0.1);
}

TEST_CASE("classification of a strict triangular pair")
{
    const OutputPair pair = shift_pair(5, 2);
    const FormClassification cls = classify(pair);
    CHECK(cls.form == CanonicalForm::ots);
    CHECK(cls.standard);
    CHECK(cls.unreduced);
    CHECK(cls.strict);
    CHECK_FALSE(cls.reducible_index.has_value());
}

TEST_CASE("classification flags degenerate and reducible pairs")
{
    // C(0,0) = 1 forces a degenerate Hessenberg-observer pair
    const OutputPair degenerate = hoon_reconstruct(zero_hoon(4, 2, 0.0));
    const FormClassification cls = classify(degenerate);
    CHECK(cls.form == CanonicalForm::ho);
    CHECK(cls.degenerate);
    CHECK_FALSE(cls.standard);

    // zero subdiagonal entry A(2,1) gives reducible index 1
    std::mt19937_64 rng(5);
    HoonParams params = random_strict_hoon(rng, 5, 2);
    params.thetas[1][params.d - 1] = M_PI / 2; // mu_1 = 0 kills A(2,1)
    const OutputPair reducible = hoon_reconstruct(params);
    const FormClassification rcls = classify(reducible);
    CHECK(rcls.form == CanonicalForm::ho);
    CHECK_FALSE(rcls.strict);
    REQUIRE(rcls.reducible_index.has_value());
    CHECK(*rcls.reducible_index == 1);
}

TEST_CASE("standardize is a no-op on standard pairs")
{
    const OutputPair pair = shift_pair(4, 1);
    auto [standard, E] = standardize(pair, CanonicalForm::ots);
    CHECK(E.is_identity());
    CHECK(max_abs_diff(standard.A, pair.A) == 0.0);
}

TEST_CASE("scalar sign is standardized through the signature")
{
    OutputPair pair;
    pair.A = Matrix::Constant(1, 1, 0.5);
    pair.C = Matrix::Constant(1, 1, -std::sqrt(0.75));
    auto [standard, E] = standardize(pair, CanonicalForm::ots);
    CHECK(E.signs[0] == -1);
    CHECK_THAT(standard.C(0, 0), Catch::Matchers::WithinAbs(std::sqrt(0.75), 1e-15));
    CHECK_THAT(standard.A(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("standardize collapses the signature orbit")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const OutputPair pair = otson_reconstruct(random_strict_otson(rng, 6, 2));
        SignatureMatrix E = SignatureMatrix::identity(6);
        for (Index i = 0; i < 6; ++i) E.signs[i] = (rng() % 2 == 0) ? 1 : -1;
        const OutputPair flipped = apply_signature(pair, E);
        auto [recovered, E2] = standardize(flipped, CanonicalForm::ots);
        CHECK(max_abs_diff(recovered.A, pair.A) <= 1e-12);
        CHECK(max_abs_diff(recovered.C, pair.C) <= 1e-12);
    }
}

TEST_CASE("strict hessenberg-observer pairs are fixed points of the reduction")
{
    std::mt19937_64 rng(11);
    const OutputPair pair = hoon_reconstruct(random_strict_hoon(rng, 6, 2));
    auto [reduced, U] = to_hessenberg_observer(pair);
    CHECK(max_abs_diff(reduced.A, pair.A) <= 1e-10);
    CHECK(max_abs_diff(reduced.C, pair.C) <= 1e-10);
    CHECK((U - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("the scaled permutation pair is already reduced")
{
    const OutputPair pair = hoon_reconstruct(zero_hoon(2, 1, 0.8));
    CHECK_THAT(pair.A(0, 1), Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(pair.A(1, 0), Catch::Matchers::WithinAbs(0.8, 1e-15));
    auto [reduced, U] = to_hessenberg_observer(pair);
    CHECK(max_abs_diff(reduced.A, pair.A) <= 1e-12);
    CHECK(max_abs_diff(reduced.C, pair.C) <= 1e-12);
}

TEST_CASE("hessenberg-observer reduction of random normal pairs")
{
    std::mt19937_64 rng(13);
    for (const ReductionKernel kernel : {ReductionKernel::givens, ReductionKernel::householder}) {
        const OutputPair pair = random_on_pair(rng, 12, 3);
        auto [reduced, U] = to_hessenberg_observer(pair, kernel);
        CHECK(ho_structure_residual(reduced) <= 1e-11);
        CHECK(output_normal_residual(reduced) <= 1e-10);
        CHECK((U.transpose() * U - Matrix::Identity(12, 12)).norm() <= 1e-11);
        CHECK(signature_distance(signature_sequence(pair), signature_sequence(reduced)) <= 1e-8);
        CHECK(reduced.C(0, 0) >= 0.0);
        for (Index i = 0; i + 1 < 12; ++i) CHECK(reduced.A(i + 1, i) >= 0.0);
        // the returned similarity reproduces the reduction
        CHECK(max_abs_diff(U.transpose() * pair.A * U, reduced.A) <= 1e-10);
        CHECK(max_abs_diff(pair.C * U, reduced.C) <= 1e-10);
    }
}

TEST_CASE("triangular reduction of random normal pairs")
{
    std::mt19937_64 rng(17);
    for (const ReductionKernel kernel : {ReductionKernel::givens, ReductionKernel::householder}) {
        const OutputPair pair = random_on_pair(rng, 10, 2);
        auto [reduced, U] = to_ots(pair, kernel);
        CHECK(ots_structure_residual(reduced) <= 1e-11);
        CHECK(output_normal_residual(reduced) <= 1e-10);
        CHECK((U.transpose() * U - Matrix::Identity(10, 10)).norm() <= 1e-11);
        CHECK(signature_distance(signature_sequence(pair), signature_sequence(reduced)) <= 1e-8);
        const Matrix Q = stack_of(reduced);
        for (Index i = 0; i < 10; ++i) CHECK(Q(i, i) >= 0.0);
    }
}

TEST_CASE("square measurement matrix is triangularized")
{
    std::mt19937_64 rng(19);
    const OutputPair pair = random_on_pair(rng, 3, 3);
    auto [reduced, U] = to_ots(pair);
    CHECK(ots_structure_residual(reduced) <= 1e-11);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = i + 1; j < 3; ++j) CHECK(std::abs(reduced.C(i, j)) <= 1e-11);
    }
}

TEST_CASE("theta-zero triangular pair is a fixed point")
{
    const OutputPair pair = shift_pair(6, 2);
    auto [reduced, U] = to_ots(pair);
    CHECK(max_abs_diff(reduced.A, pair.A) <= 1e-12);
    CHECK(max_abs_diff(reduced.C, pair.C) <= 1e-12);
}

TEST_CASE("strict triangular pairs are recovered after a random similarity")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const OutputPair pair = otson_reconstruct(random_strict_otson(rng, 7, 2));
        const Matrix W = random_orthogonal(rng, 7);
        const OutputPair mixed{W.transpose() * pair.A * W, pair.C * W};
        auto [recovered, U] = to_ots(mixed);
        CHECK(max_abs_diff(recovered.A, pair.A) <= 1e-8);
        CHECK(max_abs_diff(recovered.C, pair.C) <= 1e-8);
    }
}

TEST_CASE("strict hessenberg pairs are recovered after a random similarity")
{
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const OutputPair pair = hoon_reconstruct(random_strict_hoon(rng, 7, 3));
        const Matrix W = random_orthogonal(rng, 7);
        const OutputPair mixed{W.transpose() * pair.A * W, pair.C * W};
        auto [recovered, U] = to_hessenberg_observer(mixed);
        CHECK(max_abs_diff(recovered.A, pair.A) <= 1e-8);
        CHECK(max_abs_diff(recovered.C, pair.C) <= 1e-8);
    }
}

TEST_CASE("nondegenerate pairs split trivially")
{
    std::mt19937_64 rng(31);
    const OutputPair pair = hoon_reconstruct(random_strict_hoon(rng, 5, 2));
    auto [m, rest] = split_degenerate(pair);
    CHECK(m == 0);
    CHECK(max_abs_diff(rest.A, pair.A) == 0.0);
}

TEST_CASE("identity direct summands are stripped")
{
    std::mt19937_64 rng(37);
    for (Index m : {Index{1}, Index{2}}) {
        const Index d = 2;
        const OutputPair inner = hoon_reconstruct(random_strict_hoon(rng, 5, d));
        const Index n = inner.n() + m;
        Matrix S = Matrix::Zero(n + d, n);
        S.topLeftCorner(m, m) = Matrix::Identity(m, m);
        S.bottomRightCorner(inner.n() + d, inner.n()) = stack_of(inner);
        const OutputPair padded = pair_from_stack(S, d);
        REQUIRE(classify(padded).form == CanonicalForm::ho);
        REQUIRE(classify(padded).degenerate);
        auto [stripped, rest] = split_degenerate(padded);
        CHECK(stripped == m);
        CHECK(max_abs_diff(rest.A, inner.A) <= 1e-12);
        CHECK(max_abs_diff(rest.C, inner.C) <= 1e-12);
    }
}

TEST_CASE("irreducible pairs are rejected by the partial schur reduction")
{
    std::mt19937_64 rng(41);
    const OutputPair pair = hoon_reconstruct(random_strict_hoon(rng, 5, 2));
    CHECK_THROWS_WITH(reduce_partial_schur(pair),
                      Catch::Matchers::ContainsSubstring("not reducible"));
}

TEST_CASE("partial schur reduction standardizes the trailing block")
{
    std::mt19937_64 rng(43);
    HoonParams params = random_strict_hoon(rng, 8, 2);
    params.thetas[3][params.d - 1] = M_PI / 2; // mu_3 = 0: reducible at index 3
    const OutputPair pair = hoon_reconstruct(params);
    const FormClassification cls = classify(pair);
    REQUIRE(cls.reducible_index.has_value());
    const Index k = *cls.reducible_index + 1;

    auto [out, U] = reduce_partial_schur(pair);
    CHECK(output_normal_residual(out) <= 1e-10);
    // similarity has the split structure
    CHECK((U.topLeftCorner(k, k) - Matrix::Identity(k, k)).norm() == 0.0);
    CHECK(U.topRightCorner(k, 8 - k).norm() == 0.0);
    CHECK(U.bottomLeftCorner(8 - k, k).norm() == 0.0);
    // leading data untouched
    CHECK(max_abs_diff(out.A.topLeftCorner(k, k), pair.A.topLeftCorner(k, k)) == 0.0);
    CHECK(max_abs_diff(out.C.leftCols(k), pair.C.leftCols(k)) == 0.0);
    // trailing block is an ordered qd Schur matrix
    const Matrix A22 = out.A.bottomRightCorner(8 - k, 8 - k);
    CHECK(detail::is_schur_structure(A22, 1e-10));
    CHECK(max_abs_diff(U.transpose() * pair.A * U, out.A) <= 1e-10);
}

TEST_CASE("partial schur representative does not depend on the trailing basis")
{
    std::mt19937_64 rng(47);
    HoonParams params = random_strict_hoon(rng, 7, 2);
    params.thetas[2][params.d - 1] = M_PI / 2; // reducible at index 2
    const OutputPair pair = hoon_reconstruct(params);
    auto [direct, U1] = reduce_partial_schur(pair);

    // re-derive the pair through an arbitrary mixing of the trailing states
    const FormClassification cls = classify(pair);
    const Index k = *cls.reducible_index + 1;
    Matrix W = Matrix::Identity(7, 7);
    W.bottomRightCorner(7 - k, 7 - k) = random_orthogonal(rng, 7 - k);
    const OutputPair mixed{W.transpose() * pair.A * W, pair.C * W};
    auto [ho, Uho] = to_hessenberg_observer(mixed);
    auto [indirect, U2] = reduce_partial_schur(ho);

    CHECK(max_abs_diff(indirect.A, direct.A) <= 1e-8);
    CHECK(signature_distance(signature_sequence(indirect), signature_sequence(direct)) <= 1e-8);
}

TEST_CASE("reductions require output-normal input")
{
    std::mt19937_64 rng(53);
    OutputPair pair;
    pair.A = randn(rng, 4, 4);
    pair.C = randn(rng, 2, 4);
    CHECK_THROWS_AS(to_ots(pair), Error);
    CHECK_THROWS_AS(to_hessenberg_observer(pair), Error);
}
