#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tps/basis.hpp"

using namespace tps;

TEST_CASE("knot vector: minimal clamped basis has no interior knots") {
    const KnotVector kv = make_knot_vector({3, 4, 0.0, 1.0});
    REQUIRE(kv.knots.size() == 8);
    Eigen::VectorXd expected(8);
    expected << 0, 0, 0, 0, 1, 1, 1, 1;
    CHECK((kv.knots - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("knot vector: single equidistant interior knot at 0.5") {
    const KnotVector kv = make_knot_vector({3, 5, 0.0, 1.0});
    REQUIRE(kv.knots.size() == 9);
    CHECK(kv.knots[4] == doctest::Approx(0.5));
}

TEST_CASE("knot vector: degree 1 with 3 basis columns, hand enumeration") {
    // Clamped-uniform construction by hand: boundary repeats of 2, one
    // interior knot splitting [0,1] evenly.
    const KnotVector kv = make_knot_vector({1, 3, 0.0, 1.0});
    Eigen::VectorXd expected(5);
    expected << 0, 0, 0.5, 1, 1;
    REQUIRE(kv.knots.size() == 5);
    CHECK((kv.knots - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("knot vector: invalid specs rejected") {
    CHECK_THROWS_AS(make_knot_vector({3, 3, 0.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(make_knot_vector({3, 5, 1.0, 0.0}), ConfigError);
}

TEST_CASE("eval_basis: degree 0 is an indicator basis") {
    Eigen::VectorXd xs(1);
    xs << 0.25;
    const BasisMatrix b = eval_basis({0, 2, 0.0, 1.0}, xs);
    CHECK(b.values(0, 0) == doctest::Approx(1.0));
    CHECK(b.values(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("eval_basis: partition of unity on 1000 random interior points") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd xs(1000);
    for (int i = 0; i < 1000; ++i) xs[i] = unif(rng);
    for (const BasisSpec spec : {BasisSpec{3, 10}, BasisSpec{2, 5}, BasisSpec{1, 7}}) {
        const BasisMatrix b = eval_basis(spec, xs);
        CHECK((b.values.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(b.values.minCoeff() >= 0.0);
    }
}

TEST_CASE("eval_basis: Bernstein cubics at 0.5") {
    Eigen::VectorXd xs(1);
    xs << 0.5;
    const BasisMatrix b = eval_basis({3, 4, 0.0, 1.0}, xs);
    // Bernstein oracle gives (0.125, 0.375, 0.375, 0.125).
    for (int j = 0; j < 4; ++j)
        CHECK(b.values(0, j) == doctest::Approx(oracles::bernstein(3, j, 0.5)).epsilon(1e-13));
    CHECK(b.values(0, 0) == doctest::Approx(0.125));
    CHECK(b.values(0, 1) == doctest::Approx(0.375));
}

TEST_CASE("eval_basis: degree elevation matches Bernstein on no-interior-knot case") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int q = 1; q <= 5; ++q) {
        Eigen::VectorXd xs(50);
        for (int i = 0; i < 50; ++i) xs[i] = unif(rng);
        const BasisMatrix b = eval_basis({q, q + 1, 0.0, 1.0}, xs);
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j <= q; ++j)
                CHECK(b.values(i, j) ==
                      doctest::Approx(oracles::bernstein(q, j, xs[i])).epsilon(1e-12));
    }
}

TEST_CASE("eval_basis: local support over degree+1 knot spans") {
    const BasisSpec spec{3, 12, 0.0, 1.0};
    const KnotVector kv = make_knot_vector(spec);
    Eigen::VectorXd xs(501);
    for (int i = 0; i <= 500; ++i) xs[i] = i / 500.0;
    const BasisMatrix b = eval_basis(spec, xs);
    for (int j = 0; j < spec.num_basis; ++j) {
        // Column j is supported on [knots[j], knots[j+degree+1]].
        const double lo = kv.knots[j], hi = kv.knots[j + spec.degree + 1];
        for (int i = 0; i <= 500; ++i)
            if (xs[i] < lo || xs[i] > hi) CHECK(b.values(i, j) == 0.0);
    }
}

TEST_CASE("eval_basis: right endpoint assigned to last span, domain enforced") {
    Eigen::VectorXd xs(1);
    xs << 1.0;
    const BasisMatrix b = eval_basis({3, 8, 0.0, 1.0}, xs);
    CHECK(b.values.row(0).sum() == doctest::Approx(1.0));
    CHECK(b.values(0, 7) == doctest::Approx(1.0));

    xs << 1.0 + 1e-9;
    CHECK_THROWS_AS(eval_basis({3, 8, 0.0, 1.0}, xs), DomainError);
    xs << -1e-9;
    CHECK_THROWS_AS(eval_basis({3, 8, 0.0, 1.0}, xs), DomainError);
}

TEST_CASE("second difference matrix: smallest case and hand-computed squares") {
    const Eigen::MatrixXd d3 = second_difference_matrix(3);
    REQUIRE(d3.rows() == 1);
    CHECK(d3(0, 0) == 1.0);
    CHECK(d3(0, 1) == -2.0);
    CHECK(d3(0, 2) == 1.0);

    Eigen::VectorXd squares(5);
    squares << 0, 1, 4, 9, 16;
    const Eigen::VectorXd dd = second_difference_matrix(5) * squares;
    Eigen::VectorXd expected(3);
    expected << 2, 2, 2;
    CHECK((dd - expected).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(second_difference_matrix(2), ConfigError);
}

TEST_CASE("second difference matrix annihilates affine sequences exactly") {
    for (int p = 3; p <= 40; ++p) {
        Eigen::VectorXd affine(p);
        for (int j = 0; j < p; ++j) affine[j] = 1.5 + 2.25 * j;
        CHECK((second_difference_matrix(p) * affine).cwiseAbs().maxCoeff() == 0.0);
    }
}
