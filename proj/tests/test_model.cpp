#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "drcr/error.hpp"
#include "drcr/model.hpp"

using namespace drcr;

namespace {

MaxAffineModel random_model(std::mt19937_64& gen, std::size_t d, std::size_t pieces) {
    std::normal_distribution<double> z;
    std::vector<AffinePiece> ps;
    for (std::size_t i = 0; i < pieces; ++i) {
        AffinePiece p;
        p.g = z(gen);
        for (std::size_t k = 0; k < d; ++k) {
            p.xi.push_back(z(gen));
            p.anchor.push_back(z(gen));
        }
        ps.push_back(p);
    }
    return MaxAffineModel(d, ps);
}

}  // namespace

TEST_CASE("predict on hand-built models") {
    MaxAffineModel zero(2, {AffinePiece{0.0, {0.0, 0.0}, {0.0, 0.0}}});
    CHECK(predict(zero, std::vector<double>{3.0, -7.0}) == 0.0);

    MaxAffineModel vee(1, {AffinePiece{1.0, {1.0}, {0.0}}, AffinePiece{0.0, {-1.0}, {0.0}}});
    CHECK(predict(vee, std::vector<double>{2.0}) == 3.0);
    CHECK(predict(vee, std::vector<double>{-3.0}) == 3.0);

    CHECK_THROWS_AS(predict(vee, std::vector<double>{1.0, 2.0}), InvalidArgument);
}

TEST_CASE("model construction validates shapes") {
    CHECK_THROWS_AS(MaxAffineModel(2, {}), InvalidArgument);
    CHECK_THROWS_AS(MaxAffineModel(2, {AffinePiece{0.0, {1.0}, {0.0, 0.0}}}), InvalidArgument);
    CHECK_THROWS_AS(Dataset(2, {1.0, 2.0, 3.0}, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(Dataset(1, {NAN}, {1.0}), InvalidArgument);
}

TEST_CASE("gradient sup norm") {
    MaxAffineModel flat(2, {AffinePiece{1.0, {0.0, 0.0}, {0.0, 0.0}}, AffinePiece{2.0, {0.0, 0.0}, {1.0, 1.0}}});
    CHECK(gradient_sup_norm(flat) == 0.0);
    MaxAffineModel m(2, {AffinePiece{0.0, {1.0, -3.0}, {0.0, 0.0}}, AffinePiece{0.0, {2.0, 2.0}, {0.0, 0.0}}});
    CHECK(gradient_sup_norm(m) == 3.0);
}

TEST_CASE("empirical losses") {
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    CHECK(empirical_l1(a, a) == 0.0);
    CHECK(empirical_l2(a, a) == 0.0);

    const std::vector<double> b{3.0, 4.0, 5.0, 6.0};
    CHECK(empirical_l1(b, a) == 2.0);
    CHECK(empirical_l2(b, a) == 2.0);

    const std::vector<double> zero(4, 0.0), bump{0.0, 3.0, 0.0, 0.0};
    CHECK(empirical_l1(bump, zero) == 0.75);
    CHECK(empirical_l2(bump, zero) == 1.5);
    const auto r = loss_report(bump, zero);
    CHECK(r.l1 == 0.75);
    CHECK(r.l2 == 1.5);
    CHECK(r.n_points == 4);

    CHECK_THROWS_AS(empirical_l1(a, std::vector<double>{1.0}), InvalidArgument);
    CHECK_THROWS_AS(empirical_l2(std::vector<double>{}, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("l1 never exceeds l2") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 17;
        std::vector<double> f(n), g(n);
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = z(gen) * (1 + trial % 5);
            g[i] = z(gen);
        }
        CHECK(empirical_l1(f, g) <= empirical_l2(f, g) * (1 + 1e-15));
    }
}

TEST_CASE("dual objective") {
    MaxAffineModel absx(1, {AffinePiece{0.0, {1.0}, {0.0}}, AffinePiece{0.0, {-1.0}, {0.0}}});
    Dataset origin(1, {0.0}, {0.0});
    CHECK(dual_objective(absx, origin, 0.5) == 0.5);
    CHECK(dual_objective(absx, origin, 0.0) == 0.0);
    CHECK_THROWS_AS(dual_objective(absx, origin, -0.1), InvalidArgument);

    Dataset line(1, {1.0, 2.0}, {1.0, 2.0});
    CHECK(dual_objective(absx, line, 0.0) == 0.0);
}

TEST_CASE("dual objective is affine in delta with slope the gradient sup norm") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + trial % 3, n = 2 + trial % 6;
        const auto m = random_model(gen, d, 1 + trial % 4);
        std::vector<double> xs(n * d), ys(n);
        for (auto& v : xs) v = z(gen);
        for (auto& v : ys) v = z(gen);
        Dataset data(d, xs, ys);
        // dyadic radii keep the products exact
        const double d1 = std::ldexp(std::floor(u(gen) * 64), -6), d2 = d1 + 0.25;
        const double lhs = dual_objective(m, data, d2) - dual_objective(m, data, d1);
        CHECK(lhs == doctest::Approx((d2 - d1) * gradient_sup_norm(m)).epsilon(1e-12));
    }
}

TEST_CASE("max-affine models are convex") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto m = random_model(gen, 3, 12);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> x(3), y(3), mid(3);
        const double t = u(gen);
        for (int k = 0; k < 3; ++k) {
            x[k] = 3 * z(gen);
            y[k] = 3 * z(gen);
            mid[k] = t * x[k] + (1 - t) * y[k];
        }
        CHECK(predict(m, mid) <= t * predict(m, x) + (1 - t) * predict(m, y) + 1e-9);
    }
}

TEST_CASE("predict_all matches predict") {
    std::mt19937_64 gen(5);
    const auto m = random_model(gen, 2, 5);
    Dataset data(2, {0.1, 0.2, -1.0, 3.0, 2.5, -0.5}, {0.0, 0.0, 0.0});
    const auto all = predict_all(m, data);
    REQUIRE(all.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(all[i] == predict(m, data.x(i)));
}

TEST_CASE("serialization round trip is exact") {
    std::mt19937_64 gen(9);
    const auto base = random_model(gen, 3, 6);
    MaxAffineModel m(3, base.pieces(), 0.8, FitMeta{0.1 + 0.2, 42, 1.0 / 3.0});
    const auto back = deserialize(serialize(m));
    REQUIRE(back.d() == 3);
    REQUIRE(back.pieces().size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(back.pieces()[i].g == m.pieces()[i].g);
        CHECK(back.pieces()[i].xi == m.pieces()[i].xi);
        CHECK(back.pieces()[i].anchor == m.pieces()[i].anchor);
    }
    CHECK(back.grad_cap() == 0.8);
    CHECK(back.fit_meta().objective == 0.1 + 0.2);
    CHECK(back.fit_meta().iterations == 42);
    CHECK(back.fit_meta().delta == 1.0 / 3.0);
    CHECK(serialize(back) == serialize(m));

    MaxAffineModel unbounded(1, {AffinePiece{0.0, {1.0}, {0.0}}});
    CHECK(std::isinf(deserialize(serialize(unbounded)).grad_cap()));

    CHECK_THROWS_AS(deserialize("{not json"), ParseError);
    CHECK_THROWS_AS(deserialize("{\"d\":1}"), ParseError);
}
