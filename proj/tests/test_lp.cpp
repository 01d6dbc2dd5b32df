#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "drcr/error.hpp"
#include "drcr/lp.hpp"
#include "lp_oracle.hpp"
#include "random_lp.hpp"

using namespace drcr::lp;

TEST_CASE("minimize x subject to x >= 1") {
    LinearProgram lp;
    lp.add_variable(-inf, inf, 1.0);
    lp.add_row({{0, 1.0}}, Sense::greater_equal, 1.0);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.primal[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.dual[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.residuals.primal_infeasibility <= 1e-12);
    CHECK(sol.residuals.relative_gap <= 1e-12);
}

TEST_CASE("triangle: minimize -x-y on x+y<=1 with unit box") {
    LinearProgram lp;
    lp.add_variable(0, 1, -1.0);
    lp.add_variable(0, 1, -1.0);
    lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::less_equal, 1.0);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.objective_value == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(sol.primal[0] + sol.primal[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("certify on a hand-built optimal pair") {
    LinearProgram lp;
    lp.add_variable(-inf, inf, 1.0);
    lp.add_row({{0, 1.0}}, Sense::greater_equal, 1.0);
    LPSolution sol;
    sol.primal = {1.0};
    sol.dual = {1.0};
    auto res = certify(lp, sol);
    CHECK(res.primal_infeasibility == 0.0);
    CHECK(res.dual_infeasibility == 0.0);
    CHECK(res.complementarity_gap == 0.0);

    SUBCASE("perturbing into the binding constraint is reported") {
        sol.primal = {1.0 - 1e-3};
        res = certify(lp, sol);
        CHECK(res.primal_infeasibility >= 1e-3 - 1e-15);
    }
    SUBCASE("dimension mismatch") {
        sol.dual = {};
        CHECK_THROWS_AS(certify(lp, sol), drcr::InvalidArgument);
    }
}

TEST_CASE("random LPs agree with vertex enumeration and pass certify") {
    std::mt19937_64 rng(12345);
    int optimal = 0;
    for (int t = 0; t < 100; ++t) {
        const auto lp = testgen::random_lp(rng, t % 5 != 0);
        const auto expect = oracle::vertex_enumeration(lp);
        const auto sol = solve_lp(lp);
        if (!expect) {
            CHECK(sol.status == Status::infeasible);
            double imbalance = 1;
            CHECK(check_farkas(lp, sol, &imbalance) > 0);
            CHECK(imbalance <= 1e-8);
            continue;
        }
        REQUIRE(sol.status == Status::optimal);
        ++optimal;
        CHECK(std::abs(sol.objective_value - *expect) <= 1e-7 * (1 + std::abs(*expect)));
        CHECK(sol.residuals.primal_infeasibility <= 1e-8);
        CHECK(sol.residuals.dual_infeasibility <= 1e-8);
        CHECK(sol.residuals.relative_gap <= 1e-7);
    }
    CHECK(optimal >= 80);
}

TEST_CASE("interior point agrees with simplex on feasible random LPs") {
    std::mt19937_64 rng(7);
    SolverOptions ipm;
    ipm.algorithm = Algorithm::interior_point;
    for (int t = 0; t < 30; ++t) {
        const auto lp = testgen::random_lp(rng, true);
        const auto a = solve_lp(lp);
        const auto b = solve_lp(lp, ipm);
        REQUIRE(a.status == Status::optimal);
        REQUIRE(b.status == Status::optimal);
        CHECK(std::abs(a.objective_value - b.objective_value) <= 1e-6 * (1 + std::abs(a.objective_value)));
    }
}

TEST_CASE("infeasible and unbounded programs") {
    SUBCASE("x >= 2 and x <= 1") {
        LinearProgram lp;
        lp.add_variable(-inf, inf, 1.0);
        lp.add_row({{0, 1.0}}, Sense::greater_equal, 2.0);
        lp.add_row({{0, 1.0}}, Sense::less_equal, 1.0);
        const auto sol = solve_lp(lp);
        REQUIRE(sol.status == Status::infeasible);
        double imbalance = 1;
        CHECK(check_farkas(lp, sol, &imbalance) > 0);
        CHECK(imbalance <= 1e-12);
    }
    SUBCASE("minimize -x with x >= 0 only") {
        LinearProgram lp;
        lp.add_variable(0, inf, -1.0);
        lp.add_variable(-inf, inf, 0.0);
        lp.add_row({{0, 1.0}, {1, -1.0}}, Sense::greater_equal, -3.0);
        const auto sol = solve_lp(lp);
        REQUIRE(sol.status == Status::unbounded);
        REQUIRE(sol.ray.size() == 2);
        CHECK(-sol.ray[0] < 0);
    }
}

TEST_CASE("equality rows") {
    // min x + 2y  s.t. x + y = 3, x - y >= -1, x,y >= 0  -> x = 3, y = 0
    LinearProgram lp;
    lp.add_variable(0, inf, 1.0);
    lp.add_variable(0, inf, 2.0);
    lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::equal, 3.0);
    lp.add_row({{0, 1.0}, {1, -1.0}}, Sense::greater_equal, -1.0);
    const auto sol = solve_lp(lp);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(sol.residuals.relative_gap <= 1e-9);
}

TEST_CASE("positive objective scaling scales the optimum and keeps the vertex") {
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int t = 0; t < 40 && checked < 15; ++t) {
        auto lp = testgen::random_lp(rng, true);
        const auto a = solve_lp(lp);
        REQUIRE(a.status == Status::optimal);
        for (auto& c : lp.objective) c *= 3.5;
        const auto b = solve_lp(lp);
        REQUIRE(b.status == Status::optimal);
        CHECK(b.objective_value == doctest::Approx(3.5 * a.objective_value).epsilon(1e-9));
        for (std::size_t j = 0; j < a.primal.size(); ++j) CHECK(std::abs(a.primal[j] - b.primal[j]) <= 1e-9);
        ++checked;
    }
}

TEST_CASE("repeat solves are bit-identical") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        const auto lp = testgen::random_lp(rng, true);
        const auto a = solve_lp(lp);
        const auto b = solve_lp(lp);
        CHECK(a.status == b.status);
        CHECK(a.objective_value == b.objective_value);
        CHECK(a.primal == b.primal);
    }
}

TEST_CASE("incremental rows match a from-scratch solve") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 20; ++t) {
        auto full = testgen::random_lp(rng, true);
        LinearProgram head = full;
        const auto keep = full.num_rows() / 2;
        head.rhs.resize(keep);
        head.senses.resize(keep);
        std::erase_if(head.entries, [&](const Triplet& e) { return e.row >= keep; });
        IncrementalSolver inc(head, {});
        const auto first = inc.solve();
        REQUIRE(first.status == Status::optimal);
        const auto second = inc.add_rows_and_resolve(full);
        const auto scratch = solve_lp(full);
        REQUIRE(second.status == scratch.status);
        if (scratch.status == Status::optimal) {
            CHECK(std::abs(second.objective_value - scratch.objective_value) <= 1e-9 * (1 + std::abs(scratch.objective_value)));
            CHECK(second.residuals.primal_infeasibility <= 1e-8);
        }
    }
}

TEST_CASE("malformed programs are rejected") {
    LinearProgram lp;
    lp.add_variable(1, 0, 0.0);
    CHECK_THROWS_AS(solve_lp(lp), drcr::InvalidArgument);
    LinearProgram lp2;
    lp2.add_variable(0, 1, 0.0);
    lp2.entries.push_back({0, 3, 1.0});
    lp2.senses.push_back(Sense::equal);
    lp2.rhs.push_back(0);
    CHECK_THROWS_AS(solve_lp(lp2), drcr::InvalidArgument);
}

TEST_CASE("text export lists every row") {
    LinearProgram lp;
    lp.add_variable(0, 1, -1.0, "a");
    lp.add_variable(0, 1, -1.0, "b");
    lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::less_equal, 1.0);
    std::ostringstream os;
    write_text(os, lp);
    CHECK(os.str().find("r0 <= 1 1:a 1:b") != std::string::npos);
}
