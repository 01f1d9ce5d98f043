#include "doctest.h"

#include <random>

#include "helpers.hpp"
#include "polystab/lp.hpp"

using namespace polystab;

TEST_CASE("single constraint optimum") {
    LinearProgram lp;
    lp.add_var(0.0, kInf, 1.0);
    lp.add_constraint({1.0}, Relation::LessEq, 3.0);
    LpSolution sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.value == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(sol.point[0] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("no upper bound is unbounded") {
    LinearProgram lp;
    lp.add_var(0.0, kInf, 1.0);
    CHECK(solve(lp).status == LpStatus::Unbounded);
}

TEST_CASE("contradictory bounds are infeasible") {
    LinearProgram lp;
    lp.add_var(0.0, kInf, 0.0);
    lp.add_constraint({1.0}, Relation::LessEq, -1.0);
    CHECK(solve(lp).status == LpStatus::Infeasible);
}

TEST_CASE("empty program") {
    LinearProgram lp;
    LpSolution sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.value == 0.0);
    CHECK(sol.point.empty());
}

TEST_CASE("malformed program is rejected") {
    LinearProgram lp;
    lp.add_var();
    lp.add_constraint({1.0, 2.0}, Relation::LessEq, 1.0);
    CHECK_THROWS_AS(solve(lp), MalformedProgram);
}

TEST_CASE("free and negative variables") {
    // max x + y  s.t.  x + y <= 2, x - y <= 0, y <= 5, x free, y free
    LinearProgram lp;
    lp.add_var(-kInf, kInf, 1.0);
    lp.add_var(-kInf, kInf, 1.0);
    lp.add_constraint({1.0, 1.0}, Relation::LessEq, 2.0);
    LpSolution sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("equality constraints") {
    // max 3x + 2y s.t. x + y = 4, x - y = 2 -> x=3, y=1, value 11
    LinearProgram lp;
    lp.add_var(0.0, kInf, 3.0);
    lp.add_var(0.0, kInf, 2.0);
    lp.add_constraint({1.0, 1.0}, Relation::Equal, 4.0);
    lp.add_constraint({1.0, -1.0}, Relation::Equal, 2.0);
    LpSolution sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.value == doctest::Approx(11.0).epsilon(1e-9));
}

TEST_CASE("min/max duality by negation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        LinearProgram lp;
        const int n = 1 + static_cast<int>(rng() % 4);
        for (int j = 0; j < n; ++j) lp.add_var(-3.0, 3.0, unif(rng));
        for (int i = 0; i < n + 1; ++i) {
            std::vector<double> row(n);
            for (double& v : row) v = unif(rng);
            lp.add_constraint(row, Relation::LessEq, 1.0 + std::fabs(unif(rng)));
        }
        LpSolution mx = solve(lp);
        LinearProgram neg = lp;
        neg.sense = Sense::Minimize;
        for (double& c : neg.objective) c = -c;
        LpSolution mn = solve(neg);
        REQUIRE(mx.status == LpStatus::Optimal);
        REQUIRE(mn.status == LpStatus::Optimal);
        CHECK(mx.value == doctest::Approx(-mn.value).epsilon(1e-8));
    }
}

TEST_CASE("optimal points are feasible within tolerance") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        LinearProgram lp;
        for (int j = 0; j < n; ++j) lp.add_var(-3.0, 3.0, unif(rng));
        std::vector<double> center(n);
        for (double& v : center) v = unif(rng) / 2.0;
        for (int i = 0; i < n + 2; ++i) {
            std::vector<double> row(n);
            double at = 0.0;
            for (int j = 0; j < n; ++j) {
                row[j] = unif(rng);
                at += row[j] * center[j];
            }
            lp.add_constraint(row, Relation::LessEq, at + 0.1 + std::fabs(unif(rng)));
        }
        LpSolution sol = solve(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(max_violation(lp, sol.point) <= 1e-8);
    }
}

TEST_CASE("agrees with vertex-enumeration oracle on random bounded LPs") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        LinearProgram lp;
        for (int j = 0; j < n; ++j) lp.add_var(-3.0, 3.0, unif(rng));
        std::vector<double> center(n);
        for (double& v : center) v = unif(rng) / 2.0;
        const int rows = n + 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < rows; ++i) {
            std::vector<double> row(n);
            double at = 0.0;
            for (int j = 0; j < n; ++j) {
                row[j] = unif(rng);
                at += row[j] * center[j];
            }
            lp.add_constraint(row, Relation::LessEq, at + 0.1 + std::fabs(unif(rng)));
        }
        LpSolution sol = solve(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        const double oracle = testutil::lp_vertex_oracle(lp);
        CHECK(sol.value == doctest::Approx(oracle).epsilon(1e-6));
        ++checked;
    }
    CHECK(checked == 60);
}
