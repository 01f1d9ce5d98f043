#include "doctest.h"

#include <random>

#include "helpers.hpp"
#include "polystab/wmdp.hpp"

using namespace polystab;

namespace {

Wmdp single_self_loop(double weight) {
    Wmdp m;
    m.state_count = 1;
    m.init_state = 0;
    m.actions = {{WmdpAction{{{0, 1.0}}, weight}}};
    return m;
}

// The eight-state single-action cycle WMDP used throughout the tests:
// tau_i has support {s_i, s_{i+1}} for odd i and {s_{i+1}, s_{i+2}} for even
// i (indices mod 8), with probability p_i on the first target.
Wmdp sample_eight_state(const std::vector<double>& p, double weight = -1.0) {
    Wmdp m;
    m.state_count = 8;
    m.init_state = 0;
    m.actions.resize(8);
    for (int i = 1; i <= 8; ++i) {
        const int s = i - 1;
        WmdpAction a;
        a.weight = weight;
        int first, second;
        if (i % 2 == 1) {
            first = i % 8;
            second = (i + 1) % 8;
        } else {
            first = (i + 1) % 8;
            second = (i + 2) % 8;
        }
        a.dist = {{first, p[s]}, {second, 1.0 - p[s]}};
        std::sort(a.dist.begin(), a.dist.end());
        m.actions[s].push_back(a);
    }
    return m;
}

}  // namespace

TEST_CASE("validate accepts a self-loop model") {
    CHECK(validate(single_self_loop(-1.0)).empty());
}

TEST_CASE("validate flags a non-stochastic distribution") {
    Wmdp m = single_self_loop(0.0);
    m.actions[0][0].dist[0].second = 0.9;
    auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::DistributionNotStochastic);
    CHECK(v[0].state == 0);
    CHECK(v[0].action == 0);
}

TEST_CASE("validate flags a blocking state") {
    Wmdp m = single_self_loop(0.0);
    m.actions[0].clear();
    auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::BlockingState);
}

TEST_CASE("induce on a self-loop") {
    Wmdp m = single_self_loop(5.0);
    Wdtmc c = induce(m, MemorylessPolicy{{0}});
    REQUIRE(c.rows[0].size() == 1);
    CHECK(c.rows[0][0].to == 0);
    CHECK(c.rows[0][0].prob == 1.0);
    CHECK(c.rows[0][0].weight == 5.0);
}

TEST_CASE("induce copies the action weight onto every edge") {
    Wmdp m;
    m.state_count = 2;
    m.init_state = 0;
    m.actions.resize(2);
    m.actions[0].push_back({{{1, 1.0}}, -2.0});
    m.actions[1].push_back({{{1, 1.0}}, 0.0});
    Wdtmc c = induce(m, MemorylessPolicy{{0, 0}});
    CHECK(c.rows[0][0].to == 1);
    CHECK(c.rows[0][0].weight == -2.0);
}

TEST_CASE("induce rejects unavailable actions") {
    Wmdp m = single_self_loop(1.0);
    CHECK_THROWS_AS(induce(m, MemorylessPolicy{{3}}), PolicyActionUnavailable);
}

TEST_CASE("induce on the eight-state sample follows the tau structure") {
    std::vector<double> p(8);
    for (int i = 0; i < 8; ++i) p[i] = 0.25 + 0.05 * i;
    Wmdp m = sample_eight_state(p);
    Wdtmc c = induce(m, MemorylessPolicy{std::vector<int>(8, 0)});
    // s0 (i=1, odd): targets s1 (p) and s2 (1-p).
    REQUIRE(c.rows[0].size() == 2);
    CHECK(c.rows[0][0].to == 1);
    CHECK(c.rows[0][0].prob == doctest::Approx(p[0]));
    CHECK(c.rows[0][1].to == 2);
    // s1 (i=2, even): targets s3 and s4.
    CHECK(c.rows[1][0].to == 3);
    CHECK(c.rows[1][1].to == 4);
    // s7 (i=8, even): targets s1 and s2 (wrap-around).
    CHECK(c.rows[7][0].to == 1);
    CHECK(c.rows[7][1].to == 2);
}

TEST_CASE("path weight") {
    Wmdp m;
    m.state_count = 3;
    m.init_state = 0;
    m.actions.resize(3);
    m.actions[0].push_back({{{1, 1.0}}, 1.0});
    m.actions[1].push_back({{{2, 1.0}}, -3.0});
    m.actions[2].push_back({{{2, 1.0}}, 0.0});

    CHECK(path_weight(m, FinitePath{0, {}}) == 0.0);
    FinitePath two{0, {{0, 1}, {0, 2}}};
    CHECK(path_weight(m, two) == doctest::Approx(-2.0));

    FinitePath bad{0, {{0, 2}}};
    CHECK_THROWS_AS(path_weight(m, bad), InvalidPath);
}

TEST_CASE("path weight absorbs +inf") {
    Wmdp m;
    m.state_count = 2;
    m.init_state = 0;
    m.actions.resize(2);
    m.actions[0].push_back({{{1, 1.0}}, kInf});
    m.actions[1].push_back({{{1, 1.0}}, -1.0});
    FinitePath p{0, {{0, 1}, {0, 1}}};
    CHECK(std::isinf(path_weight(m, p)));
}

TEST_CASE("path weight is additive over concatenation") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        Wmdp m = testutil::random_wmdp(rng, 4, 2);
        // Random walk of length 6 from init, split at position 3.
        FinitePath whole{m.init_state, {}};
        int cur = m.init_state;
        for (int step = 0; step < 6; ++step) {
            const int a = static_cast<int>(rng() % m.actions[cur].size());
            const auto& dist = m.actions[cur][a].dist;
            const int next = dist[rng() % dist.size()].first;
            whole.steps.push_back({a, next});
            cur = next;
        }
        FinitePath head{m.init_state, {whole.steps.begin(), whole.steps.begin() + 3}};
        FinitePath tail{head.steps.back().second, {whole.steps.begin() + 3, whole.steps.end()}};
        CHECK(path_weight(m, whole) ==
              doctest::Approx(path_weight(m, head) + path_weight(m, tail)));
    }
}

TEST_CASE("induced rows stay stochastic and path probabilities sum to one") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        Wmdp m = testutil::random_wmdp(rng, 5, 3);
        MemorylessPolicy rho;
        for (int s = 0; s < m.state_count; ++s)
            rho.choice.push_back(static_cast<int>(rng() % m.actions[s].size()));
        Wdtmc c = induce(m, rho);
        for (int s = 0; s < c.state_count; ++s) {
            double sum = 0.0;
            for (const auto& e : c.rows[s]) {
                sum += e.prob;
                CHECK(e.prob >= 0.0);
                CHECK(e.prob <= 1.0 + 1e-12);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        // Total probability over all length-n paths from init.
        for (int n = 1; n <= 6; n += 5) {
            std::vector<double> mass(c.state_count, 0.0);
            mass[c.init_state] = 1.0;
            for (int step = 0; step < n; ++step) {
                std::vector<double> next(c.state_count, 0.0);
                for (int s = 0; s < c.state_count; ++s)
                    for (const auto& e : c.rows[s]) next[e.to] += mass[s] * e.prob;
                mass = next;
            }
            double total = 0.0;
            for (double v : mass) total += v;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}
