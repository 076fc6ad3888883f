#include <catch2/catch_amalgamated.hpp>

#include "ehsched/policy.hpp"
#include "ehsched/solver.hpp"

using namespace ehsched;

namespace {
const SystemParams kRef{0.3, 0.3, 1, 1, 10, 1, 0.042};
}

TEST_CASE("strict threshold policies") {
    SECTION("m = 0 always transmits when the battery is empty") {
        const PolicyParams pol = strict_threshold_policy(kRef, 0);
        for (int i = 0; i <= kRef.q1; ++i) {
            CHECK(pol.g[i] == 1.0);
            CHECK(pol.f[i] == (i > 0 ? 1.0 : 0.0));
        }
    }
    SECTION("m = q1 keeps the RES idle except to avert a buffer drop") {
        const PolicyParams pol = strict_threshold_policy(kRef, kRef.q1);
        for (int i = 0; i <= kRef.q1; ++i) {
            CHECK(pol.g[i] == (i >= kRef.q1 ? 1.0 : 0.0));
            CHECK(pol.f[i] == 0.0);
        }
        // With k1 = 1 the g coin at the buffer edge replaces a drop with an
        // RES transmit, so the induced chain matches pure harvesting exactly.
        const PolicyParams harvest = PolicyParams::zeros(kRef.q1);
        const SteadyState pi = steady_state(kRef, pol);
        const SteadyState pi_h = steady_state(kRef, harvest);
        for (int s = 0; s < kRef.states(); ++s)
            CHECK(pi.pi[s] == Catch::Approx(pi_h.pi[s]).margin(1e-10));
        CHECK(definitional_power(pi_h, kRef, harvest) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("batched arrivals shift the g boundary by k1 - 1") {
        const SystemParams p{0.1, 0.3, 3, 1, 12, 2, 0.5};
        const PolicyParams pol = strict_threshold_policy(p, 5);
        for (int i = 0; i <= p.q1; ++i) {
            CHECK(pol.g[i] == (i >= 5 - p.k1 + 1 ? 1.0 : 0.0));
            CHECK(pol.f[i] == (i > 5 ? 1.0 : 0.0));
        }
    }
    SECTION("oracle power of strict m = 4 on the reference instance") {
        const SteadyState pi = steady_state(kRef, strict_threshold_policy(kRef, 4));
        CHECK(average_power(pi, power_coefficients(kRef), kRef) ==
              Catch::Approx(0.21 / 5.7).margin(1e-10));
    }
}

TEST_CASE("extracted optimal policy on the reference instance") {
    const OptimalSolution sol = solve(kRef);
    for (int i = 0; i <= 2; ++i) CHECK(sol.policy.g[i] == 0.0);
    CHECK(sol.policy.g[3] == Catch::Approx(0.7).margin(1e-10));
    for (int i = 4; i <= kRef.q1; ++i) CHECK(sol.policy.g[i] == 1.0);
    for (double f : sol.policy.f) CHECK(f == 0.0);
}

TEST_CASE("abundant budget: corollary policy") {
    SystemParams p = kRef;
    p.pmax = 0.13;
    const OptimalSolution sol = solve(p);
    for (int i = 0; i <= p.q1; ++i) {
        CHECK(sol.policy.g[i] == 1.0);
        CHECK(sol.policy.f[i] == 0.0);
    }
}

TEST_CASE("extracted policies reproduce pi* through the oracle") {
    const std::vector<SystemParams> points = {
        {0.3, 0.3, 1, 1, 10, 1, 0.042},  // case I
        {0.5, 0.2, 1, 2, 30, 6, 0.115},  // case II
        {0.1, 0.3, 2, 1, 30, 4, 0.0079}, // case III, g segment
        {0.1, 0.3, 3, 1, 30, 3, 0.022},  // case III, saturated-g / f segment
    };
    for (const SystemParams& p : points) {
        const OptimalSolution sol = solve(p);
        const SteadyState oracle = steady_state(p, sol.policy);
        double worst = 0.0;
        for (int s = 0; s < p.states(); ++s)
            worst = std::max(worst, std::abs(oracle.pi[s] - sol.pi_star.pi[s]));
        INFO("k1=" << p.k1 << " k2=" << p.k2 << " pmax=" << p.pmax);
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("case III above the threshold drains deterministically") {
    const SystemParams p{0.1, 0.3, 2, 1, 30, 4, 0.004};
    const OptimalSolution sol = solve(p);
    REQUIRE(sol.i_star >= 1);
    REQUIRE(sol.i_star != kThresholdInfinity);
    for (int i = sol.i_star + 1; i <= p.q1; ++i) CHECK(sol.policy.f[i] == 1.0);
    for (int i = 1; i < sol.i_star; ++i) CHECK(sol.policy.f[i] == 0.0);
}

TEST_CASE("extracted policy powers hit the budget exactly (cases I and II)") {
    const std::vector<SystemParams> points = {
        {0.3, 0.3, 1, 1, 12, 2, 0.03},
        {0.5, 0.1, 1, 2, 20, 5, 0.301},
    };
    for (const SystemParams& p : points) {
        const OptimalSolution sol = solve(p);
        REQUIRE(sol.i_star >= 1);
        const SteadyState pi = steady_state(p, sol.policy);
        PolicyParams pol = sol.policy;
        CHECK(definitional_power(pi, p, pol) == Catch::Approx(p.pmax).margin(1e-8));
    }
}

TEST_CASE("infinity sentinel maps to the pure-harvesting strict policy") {
    const SystemParams p{0.3, 0.3, 1, 1, 5, 1, 0.001};
    const OptimalSolution sol = solve(p);
    REQUIRE(sol.i_star == kThresholdInfinity);
    for (int i = 0; i < p.q1; ++i) CHECK(sol.policy.g[i] == 0.0);
    CHECK(sol.policy.g[p.q1] == 1.0);
    for (double f : sol.policy.f) CHECK(f == 0.0);
}
