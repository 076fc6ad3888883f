#include <catch2/catch_amalgamated.hpp>

#include "ehsched/sweep.hpp"
#include "ehsched/validation.hpp"

using namespace ehsched;

TEST_CASE("self-validation suite passes with default options") {
    ValidationOptions opts;
    opts.policies_per_case = 50; // trimmed; the full run is the acceptance gate
    for (const CheckResult& r : run_validation(opts)) {
        INFO(r.name << ": " << r.detail);
        CHECK(r.passed);
    }
}

TEST_CASE("fault injection: flipped zeta signs are caught") {
    ValidationOptions opts;
    opts.policies_per_case = 10;
    opts.mutate_zeta_sign = true;
    const CheckResult r = check_power_identity(opts);
    CHECK_FALSE(r.passed);
}

TEST_CASE("sweep produces ordered rows and flags bad points") {
    SystemParams base{0.3, 0.3, 1, 1, 30, 1, 0.0};
    const std::vector<double> grid = {0.02, 0.05, 0.08, 0.11};
    SweepOptions opts;
    const std::vector<SweepPoint> rows = sweep_curve(base, grid, opts);
    REQUIRE(rows.size() == grid.size());
    double prev_delay = 1e30;
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].pmax == grid[i]);
        REQUIRE(rows[i].ok);
        CHECK(rows[i].delay <= prev_delay + 1e-12);
        prev_delay = rows[i].delay;
    }
    // An infeasible grid point is flagged without aborting the sweep.
    SystemParams tight{0.5, 0.1, 1, 2, 30, 5, 0.0};
    const std::vector<SweepPoint> mixed = sweep_curve(tight, {0.25, 0.35}, opts);
    CHECK_FALSE(mixed[0].ok);
    CHECK(!mixed[0].error.empty());
    CHECK(mixed[1].ok);
}

TEST_CASE("sweep with jobs > 1 matches the sequential result") {
    SystemParams base{0.5, 0.1, 1, 2, 30, 5, 0.0};
    const std::vector<double> grid = linear_grid(0.31, 0.5, 8);
    SweepOptions seq, par;
    par.jobs = 4;
    const auto a = sweep_curve(base, grid, seq);
    const auto b = sweep_curve(base, grid, par);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ok == b[i].ok);
        CHECK(a[i].delay == b[i].delay);
        CHECK(a[i].i_star == b[i].i_star);
    }
}

TEST_CASE("linear grid endpoints") {
    const std::vector<double> g = linear_grid(0.1, 0.5, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == Catch::Approx(0.1));
    CHECK(g.back() == Catch::Approx(0.5));
    CHECK(linear_grid(0.3, 0.9, 1) == std::vector<double>{0.3});
    CHECK_THROWS_AS(linear_grid(0.0, 1.0, 0), std::invalid_argument);
}
