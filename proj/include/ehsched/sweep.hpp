#pragma once

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "ehsched/policy.hpp"
#include "ehsched/simulator.hpp"
#include "ehsched/solver.hpp"

namespace ehsched {

struct SweepPoint {
    double pmax = 0.0;
    bool ok = false;
    std::string error;        // non-empty when ok is false
    int i_star = 0;           // kThresholdInfinity when the buffer is exhausted
    double delay = 0.0;       // slots
    double power = 0.0;       // normalized RES power
    bool simulated = false;
    double sim_delay = 0.0;
    double sim_delay_stderr = 0.0;
    double sim_power = 0.0;
    double sim_power_stderr = 0.0;
};

struct SweepOptions {
    bool simulate = false;
    SimConfig sim{};   // seed is offset by the grid index per point
    int jobs = 1;
};

// Delay-power tradeoff curve over a pmax grid. The strict-threshold powers
// p~_m depend only on the system parameters, not on pmax, so they are
// computed once and shared by every grid point; each point then needs a
// single structured solve. Rows come back in grid order; a failing point is
// flagged and the sweep continues.
inline std::vector<SweepPoint> sweep_curve(SystemParams base, const std::vector<double>& grid,
                                           const SweepOptions& opts) {
    base.pmax = grid.empty() ? base.pmax : grid.front();
    {
        SystemParams probe = base;
        probe.pmax = 1.0; // grid entries carry the budgets; validate the rest
        probe.validate(/*analytical=*/true);
        if (probe.kind() == CaseKind::General)
            throw UnsupportedCaseError(
                "analytical solver supports cases I-III only (k1>1 with k2>1 is simulator-only)");
    }

    std::vector<SweepPoint> rows(grid.size());
    for (size_t idx = 0; idx < grid.size(); ++idx) rows[idx].pmax = grid[idx];

    const bool case1 = base.kind() == CaseKind::I;
    BoundSystem bs;
    std::vector<double> thresholds; // p~_0 .. extended on demand
    if (!case1) {
        bs = bound_vectors(base);
        // Precompute up to the deepest threshold any feasible grid point needs.
        double min_feasible = 1.0;
        bool any = false;
        for (double pm : grid) {
            SystemParams q = base;
            q.pmax = pm;
            if (check_stability(q)) {
                min_feasible = std::min(min_feasible, pm);
                any = true;
            }
        }
        if (any) {
            for (int m = 0; m <= base.q1; ++m) {
                thresholds.push_back(dot(detail::threshold_solution(base, bs, m), bs.a0));
                if (thresholds.back() <= min_feasible) break;
            }
        }
    }

    auto solve_point = [&](size_t idx) {
        SweepPoint& row = rows[idx];
        SystemParams p = base;
        p.pmax = row.pmax;
        try {
            OptimalSolution sol;
            if (case1) {
                sol = solve_case1(p);
            } else {
                detail::require_solvable(p);
                if (p.pmax >= thresholds.front()) {
                    sol.i_star = 0;
                    sol.pi_star.pi = detail::threshold_solution(p, bs, 0);
                } else {
                    int m = 1;
                    while (m < static_cast<int>(thresholds.size()) && thresholds[m] > p.pmax) ++m;
                    if (m >= static_cast<int>(thresholds.size())) {
                        // Cache stopped early only when every deeper point is
                        // infeasible; reaching here means the search exhausted q1.
                        sol.i_star = kThresholdInfinity;
                        sol.pi_star.pi = detail::threshold_solution(p, bs, p.q1);
                    } else {
                        sol.i_star = m;
                        sol.pi_star.pi = detail::solve_at_threshold(p, bs, m, p.pmax);
                    }
                }
                detail::finalize(p, sol);
            }
            sol.policy = extract_policy(p, sol);
            row.i_star = sol.i_star;
            row.delay = sol.delay;
            row.power = sol.power;
            if (opts.simulate) {
                SimConfig cfg = opts.sim;
                cfg.seed = opts.sim.seed + idx; // independent but reproducible
                const SimResult sim = run(p, sol.policy, cfg);
                row.simulated = true;
                row.sim_delay = sim.empirical_delay;
                row.sim_delay_stderr = sim.delay_stderr;
                row.sim_power = sim.empirical_power;
                row.sim_power_stderr = sim.power_stderr;
            }
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    };

    const int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || grid.size() <= 1) {
        for (size_t idx = 0; idx < grid.size(); ++idx) solve_point(idx);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t idx = next.fetch_add(1); idx < grid.size(); idx = next.fetch_add(1))
                solve_point(idx);
        };
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(jobs, static_cast<int>(grid.size()));
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

// Evenly spaced grid helper for the CLI: count points from lo to hi inclusive.
inline std::vector<double> linear_grid(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("grid needs at least one point");
    std::vector<double> g;
    g.reserve(count);
    if (count == 1) {
        g.push_back(lo);
        return g;
    }
    for (int i = 0; i < count; ++i) g.push_back(lo + (hi - lo) * i / (count - 1));
    return g;
}

} // namespace ehsched
