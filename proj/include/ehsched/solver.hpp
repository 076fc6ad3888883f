#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ehsched/analysis.hpp"
#include "ehsched/chain.hpp"
#include "ehsched/linalg.hpp"
#include "ehsched/params.hpp"

namespace ehsched {

// Normalized RES power of the strict-threshold-m policies, p~_0, p~_1, ...
// Non-increasing in m.
struct PowerThresholds {
    std::vector<double> values;
};

struct OptimalSolution {
    SteadyState pi_star;
    int i_star = 0; // kThresholdInfinity when the search exhausts q1
    double delay = 0.0;
    double power = 0.0;
    PolicyParams policy;        // filled by policy extraction (see policy.hpp)
    PowerThresholds thresholds; // p~_0 .. p~_min(i*, q1)
};

// Brute-force stationary distribution of the policy-induced chain: solves
// pi P = pi with the last balance equation replaced by normalization. This
// is the oracle the analytical results are tested against.
inline SteadyState steady_state(const SystemParams& params, const PolicyParams& policy) {
    const Matrix p = build_transition_matrix(params, policy);
    const int n = p.rows;
    Matrix m(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) m(r, c) = p(r, c) - (r == c ? 1.0 : 0.0);
        m(r, n - 1) = 1.0;
    }
    std::vector<double> b(n, 0.0);
    b[n - 1] = 1.0;

    SteadyState out;
    out.pi = solve_row_system(m, b);
    out.clamp_and_normalize();

    std::vector<double> image = row_times_matrix(out.pi, p);
    double resid = 0.0;
    for (int c = 0; c < n; ++c) resid = std::max(resid, std::abs(image[c] - out.pi[c]));
    if (resid > 1e-10)
        throw std::runtime_error("steady_state residual " + std::to_string(resid) +
                                 " exceeds tolerance");
    return out;
}

namespace detail {

// States whose stationary mass is provably zero; dropping them (and their
// balance columns) restores invertibility if the full system is singular.
inline std::vector<bool> transient_mask(const SystemParams& p) {
    std::vector<bool> mask(p.states(), false);
    switch (p.kind()) {
        case CaseKind::I:
            for (int i = 1; i <= p.q1; ++i)
                for (int j = 1; j <= p.q2; ++j) mask[p.flat(i, j)] = true;
            break;
        case CaseKind::II:
        case CaseKind::III:
            for (int i = 1; i <= p.q1; ++i) mask[p.flat(i, p.q2)] = true;
            break;
        default:
            break;
    }
    return mask;
}

// Solves pi [lead_cols | Ps | e] = [lead_rhs | 0 | 1], retrying on a reduced
// state space with transient states removed when the full system is singular.
inline std::vector<double> solve_structured(const SystemParams& p,
                                            const std::vector<const std::vector<double>*>& lead_cols,
                                            const std::vector<double>& lead_rhs, const Matrix& ps) {
    const int n = p.states();
    const int n_lead = static_cast<int>(lead_cols.size());
    const int n_ps = ps.cols;
    if (n_lead + n_ps + 1 != n)
        throw std::logic_error("structured system is not square");

    auto assemble_and_solve = [&](const std::vector<int>& keep) {
        // keep maps reduced row -> full state; balance columns survive only
        // for kept states with j >= 1.
        const int nr = static_cast<int>(keep.size());
        std::vector<int> ps_cols;
        for (int s : keep) {
            auto [i, j] = p.state_of(s);
            if (j >= 1) ps_cols.push_back(i * p.q2 + (j - 1));
        }
        const int cols = n_lead + static_cast<int>(ps_cols.size()) + 1;
        if (cols != nr) throw std::logic_error("reduced structured system is not square");

        Matrix a(nr, cols);
        std::vector<double> b(cols, 0.0);
        for (int c = 0; c < n_lead; ++c) {
            const std::vector<double>& col = *lead_cols[c];
            for (int r = 0; r < nr; ++r) a(r, c) = col[keep[r]];
            b[c] = lead_rhs[c];
        }
        for (size_t c = 0; c < ps_cols.size(); ++c)
            for (int r = 0; r < nr; ++r) a(r, n_lead + static_cast<int>(c)) = ps(keep[r], ps_cols[c]);
        for (int r = 0; r < nr; ++r) a(r, cols - 1) = 1.0;
        b[cols - 1] = 1.0;

        std::vector<double> x = solve_row_system(a, b);
        std::vector<double> full(n, 0.0);
        for (int r = 0; r < nr; ++r) full[keep[r]] = x[r];
        return full;
    };

    std::vector<int> all(n);
    for (int s = 0; s < n; ++s) all[s] = s;
    try {
        return assemble_and_solve(all);
    } catch (const SingularMatrixError&) {
        const std::vector<bool> mask = transient_mask(p);
        std::vector<int> keep;
        for (int s = 0; s < n; ++s)
            if (!mask[s]) keep.push_back(s);
        if (keep.size() == static_cast<size_t>(n)) throw;
        return assemble_and_solve(keep);
    }
}

// pi'_m: stationary solution of the strict threshold-m structure, i.e. the
// upper-bound constraints active below m and the lower-bound constraints
// active above it.
inline std::vector<double> threshold_solution(const SystemParams& p, const BoundSystem& bs, int m) {
    std::vector<const std::vector<double>*> cols;
    std::vector<double> rhs;
    for (int i = 1; i <= p.q1; ++i) {
        cols.push_back(i <= m ? &bs.a_u[i] : &bs.a_l[i]);
        rhs.push_back(0.0);
    }
    return solve_structured(p, cols, rhs, bs.ps);
}

inline void require_solvable(const SystemParams& p) {
    p.validate(/*analytical=*/true);
    if (p.kind() == CaseKind::General)
        throw UnsupportedCaseError(
            "analytical solver supports cases I-III only (k1>1 with k2>1 is simulator-only)");
    if (!check_stability(p))
        throw InfeasibleError("optimal solution and parameters do not exist");
}

} // namespace detail

// Power of the strict-threshold-m policy via the linear system route.
inline double power_threshold(const SystemParams& params, int m) {
    detail::require_solvable(params);
    if (m < 0 || m > params.q1) throw std::out_of_range("threshold m outside 0..q1");
    const BoundSystem bs = bound_vectors(params);
    std::vector<double> pi;
    try {
        pi = detail::threshold_solution(params, bs, m);
    } catch (const SingularMatrixError& e) {
        throw std::runtime_error("singular threshold system at m=" + std::to_string(m) + ": " +
                                 e.what());
    }
    return dot(pi, bs.a0);
}

namespace detail {

inline void finalize(const SystemParams& p, OptimalSolution& sol) {
    sol.pi_star.clamp_and_normalize();
    sol.delay = average_delay(sol.pi_star, p);
    sol.power = average_power(sol.pi_star, power_coefficients(p), p);
}

// Final solve once the threshold m is located: the power constraint is tight
// and the bound constraints are active on both sides of m.
inline std::vector<double> solve_at_threshold(const SystemParams& p, const BoundSystem& bs, int m,
                                              double pmax) {
    if (m + p.k1 > p.q1)
        throw std::runtime_error("threshold i*=" + std::to_string(m) +
                                 " leaves no overflow headroom; enlarge q1");
    std::vector<const std::vector<double>*> cols = {&bs.a0};
    std::vector<double> rhs = {pmax};
    for (int i = 1; i <= p.q1; ++i) {
        if (i == m) continue;
        cols.push_back(i < m ? &bs.a_u[i] : &bs.a_l[i]);
        rhs.push_back(0.0);
    }
    return solve_structured(p, cols, rhs, bs.ps);
}

} // namespace detail

// Closed-form optimum for Case I (k1 = k2 = 1). The battery column follows a
// phi-geometric profile and the data column is geometric up to the threshold.
inline OptimalSolution solve_case1(const SystemParams& p) {
    detail::require_solvable(p);
    if (p.kind() != CaseKind::I)
        throw UnsupportedCaseError("solve_case1 requires k1 = k2 = 1");
    const DerivedConstants c = derive_constants(p);
    const double p0 = c.mu2 / c.alpha;

    OptimalSolution sol;
    sol.pi_star.pi.assign(p.states(), 0.0);
    auto& pi = sol.pi_star.pi;

    auto fill_battery_column = [&](double pi00) {
        pi[p.flat(0, 0)] = pi00;
        for (int j = 1; j <= p.q2 - 1; ++j) pi[p.flat(0, j)] = pi00 * std::pow(c.phi, -j);
        pi[p.flat(0, p.q2)] = pi00 * std::pow(c.phi, -(p.q2 - 1)) / c.phi1;
    };

    // Strict-threshold powers have a closed form in Case I:
    // p~_m = mu2 pi00(m) + (mu2 - mu0)(1 - alpha pi00(m)).
    auto threshold_power = [&](int m) {
        double geo = 0.0, ph = 1.0;
        for (int i = 1; i <= m; ++i) {
            ph *= c.phi;
            geo += ph;
        }
        const double pi00 = 1.0 / (c.alpha + geo);
        return c.mu2 * pi00 + (c.mu2 - c.mu0) * (1.0 - c.alpha * pi00);
    };

    if (p.pmax >= p0) {
        fill_battery_column(1.0 / c.alpha);
        sol.i_star = 0;
        sol.thresholds.values = {p0};
        detail::finalize(p, sol);
        return sol;
    }

    const double pi00 = (p.pmax - (c.mu2 - c.mu0)) / (c.mu2 - c.alpha * (c.mu2 - c.mu0));
    fill_battery_column(pi00);
    const double b = 1.0 - c.alpha * pi00;

    // i* = max { i : pi00 sum_{m=1}^{i-1} phi^m <= b }, found by direct
    // summation; floor-of-log classification is fragile at exact boundaries.
    int i_star = 1;
    double partial = 0.0, ph = 1.0;
    while (i_star <= p.q1) {
        ph *= c.phi;
        if (partial + pi00 * ph > b) break;
        partial += pi00 * ph;
        ++i_star;
    }

    if (i_star > p.q1) {
        // The search exhausts the buffer: the power budget is unattainable at
        // this q1. Report the pure-harvesting threshold-q1 distribution, the
        // full phi-geometric profile, as the sentinel solution.
        sol.i_star = kThresholdInfinity;
        double geo = 0.0;
        ph = 1.0;
        for (int i = 1; i <= p.q1; ++i) {
            ph *= c.phi;
            geo += ph;
        }
        const double pi00_q1 = 1.0 / (c.alpha + geo);
        fill_battery_column(pi00_q1);
        for (int i = 1; i <= p.q1; ++i) pi[p.flat(i, 0)] = pi00_q1 * std::pow(c.phi, i);
    } else if (i_star + p.k1 > p.q1) {
        throw std::runtime_error("threshold i*=" + std::to_string(i_star) +
                                 " leaves no overflow headroom; enlarge q1");
    } else {
        sol.i_star = i_star;
        for (int i = 1; i < i_star; ++i) pi[p.flat(i, 0)] = pi00 * std::pow(c.phi, i);
        pi[p.flat(i_star, 0)] = b - partial;
    }

    const int top = (sol.i_star == kThresholdInfinity) ? p.q1 : sol.i_star;
    sol.thresholds.values.reserve(top + 1);
    for (int m = 0; m <= top; ++m) sol.thresholds.values.push_back(threshold_power(m));
    detail::finalize(p, sol);
    return sol;
}

// Threshold search over the strict-threshold power sequence, then one
// structured solve at the located threshold (cases I-III).
inline OptimalSolution find_optimal(const SystemParams& p) {
    detail::require_solvable(p);
    const BoundSystem bs = bound_vectors(p);

    OptimalSolution sol;
    std::vector<double> pi_m = detail::threshold_solution(p, bs, 0);
    double p_m = dot(pi_m, bs.a0);
    sol.thresholds.values.push_back(p_m);

    if (p.pmax >= p_m) {
        sol.pi_star.pi = std::move(pi_m);
        sol.i_star = 0;
        detail::finalize(p, sol);
        return sol;
    }

    for (int m = 1; m <= p.q1; ++m) {
        pi_m = detail::threshold_solution(p, bs, m);
        p_m = dot(pi_m, bs.a0);
        sol.thresholds.values.push_back(p_m);
        if (p_m <= p.pmax) {
            sol.i_star = m;
            sol.pi_star.pi = detail::solve_at_threshold(p, bs, m, p.pmax);
            detail::finalize(p, sol);
            return sol;
        }
    }

    // Even the pure-harvesting threshold q1 exceeds pmax only if the buffer
    // is too small for this power budget.
    sol.pi_star.pi = std::move(pi_m);
    sol.i_star = kThresholdInfinity;
    detail::finalize(p, sol);
    return sol;
}

} // namespace ehsched
