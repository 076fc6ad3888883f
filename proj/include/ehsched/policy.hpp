#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ehsched/analysis.hpp"
#include "ehsched/params.hpp"
#include "ehsched/solver.hpp"

namespace ehsched {

// Strict threshold-m policy: wait for harvested energy while the data queue
// is at or below m, draw from the RES as soon as it would exceed m. With a
// batch of k1 arriving, the post-arrival length exceeds m from pre-arrival
// length m - k1 + 1 onward.
inline PolicyParams strict_threshold_policy(const SystemParams& p, int m) {
    if (m < 0 || m > p.q1) throw std::out_of_range("threshold m outside 0..q1");
    PolicyParams pol = PolicyParams::zeros(p.q1);
    for (int i = 0; i <= p.q1; ++i) {
        pol.g[i] = (i >= m - p.k1 + 1) ? 1.0 : 0.0;
        pol.f[i] = (i > m) ? 1.0 : 0.0;
    }
    pol.threshold = m;
    return pol;
}

namespace detail {

inline double checked_probability(double x, const std::string& label) {
    if (x < -1e-9 || x > 1.0 + 1e-9)
        throw std::runtime_error("extracted " + label + " = " + std::to_string(x) +
                                 " falls outside [0,1] tolerance band");
    return std::clamp(x, 0.0, 1.0);
}

inline void require_denominator(double d, const std::string& label) {
    if (std::abs(d) < 1e-14)
        throw std::runtime_error("degenerate optimal distribution: zero denominator for " + label);
}

} // namespace detail

// Optimal transmission probabilities recovered from the optimal stationary
// distribution. Entries unreachable under pi* are set to 1 so the policy
// behaves sensibly from arbitrary initial states.
inline PolicyParams extract_policy(const SystemParams& p, const OptimalSolution& sol) {
    const CaseKind kind = p.kind();
    if (kind == CaseKind::General)
        throw UnsupportedCaseError("policy extraction is defined for cases I-III only");
    const DerivedConstants c = derive_constants(p);
    const auto& pi = sol.pi_star.pi;

    if (sol.i_star == kThresholdInfinity) return strict_threshold_policy(p, p.q1);

    PolicyParams pol = PolicyParams::zeros(p.q1);
    pol.threshold = sol.i_star;
    const int is = sol.i_star;

    if (is == 0) {
        // Abundant RES: transmit whenever the battery is empty and data is
        // present. In Case III the queue still backs up (k1 packets per
        // arrival), so the drain probabilities stay at 1.
        for (int i = 0; i <= p.q1; ++i) {
            pol.g[i] = 1.0;
            pol.f[i] = (kind == CaseKind::III && i > 0) ? 1.0 : 0.0;
        }
        return pol;
    }

    const int frac_idx = is - p.k1; // queue length with the fractional g*
    for (int i = 0; i <= p.q1; ++i) pol.g[i] = (i > frac_idx) ? 1.0 : 0.0;

    // Case III only: fractional drain probability at i*, set below when the
    // g coin alone cannot reproduce the optimal distribution.
    double f_at_istar = 0.0;

    if (frac_idx >= 0) {
        double g_frac = 0.0;
        switch (kind) {
            case CaseKind::I: {
                const double denom = pi[p.flat(is - 1, 0)] * c.phi;
                detail::require_denominator(denom, "g*");
                g_frac = 1.0 - pi[p.flat(is, 0)] / denom;
                // Closed-form route via pi_(0,0); both must agree.
                const double pi00 = pi[p.flat(0, 0)];
                double geo = 0.0, ph = 1.0;
                for (int i = 1; i <= is - 1; ++i) {
                    ph *= c.phi;
                    geo += ph;
                }
                const double alt_den = pi00 * std::pow(c.phi, is);
                detail::require_denominator(alt_den, "g* (closed form)");
                const double alt = 1.0 - (1.0 - c.alpha * pi00 - pi00 * geo) / alt_den;
                if (std::abs(alt - g_frac) > 1e-9)
                    throw std::runtime_error("case I g* routes disagree: " + std::to_string(g_frac) +
                                             " vs " + std::to_string(alt));
                break;
            }
            case CaseKind::II: {
                const double denom = c.mu2 * pi[p.flat(is - 1, 0)];
                detail::require_denominator(denom, "g*");
                double tail = 0.0;
                for (int j = 1; j <= p.q2; ++j) tail += pi[p.flat(is, j)];
                g_frac = 1.0 - (pi[p.flat(is, 0)] * c.mu0 + (1.0 - p.eta1) * tail) / denom;
                break;
            }
            case CaseKind::III: {
                // Local equilibrium at (i*,0):
                //   pi_(i*,0) (mu0 + mu1 f_i*) - mu2 pi_(i*-k1,0) (1 - g) = R,
                //   R = eta1 sum_{m=i*-k1+1}^{i*-1} pi_m
                //       - (1-eta1) sum_{j>=1} pi_(i*,j).
                // One coin has to absorb the power slack; try the g coin with
                // f_i* = 0 first, and if that demands g > 1 saturate g and let
                // the f coin at i* carry the remainder instead.
                double mid = 0.0;
                for (int m = frac_idx + 1; m < is; ++m) mid += marginal_queue_prob(sol.pi_star, p, m);
                double tail = 0.0;
                for (int j = 1; j <= p.q2; ++j) tail += pi[p.flat(is, j)];
                const double rhs = p.eta1 * mid - (1.0 - p.eta1) * tail;
                const double denom = c.mu2 * pi[p.flat(frac_idx, 0)];
                detail::require_denominator(denom, "g*");
                g_frac = 1.0 - (pi[p.flat(is, 0)] * c.mu0 - rhs) / denom;
                if (g_frac > 1.0 + 1e-9) {
                    g_frac = 1.0;
                    const double fden = pi[p.flat(is, 0)] * c.mu1;
                    detail::require_denominator(fden, "f*");
                    f_at_istar = detail::checked_probability(
                        (rhs - pi[p.flat(is, 0)] * c.mu0) / fden, "f*");
                }
                break;
            }
            default:
                break;
        }
        pol.g[frac_idx] = detail::checked_probability(g_frac, "g*");
    }

    for (int i = 0; i <= p.q1; ++i) {
        if (i < is || i == 0) {
            if (i > 0) pol.f[i] = 0.0;
        } else if (i == is) {
            if (kind == CaseKind::III && is < p.k1) {
                const double denom = pi[p.flat(is, 0)] * c.mu1;
                detail::require_denominator(denom, "f*");
                double head = 0.0;
                for (int m = 0; m < is; ++m) head += marginal_queue_prob(sol.pi_star, p, m);
                const double f_frac =
                    (p.eta1 * head - (1.0 - p.eta1) * marginal_queue_prob(sol.pi_star, p, is) +
                     pi[p.flat(is, 0)] * c.mu1) /
                    denom;
                pol.f[is] = detail::checked_probability(f_frac, "f*");
            } else {
                pol.f[is] = f_at_istar;
            }
        } else {
            pol.f[i] = (kind == CaseKind::III) ? 1.0 : 0.0;
        }
    }
    return pol;
}

// Convenience end-to-end solve: analytical optimum plus extracted policy.
inline OptimalSolution solve(const SystemParams& p) {
    OptimalSolution sol = (p.kind() == CaseKind::I) ? solve_case1(p) : find_optimal(p);
    sol.policy = extract_policy(p, sol);
    return sol;
}

} // namespace ehsched
