#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ehsched/chain.hpp"
#include "ehsched/linalg.hpp"
#include "ehsched/params.hpp"

namespace ehsched {

// Stationary distribution over the (q1+1)(q2+1) joint queue states, indexed
// by SystemParams::flat.
struct SteadyState {
    std::vector<double> pi;

    double sum() const {
        double s = 0.0;
        for (double x : pi) s += x;
        return s;
    }

    // Tiny negatives from linear solves are rounding noise; anything more
    // negative than `tol` signals structural infeasibility.
    void clamp_and_normalize(double tol = 1e-9) {
        for (double& x : pi) {
            if (x < 0.0) {
                if (x < -tol)
                    throw std::runtime_error("steady-state entry " + std::to_string(x) +
                                             " below clamping tolerance");
                x = 0.0;
            }
        }
        const double s = sum();
        if (s <= 0.0) throw std::runtime_error("steady-state vector sums to zero");
        for (double& x : pi) x /= s;
    }
};

// Linear coefficients of the RES power in terms of pi_(i,0) and pi_(i,1).
struct PowerCoefficients {
    std::vector<double> xi;   // length q1 + 1
    std::vector<double> zeta; // length q1 + 1
};

inline PowerCoefficients power_coefficients(const SystemParams& p) {
    const CaseKind kind = p.kind();
    if (kind == CaseKind::General)
        throw UnsupportedCaseError("power coefficients are defined for cases I-III only");
    const DerivedConstants c = derive_constants(p);
    const double eta2bar = 1.0 - p.eta2;
    PowerCoefficients out;
    out.xi.assign(static_cast<size_t>(p.q1) + 1, 0.0);
    out.zeta.assign(static_cast<size_t>(p.q1) + 1, 0.0);

    switch (kind) {
        case CaseKind::I:
            out.xi[0] = c.mu2;
            for (int i = 1; i <= p.q1; ++i) out.xi[i] = c.mu2 - c.mu0;
            break;
        case CaseKind::II:
            for (int i = 0; i <= p.q1; ++i) out.xi[i] = c.mu2 + p.eta2 * (p.q1 - i);
            out.zeta[0] = c.mu2 * p.q1;
            for (int i = 1; i <= p.q1; ++i) out.zeta[i] = eta2bar * (p.q1 - i) + c.mu1;
            break;
        case CaseKind::III:
            out.xi[0] = c.mu0 * p.q1 - c.mu3 + p.k1 * p.eta1;
            for (int i = 1; i <= p.q1 - p.k1; ++i) out.xi[i] = p.k1 * p.eta1 - p.eta2;
            for (int i = std::max(1, p.q1 - p.k1 + 1); i <= p.q1; ++i)
                out.xi[i] = p.eta1 * (p.q1 - i) - p.eta2;
            out.zeta[0] = c.mu2 * (p.q1 - p.k1 + 1);
            for (int i = 1; i <= p.q1 - p.k1; ++i)
                out.zeta[i] = (c.mu1 + c.mu2) * (p.q1 + 1 - i) - c.mu2 * p.k1;
            for (int i = std::max(1, p.q1 - p.k1 + 1); i <= p.q1; ++i)
                out.zeta[i] = c.mu1 * (p.q1 + 1 - i);
            break;
        default:
            break;
    }
    return out;
}

// P_bar = sum_i xi_i pi_(i,0) - sum_i zeta_i pi_(i,1).
inline double average_power(const SteadyState& pi, const PowerCoefficients& coeffs,
                            const SystemParams& p) {
    if (pi.pi.size() != static_cast<size_t>(p.states()) ||
        coeffs.xi.size() != static_cast<size_t>(p.q1) + 1)
        throw std::invalid_argument("average_power: length mismatch");
    double s = 0.0;
    for (int i = 0; i <= p.q1; ++i) {
        s += coeffs.xi[i] * pi.pi[p.flat(i, 0)];
        s -= coeffs.zeta[i] * pi.pi[p.flat(i, 1)];
    }
    return s;
}

// Definitional RES power: fraction of slots drawing the reliable source,
// sum_i pi_(i,0) (mu2 g_i + mu1 f_i) with no f term at i = 0.
inline double definitional_power(const SteadyState& pi, const SystemParams& p,
                                 const PolicyParams& policy) {
    const DerivedConstants c = derive_constants(p);
    double s = pi.pi[p.flat(0, 0)] * c.mu2 * policy.g[0];
    for (int i = 1; i <= p.q1; ++i)
        s += pi.pi[p.flat(i, 0)] * (c.mu2 * policy.g[i] + c.mu1 * policy.f[i]);
    return s;
}

// Little's law: D_bar = (1 / (k1 eta1)) sum_i i pi_i, in slots.
inline double average_delay(const SteadyState& pi, const SystemParams& p) {
    double s = 0.0;
    for (int i = 1; i <= p.q1; ++i) {
        double row = 0.0;
        for (int j = 0; j <= p.q2; ++j) row += pi.pi[p.flat(i, j)];
        s += i * row;
    }
    return s / (p.k1 * p.eta1);
}

inline double marginal_queue_prob(const SteadyState& pi, const SystemParams& p, int i) {
    double s = 0.0;
    for (int j = 0; j <= p.q2; ++j) s += pi.pi[p.flat(i, j)];
    return s;
}

// Upper bound on pi_i obtained by sweeping the policy parameters over [0,1].
inline double theta_upper(const SteadyState& pi, const SystemParams& p, int i) {
    const DerivedConstants c = derive_constants(p);
    const double eta2bar = 1.0 - p.eta2;
    switch (p.kind()) {
        case CaseKind::I:
            return c.phi * pi.pi[p.flat(i - 1, 0)];
        case CaseKind::II:
            return c.tau * eta2bar * pi.pi[p.flat(i - 1, 0)] + eta2bar * pi.pi[p.flat(i, 0)];
        case CaseKind::III: {
            double s = eta2bar * pi.pi[p.flat(i, 0)];
            if (i < p.k1) {
                for (int m = 0; m < i; ++m) s += c.tau * marginal_queue_prob(pi, p, m);
            } else {
                s += c.tau * eta2bar * pi.pi[p.flat(i - p.k1, 0)];
                for (int m = i - p.k1 + 1; m < i; ++m) s += c.tau * marginal_queue_prob(pi, p, m);
            }
            return s;
        }
        default:
            throw UnsupportedCaseError("theta_upper is defined for cases I-III only");
    }
}

inline double theta_lower(const SteadyState& pi, const SystemParams& p, int i) {
    if (p.kind() != CaseKind::III) return 0.0;
    const DerivedConstants c = derive_constants(p);
    double s = 0.0;
    for (int m = std::max(0, i - p.k1 + 1); m < i; ++m)
        s += c.tau * marginal_queue_prob(pi, p, m);
    return s;
}

// Local balance columns for the states (i,j) with j >= 1: the submatrix of
// P - I with the policy-dependent columns (battery-empty states) removed.
// These columns carry no g/f dependence, so a zero policy suffices.
inline Matrix balance_submatrix(const SystemParams& p) {
    if (p.kind() == CaseKind::General)
        throw UnsupportedCaseError("balance submatrix is defined for cases I-III only");
    const Matrix full = build_transition_matrix(p, PolicyParams::zeros(p.q1));
    const int n = p.states();
    Matrix ps(n, (p.q1 + 1) * p.q2);
    for (int i = 0; i <= p.q1; ++i) {
        for (int j = 1; j <= p.q2; ++j) {
            const int col = i * p.q2 + (j - 1);
            const int state = p.flat(i, j);
            for (int r = 0; r < n; ++r)
                ps(r, col) = full(r, state) - (r == state ? 1.0 : 0.0);
        }
    }
    return ps;
}

// Coefficient vectors of the LP: pi a0 = P_bar, pi a_u[i] = pi_i - Theta_u(i),
// pi a_l[i] = Theta_l(i) - pi_i, plus the balance submatrix.
struct BoundSystem {
    std::vector<double> a0;               // length N
    std::vector<std::vector<double>> a_u; // indexed 1..q1; [0] unused
    std::vector<std::vector<double>> a_l; // indexed 1..q1; [0] unused
    Matrix ps;                            // N x (q1+1) q2
};

inline BoundSystem bound_vectors(const SystemParams& p) {
    const CaseKind kind = p.kind();
    if (kind == CaseKind::General)
        throw UnsupportedCaseError("bound vectors are defined for cases I-III only");
    const DerivedConstants c = derive_constants(p);
    const double eta2bar = 1.0 - p.eta2;
    const int n = p.states();

    BoundSystem bs;
    bs.ps = balance_submatrix(p);

    const PowerCoefficients coeffs = power_coefficients(p);
    bs.a0.assign(n, 0.0);
    for (int i = 0; i <= p.q1; ++i) {
        bs.a0[p.flat(i, 0)] = coeffs.xi[i];
        bs.a0[p.flat(i, 1)] = -coeffs.zeta[i];
    }

    bs.a_u.assign(static_cast<size_t>(p.q1) + 1, {});
    bs.a_l.assign(static_cast<size_t>(p.q1) + 1, {});
    for (int i = 1; i <= p.q1; ++i) {
        std::vector<double> u(n, 0.0);
        std::vector<double> l(n, 0.0);
        for (int j = 0; j <= p.q2; ++j) {
            u[p.flat(i, j)] += 1.0;
            l[p.flat(i, j)] -= 1.0;
        }
        switch (kind) {
            case CaseKind::I:
                u[p.flat(i - 1, 0)] -= c.phi;
                break;
            case CaseKind::II:
                u[p.flat(i - 1, 0)] -= c.tau * eta2bar;
                u[p.flat(i, 0)] -= eta2bar;
                break;
            case CaseKind::III: {
                u[p.flat(i, 0)] -= eta2bar;
                if (i >= p.k1) u[p.flat(i - p.k1, 0)] -= c.tau * eta2bar;
                for (int m = std::max(0, i - p.k1 + 1); m < i; ++m)
                    for (int j = 0; j <= p.q2; ++j) u[p.flat(m, j)] -= c.tau;
                // Theta_l couples the same k1 - 1 preceding marginals.
                for (int m = std::max(0, i - p.k1 + 1); m < i; ++m)
                    for (int j = 0; j <= p.q2; ++j) l[p.flat(m, j)] += c.tau;
                break;
            }
            default:
                break;
        }
        bs.a_u[i] = std::move(u);
        bs.a_l[i] = std::move(l);
    }
    return bs;
}

} // namespace ehsched
