#pragma once

#include <algorithm>

#include "ehsched/linalg.hpp"
#include "ehsched/params.hpp"

namespace ehsched {

namespace detail {

// Service decision for queue state (i, j) under arrivals (a1 > 0?, a2 > 0?).
// Returns the probability of transmitting with RES energy; v1/v2 describe the
// deterministic part. Exactly one of three shapes applies per slot:
//   - nothing to send            -> hold
//   - stored or fresh energy     -> transmit from the battery pool
//   - battery empty, no harvest  -> RES coin with probability g[i] or f[i]
struct ServiceLaw {
    bool battery_serve = false; // v = (1,1), no randomness
    double res_prob = 0.0;      // probability of v = (1,0) from the RES
};

inline ServiceLaw service_law(int i, bool data_arrival, bool energy_available,
                              const PolicyParams& policy) {
    ServiceLaw law;
    if (i == 0 && !data_arrival) return law;
    if (energy_available) {
        law.battery_serve = true;
        return law;
    }
    law.res_prob = data_arrival ? policy.g[static_cast<size_t>(i)]
                                : policy.f[static_cast<size_t>(i)];
    return law;
}

} // namespace detail

// One-step transition matrix of the joint (data, energy) chain under the
// given policy. Rows sum to 1 by construction; the battery pool is clipped
// at q2 before service, so freshly harvested energy is usable in-slot and
// overflow is discarded.
inline Matrix build_transition_matrix(const SystemParams& params, const PolicyParams& policy) {
    params.validate(/*analytical=*/false);
    policy.validate(params);
    const DerivedConstants c = derive_constants(params);
    const int n = params.states();
    Matrix p(n, n);

    // mu0 = energy only, mu1 = neither, mu2 = data only, mu3 = both.
    const double event_prob[4] = {c.mu0, c.mu1, c.mu2, c.mu3};
    const bool data_of[4] = {false, false, true, true};
    const bool energy_of[4] = {true, false, false, true};

    for (int i = 0; i <= params.q1; ++i) {
        for (int j = 0; j <= params.q2; ++j) {
            const int from = params.flat(i, j);
            for (int e = 0; e < 4; ++e) {
                const double prob = event_prob[e];
                if (prob == 0.0) continue;
                const int a1 = data_of[e] ? params.k1 : 0;
                const int a2 = energy_of[e] ? params.k2 : 0;
                const int pool = std::min(j + a2, params.q2);
                const auto law =
                    detail::service_law(i, a1 > 0, pool > 0, policy);

                auto land = [&](int v1, int v2, double branch) {
                    if (branch == 0.0) return;
                    const int ni = std::min(i + a1 - v1, params.q1);
                    const int nj = pool - v2;
                    p(from, params.flat(ni, nj)) += prob * branch;
                };
                if (law.battery_serve) {
                    land(1, 1, 1.0);
                } else {
                    land(1, 0, law.res_prob);
                    land(0, 0, 1.0 - law.res_prob);
                }
            }
        }
    }
    return p;
}

// Max deviation of any row sum from 1; diagnostic for tests.
inline double row_sum_defect(const Matrix& p) {
    double worst = 0.0;
    for (int r = 0; r < p.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < p.cols; ++c) s += p(r, c);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

} // namespace ehsched
