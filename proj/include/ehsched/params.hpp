#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ehsched {

// Classification of the (k1, k2) batch-size combination. The analytical
// solver handles I-III; General is accepted by the chain builder and the
// simulator only.
enum class CaseKind { I, II, III, General };

inline const char* to_string(CaseKind c) {
    switch (c) {
        case CaseKind::I: return "I";
        case CaseKind::II: return "II";
        case CaseKind::III: return "III";
        default: return "general";
    }
}

// Sentinel threshold: the search exhausted the data-queue capacity.
inline constexpr int kThresholdInfinity = std::numeric_limits<int>::max();

class UnsupportedCaseError : public std::runtime_error {
public:
    explicit UnsupportedCaseError(const std::string& what) : std::runtime_error(what) {}
};

class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Link and arrival-process description. eta1/eta2 are the per-slot Bernoulli
// probabilities of a data batch (k1 packets) and an energy batch (k2 packets);
// q1/q2 are the data-queue and battery capacities; pmax is the normalized
// average RES power budget (fraction of slots).
struct SystemParams {
    double eta1 = 0.0;
    double eta2 = 0.0;
    int k1 = 1;
    int k2 = 1;
    int q1 = 100;
    int q2 = 1;
    double pmax = 0.0;

    CaseKind kind() const noexcept {
        if (k1 == 1 && k2 == 1) return CaseKind::I;
        if (k1 == 1) return CaseKind::II;
        if (k2 == 1) return CaseKind::III;
        return CaseKind::General;
    }

    int states() const noexcept { return (q1 + 1) * (q2 + 1); }

    // Enumeration order (0,0),...,(0,q2),(1,0),...,(q1,q2).
    int flat(int i, int j) const {
        if (i < 0 || i > q1 || j < 0 || j > q2)
            throw std::out_of_range("state (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") outside queue capacities");
        return i * (q2 + 1) + j;
    }

    std::pair<int, int> state_of(int s) const {
        if (s < 0 || s >= states())
            throw std::out_of_range("flat state index " + std::to_string(s) + " out of range");
        return {s / (q2 + 1), s % (q2 + 1)};
    }

    // The simulator tolerates boundary arrival probabilities; the analytical
    // path divides by mu0 and (1 - eta1) and therefore requires the open
    // interval.
    void validate(bool analytical = true) const {
        auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
        if (analytical) {
            if (!(eta1 > 0.0 && eta1 < 1.0)) fail("eta1 must lie in (0,1)");
            if (!(eta2 > 0.0 && eta2 < 1.0)) fail("eta2 must lie in (0,1)");
        } else {
            if (!(eta1 >= 0.0 && eta1 <= 1.0)) fail("eta1 must lie in [0,1]");
            if (!(eta2 >= 0.0 && eta2 <= 1.0)) fail("eta2 must lie in [0,1]");
        }
        if (k1 < 1) fail("k1 must be a positive integer");
        if (k2 < 1) fail("k2 must be a positive integer");
        if (q2 < 1) fail("q2 must be at least 1");
        if (q1 < k1) fail("q1 must be at least k1");
        if (!(pmax >= 0.0 && pmax <= 1.0)) fail("pmax must lie in [0,1]");
    }
};

// Stability (Loynes): the combined service capacity pmax + k2*eta2 must
// exceed the arrival rate k1*eta1.
inline bool check_stability(const SystemParams& p) {
    return p.pmax > p.k1 * p.eta1 - p.k2 * p.eta2;
}

// Slot-event probabilities and the aggregate constants used throughout the
// analysis. mu0: energy only, mu1: neither, mu2: data only, mu3: both.
struct DerivedConstants {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double mu3 = 0.0;
    double tau = 0.0;   // eta1 / (1 - eta1)
    double phi = 0.0;   // mu2 / mu0
    double phi1 = 0.0;  // eta1 / mu0
    double alpha = 0.0; // Case I aggregate over the battery column
};

inline DerivedConstants derive_constants(const SystemParams& p) {
    DerivedConstants c;
    c.mu0 = (1.0 - p.eta1) * p.eta2;
    c.mu1 = (1.0 - p.eta1) * (1.0 - p.eta2);
    c.mu2 = p.eta1 * (1.0 - p.eta2);
    c.mu3 = p.eta1 * p.eta2;
    c.tau = p.eta1 / (1.0 - p.eta1);
    c.phi = c.mu2 / c.mu0;
    c.phi1 = p.eta1 / c.mu0;
    if (std::abs(c.phi - 1.0) < 1e-12) {
        c.alpha = p.q2 + 1.0 / c.phi1;
    } else {
        c.alpha = (c.phi1 * std::pow(c.phi, p.q2) + c.phi - c.phi1 - 1.0) /
                  (std::pow(c.phi, p.q2 - 1) * (c.phi - 1.0) * c.phi1);
    }
    return c;
}

// Per-queue-length transmit probabilities when the battery is empty:
// g[i] applies on a data arrival, f[i] when no data arrives (f[0] unused).
struct PolicyParams {
    std::vector<double> g;
    std::vector<double> f;
    std::optional<int> threshold;

    static PolicyParams zeros(int q1) {
        PolicyParams p;
        p.g.assign(static_cast<size_t>(q1) + 1, 0.0);
        p.f.assign(static_cast<size_t>(q1) + 1, 0.0);
        return p;
    }

    void validate(const SystemParams& params) const {
        if (g.size() != static_cast<size_t>(params.q1) + 1 ||
            f.size() != static_cast<size_t>(params.q1) + 1)
            throw std::invalid_argument("policy length does not match q1 + 1");
        for (double x : g)
            if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("g entries must lie in [0,1]");
        for (double x : f)
            if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("f entries must lie in [0,1]");
    }
};

} // namespace ehsched
