#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ehsched/params.hpp"

namespace ehsched {

struct SimConfig {
    std::uint64_t seed = 1;
    long long horizon = 1'000'000;
    long long burn_in = 10'000;
    int initial_q1 = 0;
    int initial_q2 = 0;

    void validate() const {
        if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
        if (burn_in < 0 || burn_in >= horizon)
            throw std::invalid_argument("burn_in must lie in [0, horizon)");
    }
};

struct SimResult {
    double mean_queue = 0.0;          // time-average q1, post-burn-in
    double empirical_delay = 0.0;     // mean_queue / (k1 eta1), slots
    double empirical_power = 0.0;     // fraction of slots drawing the RES
    double measured_arrival_rate = 0.0; // packets per slot actually offered
    double delay_stderr = 0.0;        // batch-means standard error of the delay
    double power_stderr = 0.0;        // batch-means standard error of the power
    std::vector<double> occupancy;    // state histogram, post-burn-in
    int max_q1 = 0;
    long long drops = 0;
    double interior_occupancy = 0.0;  // fraction of slots with q1*q2 > 0
};

namespace detail {

// splitmix64; seeds the per-stream xorshift-style generators below.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256** (Blackman/Vigna). Small, fast, and fully determined by the
// seed, which keeps acceptance runs reproducible across platforms.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace detail

struct StepOutcome {
    int q1 = 0;
    int q2 = 0;
    bool served = false;
    bool res_used = false;
    int dropped = 0;
};

// One slot of the physical system: arrivals land, the scheduler picks the
// energy source, queues update with clipping. `coin` is the uniform draw for
// the RES randomization (only consulted when the battery pool is empty).
inline StepOutcome step(const SystemParams& p, int q1, int q2, bool data_arrival,
                        bool energy_arrival, const PolicyParams& policy, double coin) {
    const int a1 = data_arrival ? p.k1 : 0;
    const int a2 = energy_arrival ? p.k2 : 0;
    const int pool = std::min(q2 + a2, p.q2); // harvested energy usable in-slot

    StepOutcome out;
    int v1 = 0, v2 = 0;
    if (q1 > 0 || data_arrival) {
        if (pool > 0) {
            v1 = 1;
            v2 = 1;
            out.served = true;
        } else {
            const double prob = data_arrival ? policy.g[q1] : policy.f[q1];
            if (coin < prob) {
                v1 = 1;
                out.served = true;
                out.res_used = true;
            }
        }
    }
    const int raw_q1 = q1 + a1 - v1;
    out.dropped = std::max(0, raw_q1 - p.q1);
    out.q1 = std::min(raw_q1, p.q1);
    out.q2 = pool - v2;
    return out;
}

// Slot-level Monte Carlo over the full horizon. Three independent substreams
// (data arrivals, energy arrivals, policy coins) are derived from the seed,
// and a coin is drawn every slot whether or not the policy consults it, so
// the stream alignment is independent of the trajectory.
inline SimResult run(const SystemParams& params, const PolicyParams& policy,
                     const SimConfig& config) {
    params.validate(/*analytical=*/false);
    policy.validate(params);
    config.validate();
    if (config.initial_q1 < 0 || config.initial_q1 > params.q1 || config.initial_q2 < 0 ||
        config.initial_q2 > params.q2)
        throw std::invalid_argument("initial state outside queue capacities");

    detail::Xoshiro256 data_rng(config.seed ^ 0xd6e8feb86659fd93ull);
    detail::Xoshiro256 energy_rng(config.seed ^ 0xa5a5a5a5a5a5a5a5ull);
    detail::Xoshiro256 coin_rng(config.seed ^ 0x2545f4914f6cdd1dull);

    SimResult result;
    result.occupancy.assign(params.states(), 0.0);

    int q1 = config.initial_q1;
    int q2 = config.initial_q2;
    result.max_q1 = q1;
    long long kept = 0, res_slots = 0, interior = 0, arrivals = 0;
    long long queue_sum = 0;

    // Batch means over the post-burn-in span for standard errors.
    constexpr int kBatches = 20;
    const long long span = config.horizon - config.burn_in;
    const long long batch_len = std::max<long long>(1, span / kBatches);
    std::vector<double> batch_queue, batch_res;
    long long cur_queue = 0, cur_res = 0, cur_len = 0;

    for (long long t = 0; t < config.horizon; ++t) {
        const bool a1 = data_rng.uniform() < params.eta1;
        const bool a2 = energy_rng.uniform() < params.eta2;
        const double coin = coin_rng.uniform();
        const StepOutcome out = step(params, q1, q2, a1, a2, policy, coin);
        q1 = out.q1;
        q2 = out.q2;
        result.drops += out.dropped;
        result.max_q1 = std::max(result.max_q1, q1);
        if (t >= config.burn_in) {
            ++kept;
            queue_sum += q1;
            if (a1) ++arrivals;
            if (out.res_used) ++res_slots;
            if (q1 > 0 && q2 > 0) ++interior;
            result.occupancy[params.flat(q1, q2)] += 1.0;
            cur_queue += q1;
            if (out.res_used) ++cur_res;
            if (++cur_len == batch_len) {
                batch_queue.push_back(static_cast<double>(cur_queue) / static_cast<double>(cur_len));
                batch_res.push_back(static_cast<double>(cur_res) / static_cast<double>(cur_len));
                cur_queue = cur_res = cur_len = 0;
            }
        }
    }

    result.mean_queue = static_cast<double>(queue_sum) / static_cast<double>(kept);
    result.empirical_delay =
        (params.eta1 > 0.0) ? result.mean_queue / (params.k1 * params.eta1) : 0.0;
    result.empirical_power = static_cast<double>(res_slots) / static_cast<double>(kept);
    result.measured_arrival_rate =
        static_cast<double>(arrivals) * params.k1 / static_cast<double>(kept);
    result.interior_occupancy = static_cast<double>(interior) / static_cast<double>(kept);
    for (double& x : result.occupancy) x /= static_cast<double>(kept);

    auto stderr_of = [](const std::vector<double>& batches, double mean) {
        const auto n = batches.size();
        if (n < 2) return 0.0;
        double var = 0.0;
        for (double b : batches) var += (b - mean) * (b - mean);
        var /= static_cast<double>(n - 1);
        return std::sqrt(var / static_cast<double>(n));
    };
    if (params.eta1 > 0.0)
        result.delay_stderr = stderr_of(batch_queue, result.mean_queue) / (params.k1 * params.eta1);
    result.power_stderr = stderr_of(batch_res, result.empirical_power);
    return result;
}

} // namespace ehsched
