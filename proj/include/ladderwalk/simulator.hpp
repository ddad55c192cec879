#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "ladderwalk/environment.hpp"
#include "ladderwalk/errors.hpp"
#include "ladderwalk/rng.hpp"

namespace ladderwalk {

inline constexpr long long kDefaultStepCap = 100'000'000;

struct WalkPath {
    std::vector<long long> positions;  // X_0 = 0, ..., X_T
    bool stopped = false;
    long long t1 = 0;  // valid when stopped
    int x_t1 = 0;      // 1 or 2 when stopped
};

// Thrown by run_to_ladder when the cap is hit; carries the unstopped path.
class CapReached : public Error {
public:
    CapReached(const std::string& what, WalkPath path) : Error(what), path(std::move(path)) {}
    WalkPath path;
};

// Replica r of an ensemble draws from derive_seed(master, r).
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t r) { return derive_seed(master, r); }

// Branch-free: the draw is random, so branches mispredict half the time.
inline int sample_jump(const SiteLaw& w, double u) {
    const double c1 = w.q2, c2 = w.q2 + w.q1, c3 = w.q2 + w.q1 + w.p1;
    return -2 + static_cast<int>(u >= c1) + 2 * static_cast<int>(u >= c2) + static_cast<int>(u >= c3);
}

struct LadderOutcome {
    bool stopped = false;
    long long t1 = 0;  // steps taken (== cap when not stopped)
    long long x = 0;   // final position
};

// Runs from 0 until the walk first exceeds 0 or `cap` steps elapse, calling
// observer(from, to) for every step.
template <class Observer>
LadderOutcome walk_to_ladder(const Environment& env, std::mt19937_64& rng, long long cap, Observer&& observer) {
    long long x = 0;
    if (env.kind() == EnvKind::Homogeneous) {
        const SiteLaw w = env.law_at(0);
        for (long long n = 1; n <= cap; ++n) {
            const long long to = x + sample_jump(w, uniform01(rng));
            observer(x, to);
            x = to;
            if (x > 0) return {true, n, x};
        }
        return {false, cap, x};
    }
    for (long long n = 1; n <= cap; ++n) {
        const long long to = x + sample_jump(env.law_at(x), uniform01(rng));
        observer(x, to);
        x = to;
        if (x > 0) return {true, n, x};
    }
    return {false, cap, x};
}

WalkPath run_to_ladder(const Environment& env, std::uint64_t seed, long long step_cap = kDefaultStepCap);

struct EnsembleStats {
    long long replicas = 0;
    long long stopped = 0;
    long long abandoned = 0;
    double mean_t1 = 0, var_t1 = 0, se_t1 = 0;
    double mean_x = 0, var_x = 0, se_x = 0;
    std::array<long long, 2> x_hist{};  // counts of X_T1 = 1, 2
    bool bias_warning = false;           // abandon rate above 1e-4

    friend bool operator==(const EnsembleStats&, const EnsembleStats&) = default;
};

EnsembleStats run_ensemble(const Environment& env, std::uint64_t master_seed, long long replicas, int workers = 1,
                           long long step_cap = kDefaultStepCap);

struct HorizonResult {
    long long n_steps = 0;
    long long final_position = 0;
    double empirical_drift = 0;
    long long min_position = 0;
    long long max_position = 0;
};

HorizonResult run_horizon(const Environment& env, std::uint64_t seed, long long n_steps);

// Streaming mean/variance with an order-fixed merge.
struct RunningMoments {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const RunningMoments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / total;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double standard_error() const;
};

}  // namespace ladderwalk
