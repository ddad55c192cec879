#pragma once

#include <cstdint>

#include "ladderwalk/branching.hpp"

namespace ladderwalk {

struct DensityReport {
    double pi = 0.0;  // invariant density of the environment seen from the walker
    double d = 0.0;   // normalizer integrand
    long long pi_levels = 0;
    long long d_levels = 0;
    bool pi_converged = false;
    bool d_converged = false;
};

// Both series; terms reuse the model's per-level data (levels >= 0 for the
// density, <= 0 for the normalizer).
DensityReport invariant_density(BranchingModel& model, double tol = 1e-12, long long max_levels = kDefaultMaxLevels);
DensityReport invariant_density(const Environment& env, double tol = 1e-12, long long max_levels = kDefaultMaxLevels,
                                const HittingOptions& opt = {});

// Normalizer D(w) alone.
T1Result normalizer(BranchingModel& model, double tol = 1e-12, long long max_levels = kDefaultMaxLevels);
double normalizer(const Environment& env, double tol = 1e-12, long long max_levels = kDefaultMaxLevels,
                  const HittingOptions& opt = {});

struct VelocityReport {
    // Numerator factor: local drift ("drift") or mean absolute jump ("abs").
    double velocity_drift = 0.0;
    double velocity_abs = 0.0;
    double numerator_drift = 0.0, numerator_drift_se = 0.0;
    double numerator_abs = 0.0, numerator_abs_se = 0.0;
    double denominator = 0.0, denominator_se = 0.0;
    double velocity_drift_se = 0.0;
    double velocity_abs_se = 0.0;
    long long samples = 0;    // requested
    long long used = 0;       // converged samples entering the means
    long long divergent = 0;  // dropped
};

VelocityReport velocity(const EnvLaw& env_law, long long samples, double tol, std::uint64_t seed, int workers = 1,
                        long long max_levels = kDefaultMaxLevels, const HittingOptions& opt = {});

}  // namespace ladderwalk
