#pragma once

#include <array>
#include <vector>

#include "ladderwalk/environment.hpp"

namespace ladderwalk {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Companion-form matrix of one site: row 0 carries the law, rows 1-2 shift.
struct StepMatrix {
    Mat3 m{};
};

StepMatrix build_step_matrix(const SiteLaw& law, double eps = kDefaultEllipticity);

Mat3 multiply(const Mat3& x, const Mat3& y);

enum class ExitMethod {
    // First-exit recursion that grows the interval one site at a time. Every
    // update is a sum of nonnegative terms, so it is stable at any depth.
    Recursive,
    // Closed-form ratios of step-matrix products with per-step rescaling.
    // Accurate for short intervals only.
    TransferMatrix,
};

// Exit law of the walk started inside [a+1, b-1], restricted to the upper
// exits b and b+1. Lower exits are the complement.
struct ExitProbTable {
    long long a = 0;
    long long b = 0;
    std::vector<double> to_b;   // index k - (a + 1)
    std::vector<double> to_b1;  // exit at b + 1
    bool monotone = true;       // P_k(b) + P_k(b+1) nondecreasing in k (within 1e-9)

    // target must be b or b + 1.
    double at(long long k, long long target) const;
    double lower(long long k) const;
};

ExitProbTable exit_probabilities(const Environment& env, long long a, long long b,
                                 ExitMethod method = ExitMethod::Recursive,
                                 double eps = kDefaultEllipticity);

// Probabilities that the walk from k first enters (i, inf) at i+1 (f1) or i+2 (f2).
struct HitProfile {
    long long start = 0;
    long long threshold = 0;
    double f1 = 0.0;
    double f2 = 0.0;
    long long depth = 0;  // i - a of the last interval used
    bool converged = false;
};

inline constexpr long long kDefaultMaxDepth = 1LL << 20;

HitProfile hit_from_below(const Environment& env, long long k, long long i, double tol = 1e-12,
                          long long max_depth = kDefaultMaxDepth, double eps = kDefaultEllipticity);

// Profiles over threshold i from starts i and i - 1, sharing one sequence of
// sweeps; both must settle.
std::array<HitProfile, 2> hit_top_pair(const Environment& env, long long i, double tol = 1e-12,
                                       long long max_depth = kDefaultMaxDepth, double eps = kDefaultEllipticity);

// Root of the characteristic cubic of a constant environment lying in (-1, 0).
struct HomogeneousRoot {
    double h = 0.0;
    bool g_abs_ge_1 = false;  // other two roots both have modulus >= 1
    double other_min_abs = 0.0;
};

HomogeneousRoot homogeneous_root(const SiteLaw& law, double eps = kDefaultEllipticity);

// lambda^3 + ((q1+q2)/q2) lambda^2 - ((p1+p2)/q2) lambda - p2/q2
double characteristic_poly(const SiteLaw& law, double lambda);

}  // namespace ladderwalk
