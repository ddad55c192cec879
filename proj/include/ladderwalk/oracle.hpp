#pragma once

#include "ladderwalk/environment.hpp"

namespace ladderwalk {

// Direct linear solves on the chain killed outside [a+1, b-1]; the absorbing
// sites are a-1, a, b, b+1. No ellipticity requirement.

// P_start(exit at target), target in {a-1, a, b, b+1}.
double solve_exit(const Environment& env, long long a, long long b, long long start, long long target);

// E_start[exit time].
double solve_expected_exit_time(const Environment& env, long long a, long long b, long long start);

// E_start[exit time ; exit at target]. Dividing by solve_exit gives the
// conditional mean.
double solve_exit_time_on_target(const Environment& env, long long a, long long b, long long start,
                                 long long target);

}  // namespace ladderwalk
