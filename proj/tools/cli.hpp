#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "ladderwalk/environment.hpp"

namespace ladderwalk::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kComputationError = 1;
inline constexpr int kUsageError = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// One line of the homogeneous consistency table: E[T1] * drift against the
// root-based mean overshoot 1 - h.
struct WaldRow {
    int row = 0;
    SiteLaw law;
    double drift = 0;
    double expected_t1 = 0;
    double route_a = 0;  // expected_t1 * drift
    double route_b = 0;  // f(1) + 2 f(2) = 1 - h
    double reference_a = 0;
    double reference_b = 0;
    double delta = 0;  // route_a - route_b
    double tolerance = 0;
    long long levels = 0;
    bool converged = false;
    bool slow = false;  // series needed more than 1e5 levels
    bool ok = false;
    std::string error;  // set when a route threw
};

struct WaldReference {
    SiteLaw law;
    double reference_a;
    double reference_b;
    double tolerance;
};

const std::array<WaldReference, 5>& wald_references();
std::vector<WaldRow> wald_table(double tol = 1e-12, long long max_levels = 1'000'000);

}  // namespace ladderwalk::cli
