#include <doctest.h>

#include "fixtures.hpp"
#include "ladderwalk/errors.hpp"
#include "ladderwalk/oracle.hpp"

using namespace ladderwalk;

TEST_SUITE("oracle") {

TEST_CASE("deep interval reproduces the expected ladder time") {
    const Environment env = Environment::homogeneous(fixtures::law_strong());
    // E[X_T1] / drift = 1.467727692 / 0.39
    CHECK(solve_expected_exit_time(env, -400, 1, 0) == doctest::Approx(3.763404338).epsilon(1e-9));
}

TEST_CASE("exit law sums to one and agrees with elimination") {
    std::mt19937_64 rng(7);
    for (int n = 0; n < 40; ++n) {
        const Environment env = fixtures::random_explicit_env(rng, -20, 20);
        const long long a = -8, b = 5;
        const auto ref = fixtures::gauss_exit(env, a, b);
        for (long long k = a + 1; k < b; ++k) {
            double total = 0;
            const long long targets[4] = {a - 1, a, b, b + 1};
            for (int j = 0; j < 4; ++j) {
                const double p = solve_exit(env, a, b, k, targets[j]);
                CHECK(p == doctest::Approx(static_cast<double>(ref[static_cast<std::size_t>(k - a - 1)][j])).epsilon(1e-11));
                total += p;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("time split by exit site adds up") {
    std::mt19937_64 rng(8);
    const Environment env = fixtures::random_explicit_env(rng, -20, 20);
    const long long a = -6, b = 4;
    for (long long k = a + 1; k < b; ++k) {
        double split = 0;
        for (long long t : {a - 1, a, b, b + 1}) split += solve_exit_time_on_target(env, a, b, k, t);
        CHECK(split == doctest::Approx(solve_expected_exit_time(env, a, b, k)).epsilon(1e-11));
    }
}

TEST_CASE("first-step decomposition of the exit time") {
    // E_k T = 1 + sum_j w(j) E_{k+j} T with zero outside the interval
    std::mt19937_64 rng(9);
    const Environment env = fixtures::random_explicit_env(rng, -20, 20);
    const long long a = -5, b = 5;
    auto t = [&](long long k) { return k > a && k < b ? solve_expected_exit_time(env, a, b, k) : 0.0; };
    for (long long k = a + 1; k < b; ++k) {
        const SiteLaw w = env.law_at(k);
        const double rhs = 1 + w.q2 * t(k - 2) + w.q1 * t(k - 1) + w.p1 * t(k + 1) + w.p2 * t(k + 2);
        CHECK(t(k) == doctest::Approx(rhs).epsilon(1e-11));
    }
}

TEST_CASE("trapped chains are singular") {
    // 0 -> 1 -> 0 forever
    const Environment env = Environment::explicit_range(0, {SiteLaw::make(0, 0, 1, 0), SiteLaw::make(0, 1, 0, 0)},
                                                        fixtures::law_strong());
    CHECK_THROWS_AS(solve_exit(env, -5, 5, 0, 5), SingularSystem);
    CHECK_THROWS_AS(solve_expected_exit_time(env, -5, 5, 0), SingularSystem);
}

TEST_CASE("argument checks") {
    const Environment env = Environment::homogeneous(fixtures::law_strong());
    CHECK_THROWS_AS(solve_exit(env, 0, 1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(solve_exit(env, 0, 4, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(solve_exit(env, 0, 4, 2, 3), std::invalid_argument);
    // no ellipticity requirement
    const Environment no_long_down = Environment::homogeneous(SiteLaw::make(0, 0.4, 0.3, 0.3));
    CHECK(std::abs(solve_exit(no_long_down, -10, 2, 0, -11)) < 1e-15);
}

}  // TEST_SUITE
