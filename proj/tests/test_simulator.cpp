#include <doctest.h>

#include "fixtures.hpp"
#include "ladderwalk/simulator.hpp"

using namespace ladderwalk;

TEST_SUITE("simulator") {

TEST_CASE("jump sampler boundaries") {
    const SiteLaw w = SiteLaw::make(0.25, 0.25, 0.25, 0.25);
    CHECK(sample_jump(w, 0.0) == -2);
    CHECK(sample_jump(w, 0.2499) == -2);
    CHECK(sample_jump(w, 0.25) == -1);
    CHECK(sample_jump(w, 0.5) == 1);
    CHECK(sample_jump(w, 0.75) == 2);
    CHECK(sample_jump(w, 0.999999) == 2);
    const SiteLaw no_q1 = SiteLaw::make(0.5, 0.0, 0.5, 0.0);
    for (double u = 0.0; u < 1.0; u += 0.01) {
        const int j = sample_jump(no_q1, u);
        CHECK((j == -2 || j == 1));
    }
}

TEST_CASE("ladder paths stop on the first exceedance") {
    const Environment env = Environment::homogeneous(fixtures::law_mild());
    for (std::uint64_t s = 0; s < 200; ++s) {
        const WalkPath p = run_to_ladder(env, s);
        REQUIRE(p.stopped);
        CHECK(p.positions.front() == 0);
        CHECK(static_cast<long long>(p.positions.size()) == p.t1 + 1);
        CHECK(p.positions.back() == p.x_t1);
        CHECK((p.x_t1 == 1 || p.x_t1 == 2));
        for (std::size_t n = 0; n + 1 < p.positions.size(); ++n) CHECK(p.positions[n] <= 0);
    }
}

TEST_CASE("step cap raises with the partial path") {
    const Environment down = Environment::homogeneous(SiteLaw::make(0.5, 0.5, 0, 0));
    try {
        run_to_ladder(down, 1, 50);
        FAIL("expected CapReached");
    } catch (const CapReached& e) {
        CHECK(e.path.positions.size() == 51);
        CHECK_FALSE(e.path.stopped);
    }
    const EnsembleStats s = run_ensemble(down, 1, 100, 1, 10);
    CHECK(s.abandoned == 100);
    CHECK(s.bias_warning);
}

TEST_CASE("ensembles are deterministic across worker counts") {
    std::mt19937_64 rng(1);
    const Environment env = Environment::periodic({fixtures::random_upward_law(rng), fixtures::random_upward_law(rng)});
    const EnsembleStats one = run_ensemble(env, 99, 20000, 1);
    CHECK(run_ensemble(env, 99, 20000, 1) == one);
    CHECK(run_ensemble(env, 99, 20000, 4) == one);
    CHECK(run_ensemble(env, 99, 20000, 8) == one);
    CHECK_FALSE(run_ensemble(env, 100, 20000, 1) == one);
}

TEST_CASE("replica r of an ensemble is run_to_ladder with the derived seed") {
    const Environment env = Environment::homogeneous(fixtures::law_strong());
    RunningMoments m;
    for (std::uint64_t r = 0; r < 300; ++r) m.add(static_cast<double>(run_to_ladder(env, replica_seed(5, r)).t1));
    CHECK(run_ensemble(env, 5, 300).mean_t1 == doctest::Approx(m.mean).epsilon(1e-14));
}

TEST_CASE("overshoot mean matches the root") {
    // E[X_T1] = 1 - h
    const Environment env = Environment::homogeneous(fixtures::law_strong());
    const EnsembleStats s = run_ensemble(env, 20261017, 200000);
    CHECK(s.stopped == 200000);
    CHECK(std::abs(s.mean_x - 1.467727692) < 3 * s.se_x);
    CHECK(s.x_hist[0] + s.x_hist[1] == 200000);
}

TEST_CASE("long run speed") {
    const HorizonResult h = run_horizon(Environment::homogeneous(fixtures::law_strong()), 3, 10'000'000);
    CHECK(std::abs(h.empirical_drift - 0.39) < 0.005);
    CHECK(h.min_position <= 0);
    CHECK(h.max_position >= h.final_position);
    CHECK(run_horizon(Environment::homogeneous(fixtures::law_strong()), 3, 0).final_position == 0);
}

TEST_CASE("running moments merge") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(3.0, 2.0);
    RunningMoments all, a, b;
    for (int n = 0; n < 1000; ++n) {
        const double x = g(rng);
        all.add(x);
        (n < 377 ? a : b).add(x);
    }
    a.merge(b);
    CHECK(a.n == all.n);
    CHECK(a.mean == doctest::Approx(all.mean).epsilon(1e-12));
    CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

}  // TEST_SUITE
