#include <doctest.h>

#include <map>
#include <thread>

#include "fixtures.hpp"
#include "ladderwalk/errors.hpp"
#include "ladderwalk/io.hpp"

using namespace ladderwalk;

TEST_SUITE("environment") {

TEST_CASE("site law validation") {
    CHECK_NOTHROW(SiteLaw::make(0.25, 0.25, 0.25, 0.25));
    CHECK_THROWS_AS(SiteLaw::make(-0.1, 0.4, 0.4, 0.3), InvalidLaw);
    CHECK_THROWS_AS(SiteLaw::make(0.2, 0.2, 0.2, 0.2), InvalidLaw);
    CHECK_THROWS_AS(SiteLaw::make(0.25, 0.25, 0.25, 0.25 + 1e-9), InvalidLaw);
    CHECK_NOTHROW(SiteLaw::make(0.25, 0.25, 0.25, 0.25 + 5e-13));
    CHECK_THROWS_AS(SiteLaw::make(std::nan(""), 0.5, 0.25, 0.25), InvalidLaw);

    CHECK(SiteLaw::make(0.1, 0.3, 0.3, 0.3).admissible());
    CHECK_FALSE(SiteLaw::make(0.0, 0.4, 0.3, 0.3).admissible());
    CHECK_FALSE(SiteLaw::make(1e-13, 0.4, 0.3, 0.3 - 1e-13).admissible());
}

TEST_CASE("local drift of the reference laws") {
    CHECK(local_drift(fixtures::law_strong()) == doctest::Approx(0.39).epsilon(1e-14));
    CHECK(local_drift(fixtures::law_mild()) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(local_drift(fixtures::law_weak()) == doctest::Approx(0.0012).epsilon(1e-10));
    CHECK(local_drift(fixtures::law_rare_long()) == doctest::Approx(0.0001).epsilon(1e-9));
    CHECK(local_drift(fixtures::law_balanced()) == doctest::Approx(0.0001).epsilon(1e-9));
    CHECK(jump_mass(fixtures::law_strong()) == doctest::Approx(1.43));
}

TEST_CASE("drift and jump mass bounds") {
    std::mt19937_64 rng(11);
    for (int n = 0; n < 1000; ++n) {
        const SiteLaw w = fixtures::random_law(rng, 0.0);
        CHECK(std::abs(local_drift(w)) <= 2.0);
        CHECK(jump_mass(w) >= 1.0 - 1e-12);
        CHECK(jump_mass(w) <= 2.0 + 1e-12);
        CHECK(jump_mass(w) >= std::abs(local_drift(w)));
    }
}

TEST_CASE("periodic indexing wraps negative sites") {
    std::mt19937_64 rng(3);
    std::vector<SiteLaw> laws = {fixtures::random_law(rng), fixtures::random_law(rng), fixtures::random_law(rng)};
    const Environment env = Environment::periodic(laws);
    CHECK(*env.period() == 3);
    CHECK(env.law_at(-1) == laws[2]);
    CHECK(env.law_at(-3) == laws[0]);
    CHECK(env.law_at(7) == laws[1]);
    CHECK(*Environment::homogeneous(laws[0]).period() == 1);
}

TEST_CASE("explicit environments fall back outside the range") {
    std::mt19937_64 rng(4);
    const SiteLaw a = fixtures::random_law(rng), b = fixtures::random_law(rng), f = fixtures::random_law(rng);
    const Environment env = Environment::explicit_range(-1, {a, b}, f);
    CHECK(env.law_at(-1) == a);
    CHECK(env.law_at(0) == b);
    CHECK(env.law_at(1) == f);
    CHECK(env.law_at(-2) == f);
}

TEST_CASE("shift covariance for every kind") {
    std::mt19937_64 rng(5);
    const std::vector<Environment> envs = {
        Environment::homogeneous(fixtures::law_strong()),
        Environment::periodic({fixtures::random_law(rng), fixtures::random_law(rng), fixtures::random_law(rng),
                               fixtures::random_law(rng), fixtures::random_law(rng)}),
        fixtures::random_explicit_env(rng, -20, 20),
        Environment::iid(EnvLaw::dirichlet({2, 3, 4, 5}), 77),
        Environment::iid(EnvLaw::mixture({fixtures::law_strong(), fixtures::law_mild()}, {1, 3}), 78),
    };
    std::uniform_int_distribution<long long> pick(-5000, 5000);
    for (const Environment& env : envs) {
        for (int n = 0; n < 200; ++n) {
            const long long k = pick(rng), i = pick(rng);
            CHECK(shift(env, k).law_at(i) == env.law_at(i + k));
            CHECK(shift(shift(env, k), -k).law_at(i) == env.law_at(i));
        }
    }
}

TEST_CASE("iid sites are a pure function of seed and index") {
    const EnvLaw law = EnvLaw::dirichlet({1.5, 2, 2.5, 3}, 1e-3);
    const Environment e1 = Environment::iid(law, 123), e2 = Environment::iid(law, 123), e3 = Environment::iid(law, 124);
    int differ = 0;
    for (long long i = -3000; i < 3000; i += 7) {
        CHECK(e1.law_at(i) == e2.law_at(i));
        differ += !(e1.law_at(i) == e3.law_at(i));
    }
    CHECK(differ > 800);
    // access order does not matter
    const SiteLaw far = e1.law_at(1'000'000'000LL);
    e1.law_at(-5);
    CHECK(e2.law_at(1'000'000'000LL) == far);
}

TEST_CASE("iid sites agree across threads") {
    const Environment env = Environment::iid(EnvLaw::dirichlet({2, 2, 2, 2}), 9);
    std::vector<SiteLaw> serial;
    for (long long i = 0; i < 20000; ++i) serial.push_back(env.law_at(i * 37 - 300000));
    std::vector<int> bad(4, 0);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            for (long long i = 19999; i >= 0; --i)
                if (!(env.law_at(i * 37 - 300000) == serial[static_cast<std::size_t>(i)])) ++bad[t];
        });
    for (auto& th : threads) th.join();
    for (int b : bad) CHECK(b == 0);
}

TEST_CASE("Dirichlet draws respect the margin and normalization") {
    const EnvLaw law = EnvLaw::dirichlet({0.3, 0.3, 0.3, 0.3}, 0.01);
    const Environment env = Environment::iid(law, 1);
    double mean_q2 = 0;
    for (long long i = 0; i < 20000; ++i) {
        const SiteLaw w = env.law_at(i);
        CHECK(w.q2 >= 0.01 - 1e-15);
        CHECK(w.q1 >= 0.01 - 1e-15);
        CHECK(w.p1 >= 0.01 - 1e-15);
        CHECK(w.p2 >= 0.01 - 1e-15);
        CHECK(std::abs(w.q2 + w.q1 + w.p1 + w.p2 - 1.0) <= 1e-12);
        mean_q2 += w.q2;
    }
    // symmetric concentrations: each coordinate has mean 1/4
    CHECK(mean_q2 / 20000 == doctest::Approx(0.25).epsilon(0.03));
    CHECK_THROWS_AS(EnvLaw::dirichlet({1, 1, 0, 1}), InvalidLaw);
    CHECK_THROWS_AS(EnvLaw::dirichlet({1, 1, 1, 1}, 0.3), InvalidLaw);
}

TEST_CASE("mixture frequencies follow the weights") {
    const SiteLaw a = fixtures::law_strong(), b = fixtures::law_mild();
    const Environment env = Environment::iid(EnvLaw::mixture({a, b}, {1, 3}), 2);
    int na = 0;
    const int n = 40000;
    for (long long i = 0; i < n; ++i) na += env.law_at(i) == a;
    // binomial sd is about 87
    CHECK(std::abs(na - n / 4) < 450);
    CHECK_THROWS_AS(EnvLaw::mixture({}), InvalidLaw);
}

TEST_CASE("sample_environment") {
    const Environment point = sample_environment(EnvLaw::point_mass(fixtures::law_mild()), -10, 10, 1);
    CHECK(point.kind() == EnvKind::Homogeneous);
    CHECK(point.law_at(12345) == fixtures::law_mild());
    const EnvLaw d = EnvLaw::dirichlet({1, 2, 3, 4});
    const Environment e = sample_environment(d, -100, 100, 5);
    CHECK(e.kind() == EnvKind::Iid);
    CHECK(e.equal_on(Environment::iid(d, 5), -100, 100));
    CHECK_THROWS_AS(sample_environment(d, 3, 2, 5), InvalidLaw);
}

}  // TEST_SUITE
