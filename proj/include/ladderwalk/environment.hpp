#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace ladderwalk {

inline constexpr double kDefaultEllipticity = 1e-12;
inline constexpr double kLawSumTolerance = 1e-12;

// Jump law at one site: probabilities of -2, -1, +1, +2.
struct SiteLaw {
    double q2 = 0.0;
    double q1 = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;

    // Validating constructor; throws InvalidLaw.
    static SiteLaw make(double q2, double q1, double p1, double p2);

    void validate() const;
    bool admissible(double eps = kDefaultEllipticity) const { return q2 >= eps; }
    // Probability of the given jump; 0 outside {-2,-1,1,2}.
    double prob(int jump) const;

    friend bool operator==(const SiteLaw&, const SiteLaw&) = default;
};

double local_drift(const SiteLaw& law);
// 2*q2 + q1 + p1 + 2*p2, the mean absolute jump.
double jump_mass(const SiteLaw& law);

// Distribution over site laws used for i.i.d. environments.
struct EnvLaw {
    enum class Kind { PointMass, Dirichlet, Mixture };

    Kind kind = Kind::PointMass;
    SiteLaw point{};
    std::array<double, 4> alpha{1.0, 1.0, 1.0, 1.0};  // (q2, q1, p1, p2) order
    double margin = 1e-6;
    std::vector<SiteLaw> atoms;
    std::vector<double> weights;  // normalized on construction

    static EnvLaw point_mass(const SiteLaw& law);
    static EnvLaw dirichlet(const std::array<double, 4>& alpha, double margin = 1e-6);
    static EnvLaw mixture(std::vector<SiteLaw> atoms, std::vector<double> weights = {});

    // Deterministic draw keyed by a 64-bit stream seed.
    SiteLaw draw(std::uint64_t key) const;
    void validate() const;
};

enum class EnvKind { Homogeneous, Periodic, Explicit, Iid };

// Immutable family of site laws indexed by all integers. Copies share state;
// shifting is O(1).
class Environment {
public:
    static Environment homogeneous(const SiteLaw& law);
    // law_at(i) = laws[i mod laws.size()].
    static Environment periodic(std::vector<SiteLaw> laws);
    // law_at(i) = laws[i - lo] on [lo, lo + laws.size() - 1], fallback elsewhere.
    static Environment explicit_range(long long lo, std::vector<SiteLaw> laws, const SiteLaw& fallback);
    // Each site an independent draw from `law`, keyed by (seed, site).
    static Environment iid(const EnvLaw& law, std::uint64_t seed);

    SiteLaw law_at(long long i) const;
    EnvKind kind() const;
    // Smallest known period: 1 for homogeneous, the cycle length for periodic.
    std::optional<long long> period() const;
    long long offset() const { return offset_; }
    Environment shifted(long long k) const;

    // Accessors for serialization; they describe the unshifted base.
    const std::vector<SiteLaw>& stored_laws() const;
    long long stored_lo() const;
    const SiteLaw& fallback() const;
    const EnvLaw& env_law() const;
    std::uint64_t seed() const;

    // Pointwise comparison on [lo, hi].
    bool equal_on(const Environment& other, long long lo, long long hi) const;

    struct Impl;

private:
    explicit Environment(std::shared_ptr<const Impl> impl, long long offset = 0);
    std::shared_ptr<const Impl> impl_;
    long long offset_ = 0;
};

// law_at(i) of the result equals env.law_at(i + k).
Environment shift(const Environment& env, long long k);

// Draws an environment from env_law. The sites in [lo, hi] are materialized
// eagerly; sites outside the range follow the same keyed rule.
Environment sample_environment(const EnvLaw& env_law, long long lo, long long hi, std::uint64_t seed);

}  // namespace ladderwalk
