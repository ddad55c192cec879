#include "ladderwalk/environment.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <sstream>

#include "ladderwalk/errors.hpp"
#include "ladderwalk/rng.hpp"

namespace ladderwalk {

SiteLaw SiteLaw::make(double q2, double q1, double p1, double p2) {
    SiteLaw law{q2, q1, p1, p2};
    law.validate();
    return law;
}

void SiteLaw::validate() const {
    const double v[4] = {q2, q1, p1, p2};
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            std::ostringstream os;
            os << "site law has a negative or non-finite entry: (" << q2 << ", " << q1 << ", " << p1
               << ", " << p2 << ")";
            throw InvalidLaw(os.str());
        }
    }
    const double sum = q2 + q1 + p1 + p2;
    if (std::abs(sum - 1.0) > kLawSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "site law entries sum to " << sum << ", not 1";
        throw InvalidLaw(os.str());
    }
}

double SiteLaw::prob(int jump) const {
    switch (jump) {
        case -2: return q2;
        case -1: return q1;
        case 1: return p1;
        case 2: return p2;
        default: return 0.0;
    }
}

double local_drift(const SiteLaw& law) { return law.p1 + 2.0 * law.p2 - law.q1 - 2.0 * law.q2; }

double jump_mass(const SiteLaw& law) { return 2.0 * law.q2 + law.q1 + law.p1 + 2.0 * law.p2; }

// ---------------------------------------------------------------- EnvLaw

EnvLaw EnvLaw::point_mass(const SiteLaw& law) {
    EnvLaw e;
    e.kind = Kind::PointMass;
    e.point = law;
    e.validate();
    return e;
}

EnvLaw EnvLaw::dirichlet(const std::array<double, 4>& alpha, double margin) {
    EnvLaw e;
    e.kind = Kind::Dirichlet;
    e.alpha = alpha;
    e.margin = margin;
    e.validate();
    return e;
}

EnvLaw EnvLaw::mixture(std::vector<SiteLaw> atoms, std::vector<double> weights) {
    EnvLaw e;
    e.kind = Kind::Mixture;
    if (weights.empty()) weights.assign(atoms.size(), 1.0);
    double total = 0.0;
    for (double w : weights) total += w;
    if (total > 0.0)
        for (double& w : weights) w /= total;
    e.atoms = std::move(atoms);
    e.weights = std::move(weights);
    e.validate();
    return e;
}

void EnvLaw::validate() const {
    switch (kind) {
        case Kind::PointMass:
            point.validate();
            break;
        case Kind::Dirichlet:
            for (double a : alpha)
                if (!(a > 0.0) || !std::isfinite(a)) throw InvalidLaw("Dirichlet concentrations must be positive");
            if (!(margin >= 0.0) || margin * 4.0 >= 1.0) throw InvalidLaw("Dirichlet margin must lie in [0, 0.25)");
            break;
        case Kind::Mixture:
            if (atoms.empty()) throw InvalidLaw("mixture needs at least one atom");
            if (weights.size() != atoms.size()) throw InvalidLaw("mixture weights and atoms differ in length");
            for (const auto& a : atoms) a.validate();
            for (double w : weights)
                if (!(w >= 0.0)) throw InvalidLaw("mixture weights must be nonnegative");
            break;
    }
}

SiteLaw EnvLaw::draw(std::uint64_t key) const {
    switch (kind) {
        case Kind::PointMass:
            return point;
        case Kind::Dirichlet: {
            SplitMix64 rng(key);
            double g[4];
            double total = 0.0;
            for (int j = 0; j < 4; ++j) {
                std::gamma_distribution<double> gamma(alpha[j], 1.0);
                g[j] = gamma(rng);
                total += g[j];
            }
            // Affine clamp keeps the sum exact up to rounding and each entry >= margin.
            const double scale = 1.0 - 4.0 * margin;
            double v[4];
            for (int j = 0; j < 4; ++j) v[j] = margin + scale * (g[j] / total);
            // Put the rounding residue on the largest entry.
            int jmax = 0;
            for (int j = 1; j < 4; ++j)
                if (v[j] > v[jmax]) jmax = j;
            double rest = 0.0;
            for (int j = 0; j < 4; ++j)
                if (j != jmax) rest += v[j];
            v[jmax] = 1.0 - rest;
            SiteLaw law{v[0], v[1], v[2], v[3]};
            law.validate();
            return law;
        }
        case Kind::Mixture: {
            SplitMix64 rng(key);
            const double u = uniform01(rng);
            double acc = 0.0;
            for (std::size_t j = 0; j + 1 < atoms.size(); ++j) {
                acc += weights[j];
                if (u < acc) return atoms[j];
            }
            return atoms.back();
        }
    }
    return point;
}

// ---------------------------------------------------------------- Environment

namespace {

std::atomic<std::uint64_t> g_next_env_id{1};

constexpr int kBlockBits = 6;
constexpr long long kBlockSize = 1LL << kBlockBits;
constexpr int kCacheSlots = 256;

long long floor_mod(long long i, long long p) {
    long long r = i % p;
    return r < 0 ? r + p : r;
}

}  // namespace

struct Environment::Impl {
    EnvKind kind = EnvKind::Homogeneous;
    std::vector<SiteLaw> laws;  // homogeneous: 1 entry; periodic: one cycle; explicit: the range
    long long lo = 0;
    SiteLaw fallback{};
    EnvLaw law{};
    std::uint64_t seed = 0;
    std::uint64_t id = 0;

    SiteLaw iid_site(long long i) const {
        return law.draw(derive_seed(seed, static_cast<std::uint64_t>(i)));
    }

    // i.i.d. sites are a pure function of (seed, i); the per-thread block
    // cache only saves recomputation and needs no locking.
    SiteLaw iid_law(long long i) const {
        struct Slot {
            std::uint64_t env = 0;
            long long block = 0;
            std::vector<SiteLaw> data;
        };
        thread_local std::vector<Slot> cache(kCacheSlots);
        thread_local Slot* last = nullptr;
        const long long block = i >> kBlockBits;
        if (last && last->env == id && last->block == block) return last->data[i - (block << kBlockBits)];
        const std::uint64_t h = mix64(id * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(block));
        Slot& slot = cache[h % kCacheSlots];
        if (slot.env != id || slot.block != block || slot.data.empty()) {
            slot.data.resize(kBlockSize);
            const long long base = block << kBlockBits;
            for (long long j = 0; j < kBlockSize; ++j) slot.data[j] = iid_site(base + j);
            slot.env = id;
            slot.block = block;
        }
        last = &slot;
        return slot.data[i - (block << kBlockBits)];
    }

    SiteLaw at(long long i) const {
        switch (kind) {
            case EnvKind::Homogeneous:
                return laws[0];
            case EnvKind::Periodic:
                return laws[floor_mod(i, static_cast<long long>(laws.size()))];
            case EnvKind::Explicit: {
                const long long j = i - lo;
                if (j >= 0 && j < static_cast<long long>(laws.size())) return laws[j];
                return fallback;
            }
            case EnvKind::Iid:
                return iid_law(i);
        }
        return laws[0];
    }
};

Environment::Environment(std::shared_ptr<const Impl> impl, long long offset)
    : impl_(std::move(impl)), offset_(offset) {}

Environment Environment::homogeneous(const SiteLaw& law) {
    law.validate();
    auto impl = std::make_shared<Impl>();
    impl->kind = EnvKind::Homogeneous;
    impl->laws = {law};
    impl->id = g_next_env_id++;
    return Environment(std::move(impl));
}

Environment Environment::periodic(std::vector<SiteLaw> laws) {
    if (laws.empty()) throw InvalidLaw("periodic environment needs at least one law");
    for (const auto& l : laws) l.validate();
    auto impl = std::make_shared<Impl>();
    impl->kind = EnvKind::Periodic;
    impl->laws = std::move(laws);
    impl->id = g_next_env_id++;
    return Environment(std::move(impl));
}

Environment Environment::explicit_range(long long lo, std::vector<SiteLaw> laws, const SiteLaw& fallback) {
    for (const auto& l : laws) l.validate();
    fallback.validate();
    auto impl = std::make_shared<Impl>();
    impl->kind = EnvKind::Explicit;
    impl->laws = std::move(laws);
    impl->lo = lo;
    impl->fallback = fallback;
    impl->id = g_next_env_id++;
    return Environment(std::move(impl));
}

Environment Environment::iid(const EnvLaw& law, std::uint64_t seed) {
    law.validate();
    if (law.kind == EnvLaw::Kind::PointMass) return homogeneous(law.point);
    auto impl = std::make_shared<Impl>();
    impl->kind = EnvKind::Iid;
    impl->law = law;
    impl->seed = seed;
    impl->id = g_next_env_id++;
    return Environment(std::move(impl));
}

SiteLaw Environment::law_at(long long i) const { return impl_->at(i + offset_); }

EnvKind Environment::kind() const { return impl_->kind; }

std::optional<long long> Environment::period() const {
    switch (impl_->kind) {
        case EnvKind::Homogeneous: return 1;
        case EnvKind::Periodic: return static_cast<long long>(impl_->laws.size());
        default: return std::nullopt;
    }
}

Environment Environment::shifted(long long k) const { return Environment(impl_, offset_ + k); }

const std::vector<SiteLaw>& Environment::stored_laws() const { return impl_->laws; }
long long Environment::stored_lo() const { return impl_->lo; }
const SiteLaw& Environment::fallback() const { return impl_->fallback; }
const EnvLaw& Environment::env_law() const { return impl_->law; }
std::uint64_t Environment::seed() const { return impl_->seed; }

bool Environment::equal_on(const Environment& other, long long lo, long long hi) const {
    for (long long i = lo; i <= hi; ++i)
        if (!(law_at(i) == other.law_at(i))) return false;
    return true;
}

Environment shift(const Environment& env, long long k) { return env.shifted(k); }

Environment sample_environment(const EnvLaw& env_law, long long lo, long long hi, std::uint64_t seed) {
    if (hi < lo) throw InvalidLaw("site range is empty");
    env_law.validate();
    if (env_law.kind == EnvLaw::Kind::PointMass) return Environment::homogeneous(env_law.point);
    Environment env = Environment::iid(env_law, seed);
    // Eager pass over the requested range: surfaces invalid draws here.
    for (long long i = lo; i <= hi; ++i) env.law_at(i).validate();
    return env;
}

}  // namespace ladderwalk
