#include "ladderwalk/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ladderwalk/parallel.hpp"

namespace ladderwalk {

namespace {
constexpr long long kReplicaChunk = 4096;
}

double RunningMoments::standard_error() const {
    return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

WalkPath run_to_ladder(const Environment& env, std::uint64_t seed, long long step_cap) {
    std::mt19937_64 rng(seed);
    WalkPath path;
    path.positions.push_back(0);
    const LadderOutcome out =
        walk_to_ladder(env, rng, step_cap, [&](long long, long long to) { path.positions.push_back(to); });
    path.stopped = out.stopped;
    if (!out.stopped) {
        std::ostringstream os;
        os << "walk did not exceed 0 within " << step_cap << " steps";
        throw CapReached(os.str(), std::move(path));
    }
    path.t1 = out.t1;
    path.x_t1 = static_cast<int>(out.x);
    return path;
}

EnsembleStats run_ensemble(const Environment& env, std::uint64_t master_seed, long long replicas, int workers,
                           long long step_cap) {
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    struct Partial {
        RunningMoments t1, x;
        long long abandoned = 0;
        std::array<long long, 2> hist{};
    };
    const long long chunks = (replicas + kReplicaChunk - 1) / kReplicaChunk;
    std::vector<Partial> parts(static_cast<std::size_t>(chunks));
    parallel_chunks(replicas, kReplicaChunk, workers, [&](long long c, long long begin, long long end) {
        Partial& p = parts[static_cast<std::size_t>(c)];
        for (long long r = begin; r < end; ++r) {
            std::mt19937_64 rng(replica_seed(master_seed, static_cast<std::uint64_t>(r)));
            const LadderOutcome out = walk_to_ladder(env, rng, step_cap, [](long long, long long) {});
            if (!out.stopped) {
                ++p.abandoned;
                continue;
            }
            p.t1.add(static_cast<double>(out.t1));
            p.x.add(static_cast<double>(out.x));
            ++p.hist[out.x == 1 ? 0 : 1];
        }
    });
    Partial total;
    for (const auto& p : parts) {
        total.t1.merge(p.t1);
        total.x.merge(p.x);
        total.abandoned += p.abandoned;
        total.hist[0] += p.hist[0];
        total.hist[1] += p.hist[1];
    }
    EnsembleStats s;
    s.replicas = replicas;
    s.stopped = total.t1.n;
    s.abandoned = total.abandoned;
    s.mean_t1 = total.t1.mean;
    s.var_t1 = total.t1.variance();
    s.se_t1 = total.t1.standard_error();
    s.mean_x = total.x.mean;
    s.var_x = total.x.variance();
    s.se_x = total.x.standard_error();
    s.x_hist = total.hist;
    s.bias_warning = static_cast<double>(s.abandoned) > 1e-4 * static_cast<double>(replicas);
    return s;
}

HorizonResult run_horizon(const Environment& env, std::uint64_t seed, long long n_steps) {
    if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
    std::mt19937_64 rng(seed);
    HorizonResult r;
    r.n_steps = n_steps;
    long long x = 0;
    long long lo = 0, hi = 0;
    const bool constant = env.kind() == EnvKind::Homogeneous;
    const SiteLaw w0 = env.law_at(0);
    for (long long n = 0; n < n_steps; ++n) {
        x += sample_jump(constant ? w0 : env.law_at(x), uniform01(rng));
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    r.final_position = x;
    r.empirical_drift = n_steps > 0 ? static_cast<double>(x) / static_cast<double>(n_steps) : 0.0;
    r.min_position = lo;
    r.max_position = hi;
    return r;
}

}  // namespace ladderwalk
