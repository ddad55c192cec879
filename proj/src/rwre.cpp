#include "ladderwalk/rwre.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "ladderwalk/errors.hpp"
#include "ladderwalk/parallel.hpp"
#include "ladderwalk/rng.hpp"
#include "ladderwalk/simulator.hpp"

namespace ladderwalk {

namespace {

constexpr Vec9 kVisitsFromBelow = {1, 1, 1, 0, 0, 0, 1, 1, 1};
constexpr Vec9 kVisitsAtLevel = {1, 1, 0, 1, 1, 0, 1, 1, 0};
constexpr double kTermSlack = 1e-12;

// Immigration split by exit site: conditional law of (A1, A2) given an exit
// at 1, plus the A3 (exit at 2) unit.
Vec9 exit_split_row(const ExcursionIndices& ind) {
    const double lower = ind.alpha[0] + ind.alpha[1];
    if (!(lower > 0.0)) {
        std::ostringstream os;
        os << "no exit at the nearest site from level " << ind.level;
        throw DegenerateDenominator(os.str());
    }
    return {ind.alpha[0] / lower, ind.alpha[1] / lower, 1, 0, 0, 0, 0, 0, 0};
}

class SeriesGuard {
public:
    explicit SeriesGuard(const char* name) : name_(name) {}
    void check(double term, long long level) {
        if (term < -kTermSlack) {
            std::ostringstream os;
            os << name_ << " term at level " << level << " is negative (" << term << ")";
            throw DegenerateSystem(os.str());
        }
        rising_ = term >= prev_ ? rising_ + 1 : 0;
        prev_ = term;
        if (rising_ >= kDivergenceRun) {
            std::ostringstream os;
            os << name_ << " series stopped decreasing near level " << level;
            throw Diverging(os.str());
        }
    }

private:
    const char* name_;
    double prev_ = std::numeric_limits<double>::infinity();
    int rising_ = 0;
};

}  // namespace

T1Result normalizer(BranchingModel& model, double tol, long long max_levels) {
    T1Result out;
    try {
        Vec9 e = exit_split_row(model.indices(1));
        double sum = 2.0;
        SeriesGuard guard("normalizer");
        for (long long level = 0; out.levels < max_levels; --level) {
            e = row_times(e, model.mean(level).q);
            const double term = dot(e, kTimeWeights);
            sum += term;
            ++out.levels;
            if (term < tol) {
                out.converged = true;
                break;
            }
            guard.check(term, level);
        }
        out.value = sum;
    } catch (const NotConverged& e) {
        throw Diverging(std::string("hitting probabilities did not converge: ") + e.what());
    }
    return out;
}

double normalizer(const Environment& env, double tol, long long max_levels, const HittingOptions& opt) {
    BranchingModel model(env, opt);
    return normalizer(model, tol, max_levels).value;
}

DensityReport invariant_density(BranchingModel& model, double tol, long long max_levels) {
    DensityReport rep;
    try {
        // Term n counts visits to 0 by walks started n sites higher; the
        // shifted environment's level-j data is this model's level j + n.
        Vec9 at_level = kVisitsAtLevel;     // Q_n ... Q_0 applied to it
        Vec9 from_below = kVisitsFromBelow;  // Q_n ... Q_1 applied to it
        double sum = 2.0;
        SeriesGuard guard("invariant density");
        for (long long n = 0; rep.pi_levels < max_levels; ++n) {
            const Vec9 row = exit_split_row(model.indices(1 + n));
            const Mat9& q = model.mean(n).q;
            at_level = times_column(q, at_level);
            double term = dot(row, at_level);
            if (n >= 1) {
                from_below = times_column(q, from_below);
                term += dot(row, from_below);
            }
            sum += term;
            ++rep.pi_levels;
            if (term < tol) {
                rep.pi_converged = true;
                break;
            }
            guard.check(term, n);
        }
        rep.pi = sum;
    } catch (const NotConverged& e) {
        throw Diverging(std::string("hitting probabilities did not converge: ") + e.what());
    }
    const T1Result d = normalizer(model, tol, max_levels);
    rep.d = d.value;
    rep.d_levels = d.levels;
    rep.d_converged = d.converged;
    return rep;
}

DensityReport invariant_density(const Environment& env, double tol, long long max_levels, const HittingOptions& opt) {
    BranchingModel model(env, opt);
    return invariant_density(model, tol, max_levels);
}

VelocityReport velocity(const EnvLaw& env_law, long long samples, double tol, std::uint64_t seed, int workers,
                        long long max_levels, const HittingOptions& opt) {
    env_law.validate();
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (env_law.kind == EnvLaw::Kind::PointMass) samples = 1;

    struct Sample {
        bool ok = false;
        double pi = 0, d = 0, drift = 0, mass = 0;
    };
    std::vector<Sample> out(static_cast<std::size_t>(samples));
    parallel_chunks(samples, 1, workers, [&](long long, long long begin, long long end) {
        for (long long s = begin; s < end; ++s) {
            const Environment env = Environment::iid(env_law, derive_seed(seed, static_cast<std::uint64_t>(s)));
            Sample& r = out[static_cast<std::size_t>(s)];
            try {
                BranchingModel model(env, opt);
                const DensityReport dens = invariant_density(model, tol, max_levels);
                if (!dens.pi_converged || !dens.d_converged) continue;
                const SiteLaw w0 = env.law_at(0);
                r.mass = jump_mass(w0);
                if (r.mass < 1.0 - 1e-12 || r.mass > 2.0 + 1e-12)
                    throw DegenerateSystem("mean absolute jump outside [1, 2]");
                r.pi = dens.pi;
                r.d = dens.d;
                r.drift = local_drift(w0);
                r.ok = true;
            } catch (const Diverging&) {
            } catch (const NotConverged&) {
            } catch (const DegenerateDenominator&) {
            }
        }
    });

    VelocityReport rep;
    rep.samples = samples;
    RunningMoments num_drift, num_abs, den;
    // cross moments for the ratio standard errors
    double mean_nd = 0, mean_na = 0, mean_dd = 0;
    for (const Sample& s : out) {
        if (!s.ok) {
            ++rep.divergent;
            continue;
        }
        num_drift.add(s.pi * s.drift);
        num_abs.add(s.pi * s.mass);
        den.add(s.d);
    }
    rep.used = den.n;
    if (rep.used == 0) throw Diverging("no environment sample produced convergent series");
    for (const Sample& s : out) {
        if (!s.ok) continue;
        const double dd = s.d - den.mean;
        mean_nd += (s.pi * s.drift - num_drift.mean) * dd;
        mean_na += (s.pi * s.mass - num_abs.mean) * dd;
        mean_dd += dd * dd;
    }
    const double n = static_cast<double>(rep.used);
    rep.numerator_drift = num_drift.mean;
    rep.numerator_abs = num_abs.mean;
    rep.denominator = den.mean;
    rep.numerator_drift_se = num_drift.standard_error();
    rep.numerator_abs_se = num_abs.standard_error();
    rep.denominator_se = den.standard_error();
    rep.velocity_drift = rep.numerator_drift / rep.denominator;
    rep.velocity_abs = rep.numerator_abs / rep.denominator;
    if (rep.used > 1) {
        // delta method for a ratio of means
        auto ratio_se = [&](const RunningMoments& num, double cross, double ratio) {
            const double var = (num.variance() - 2.0 * ratio * cross / (n - 1.0) + ratio * ratio * mean_dd / (n - 1.0)) /
                               (den.mean * den.mean * n);
            return std::sqrt(std::max(0.0, var));
        };
        rep.velocity_drift_se = ratio_se(num_drift, mean_nd, rep.velocity_drift);
        rep.velocity_abs_se = ratio_se(num_abs, mean_na, rep.velocity_abs);
    }
    return rep;
}

}  // namespace ladderwalk
