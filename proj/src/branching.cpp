#include "ladderwalk/branching.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ladderwalk/errors.hpp"
#include "ladderwalk/rng.hpp"

namespace ladderwalk {

namespace {

constexpr double kDenominatorFloor = 1e-14;
constexpr double kNegativeSlack = 1e-12;
constexpr double kUnitSlack = 1e-10;

double nonneg(double x, const char* what, long long level) {
    if (x >= 0.0) return x;
    if (x >= -kNegativeSlack) return 0.0;
    std::ostringstream os;
    os << what << " at level " << level << " is negative (" << x << ")";
    throw DegenerateSystem(os.str());
}

double unit(double x, const char* what, long long level) {
    if (x >= 0.0 && x <= 1.0) return x;
    if (x >= -kUnitSlack && x <= 1.0 + kUnitSlack) return std::clamp(x, 0.0, 1.0);
    std::ostringstream os;
    os << what << " at level " << level << " is outside [0, 1] (" << x << ")";
    throw DegenerateSystem(os.str());
}

double checked_ratio(double num, double den, const char* what, long long level) {
    if (!(den > kDenominatorFloor)) {
        std::ostringstream os;
        os << "denominator of " << what << " at level " << level << " vanishes (" << den << ")";
        throw DegenerateDenominator(os.str());
    }
    return num / den;
}

enum class Family { Plain, SSplit, TSplit, VSplit };

Family family_of(int parent) {
    switch (parent) {
        case A1: case A3: case C1: case C3: return Family::Plain;
        case A2: case C2: return Family::SSplit;
        case B1: case B3: return Family::TSplit;
        case B2: return Family::VSplit;
        default: throw std::invalid_argument("parent type must be in 1..9");
    }
}

// Multinomial-geometric law of the (A1, A2, B1, B2) counts.
double core_pmf(long long a, long long b, long long c, long long d, const ExcursionIndices& ind, double stop) {
    const double rates[4] = {ind.alpha[0], ind.alpha[1], ind.beta[0], ind.beta[1]};
    const long long counts[4] = {a, b, c, d};
    long long n = 0;
    double log_p = 0.0;
    for (int j = 0; j < 4; ++j) {
        if (counts[j] == 0) continue;
        if (rates[j] <= 0.0) return 0.0;
        n += counts[j];
        log_p += static_cast<double>(counts[j]) * std::log(rates[j]) - std::lgamma(static_cast<double>(counts[j]) + 1.0);
    }
    log_p += std::lgamma(static_cast<double>(n) + 1.0);
    return std::exp(log_p) * stop;
}

void sample_core(Tally& out, const ExcursionIndices& ind, std::mt19937_64& rng) {
    const double c1 = ind.alpha[0];
    const double c2 = c1 + ind.alpha[1];
    const double c3 = c2 + ind.beta[0];
    const double c4 = c3 + ind.beta[1];
    for (;;) {
        const double u = uniform01(rng);
        if (u < c1) ++out[0];
        else if (u < c2) ++out[1];
        else if (u < c3) ++out[3];
        else if (u < c4) ++out[4];
        else return;
    }
}

}  // namespace

ExcursionIndices excursion_indices(const Environment& env, long long i, const HittingOptions& opt) {
    const SiteLaw here = env.law_at(i);
    const SiteLaw below = env.law_at(i - 1);
    const SiteLaw above = env.law_at(i + 1);
    // entrance laws into (i-2, inf) from i-2 and i-3, first landing at i-1
    const std::array<HitProfile, 2> hits = hit_top_pair(env, i - 2, opt.tol, opt.max_depth);
    const double f_top = hits[0].f1;
    const double f_next = hits[1].f1;
    // 1 - q1 f_top - q2 f_next, written as a sum of nonnegative terms
    const double den = (below.p1 + below.p2) + below.q1 * (1.0 - f_top) + below.q2 * (1.0 - f_next);
    if (!(den > kDenominatorFloor)) {
        std::ostringstream os;
        os << "return denominator at level " << i << " vanishes";
        throw DegenerateDenominator(os.str());
    }
    ExcursionIndices ind;
    ind.level = i;
    ind.alpha[0] = here.q1 * below.p1 / den;
    ind.alpha[2] = here.q1 * below.p2 / den;
    ind.alpha[1] = nonneg(here.q1 - ind.alpha[0] - ind.alpha[2], "alpha_2", i);
    ind.beta[0] = here.q2 * f_top * below.p1 / den;
    ind.beta[2] = here.q2 * f_top * below.p2 / den;
    ind.beta[1] = nonneg(here.q2 - ind.beta[0] - ind.beta[2], "beta_2", i);
    ind.gamma[0] = above.q2 * below.p1 / den;
    ind.gamma[2] = above.q2 * below.p2 / den;
    ind.gamma[1] = nonneg(above.q2 - ind.gamma[0] - ind.gamma[2], "gamma_2", i);
    return ind;
}

OffspringScalars offspring_scalars(const ExcursionIndices& ind, double beta2_next) {
    const long long i = ind.level;
    const double stop = 1.0 - ind.alpha[0] - ind.alpha[1] - ind.beta[0] - ind.beta[1];
    OffspringScalars s;
    s.level = i;
    s.x = checked_ratio(ind.alpha[0], stop, "x", i);
    s.y = checked_ratio(ind.alpha[1], stop, "y", i);
    s.z = checked_ratio(ind.beta[0], stop, "z", i);
    s.w = checked_ratio(ind.beta[1], stop, "w", i);
    s.s = unit(checked_ratio(ind.alpha[2], ind.alpha[2] + ind.beta[2], "s", i), "s", i);
    s.t = unit(checked_ratio(ind.gamma[0], ind.gamma[0] + ind.gamma[1], "t", i), "t", i);
    s.v = unit(1.0 - checked_ratio(ind.gamma[2], beta2_next, "v", i), "v", i);
    return s;
}

double offspring_pmf(int parent, const Tally& child, const ExcursionIndices& ind, const OffspringScalars& sc) {
    const Family fam = family_of(parent);
    for (long long k : child)
        if (k < 0) return 0.0;
    const double stop = 1.0 - ind.alpha[0] - ind.alpha[1] - ind.beta[0] - ind.beta[1];
    const long long a = child[0], b = child[1], c = child[3], d = child[4];
    const long long e[5] = {child[2], child[5], child[6], child[7], child[8]};  // A3 B3 C1 C2 C3
    auto extras_are = [&](std::initializer_list<long long> want) {
        int j = 0;
        for (long long x : want)
            if (e[j++] != x) return false;
        return true;
    };
    switch (fam) {
        case Family::Plain:
            if (!extras_are({0, 0, 0, 0, 0})) return 0.0;
            return core_pmf(a, b, c, d, ind, stop);
        case Family::SSplit:
            if (extras_are({1, 0, 0, 0, 0})) return core_pmf(a, b, c, d, ind, stop) * sc.s;
            if (extras_are({0, 1, 0, 0, 0})) return core_pmf(a, b, c, d, ind, stop) * (1.0 - sc.s);
            return 0.0;
        case Family::TSplit:
            if (extras_are({0, 0, 1, 0, 0})) return core_pmf(a, b, c, d, ind, stop) * sc.t;
            if (extras_are({0, 0, 0, 1, 0})) return core_pmf(a, b, c, d, ind, stop) * (1.0 - sc.t);
            return 0.0;
        case Family::VSplit: {
            if (a == 0 && b == 0 && c == 0 && d == 0 && extras_are({0, 0, 0, 0, 1})) return 1.0 - sc.v;
            if (e[4] != 0 || e[0] + e[1] != 1 || e[2] + e[3] != 1) return 0.0;
            const double branch_s = e[0] == 1 ? sc.s : 1.0 - sc.s;
            const double branch_t = e[2] == 1 ? sc.t : 1.0 - sc.t;
            return core_pmf(a, b, c, d, ind, stop) * sc.v * branch_s * branch_t;
        }
    }
    return 0.0;
}

Tally offspring_sample(int parent, const ExcursionIndices& ind, const OffspringScalars& sc, std::mt19937_64& rng) {
    const Family fam = family_of(parent);
    Tally out{};
    switch (fam) {
        case Family::Plain:
            sample_core(out, ind, rng);
            break;
        case Family::SSplit:
            sample_core(out, ind, rng);
            ++out[uniform01(rng) < sc.s ? 2 : 5];
            break;
        case Family::TSplit:
            sample_core(out, ind, rng);
            ++out[uniform01(rng) < sc.t ? 6 : 7];
            break;
        case Family::VSplit:
            if (uniform01(rng) >= sc.v) {
                out[8] = 1;
                break;
            }
            sample_core(out, ind, rng);
            ++out[uniform01(rng) < sc.s ? 2 : 5];
            ++out[uniform01(rng) < sc.t ? 6 : 7];
            break;
    }
    return out;
}

MeanMatrix mean_matrix(const OffspringScalars& sc) {
    MeanMatrix m;
    m.level = sc.level;
    const Vec9 plain = {sc.x, sc.y, 0, sc.z, sc.w, 0, 0, 0, 0};
    Vec9 s_row = plain;
    s_row[2] = sc.s;
    s_row[5] = 1.0 - sc.s;
    Vec9 t_row = plain;
    t_row[6] = sc.t;
    t_row[7] = 1.0 - sc.t;
    Vec9 v_row = {sc.x, sc.y, sc.s, sc.z, sc.w, 1.0 - sc.s, sc.t, 1.0 - sc.t, 0.0};
    for (auto& e : v_row) e *= sc.v;
    v_row[8] = 1.0 - sc.v;
    m.q = {plain, s_row, plain, t_row, v_row, t_row, plain, s_row, plain};
    return m;
}

ImmigrationLaw immigration_law(const ExcursionIndices& one) {
    const double total = one.alpha[0] + one.alpha[1] + one.alpha[2];
    ImmigrationLaw law;
    for (int j = 0; j < 3; ++j) law.pi[j] = checked_ratio(one.alpha[j], total, "immigration law", one.level);
    return law;
}

// ---------------------------------------------------------------- model

BranchingModel::BranchingModel(Environment env, HittingOptions opt) : env_(std::move(env)), opt_(opt) {}

long long BranchingModel::key(long long i) const {
    if (auto p = env_.period()) {
        const long long r = i % *p;
        return r < 0 ? r + *p : r;
    }
    return i;
}

const ExcursionIndices& BranchingModel::indices(long long i) {
    const long long k = key(i);
    auto it = indices_.find(k);
    if (it == indices_.end()) it = indices_.emplace(k, excursion_indices(env_, k, opt_)).first;
    return it->second;
}

const OffspringScalars& BranchingModel::scalars(long long i) {
    const long long k = key(i);
    auto it = scalars_.find(k);
    if (it == scalars_.end()) {
        const double beta2_next = indices(k + 1).beta[1];
        it = scalars_.emplace(k, offspring_scalars(indices(k), beta2_next)).first;
    }
    return it->second;
}

const MeanMatrix& BranchingModel::mean(long long i) {
    const long long k = key(i);
    auto it = means_.find(k);
    if (it == means_.end()) it = means_.emplace(k, mean_matrix(scalars(k))).first;
    return it->second;
}

ImmigrationLaw BranchingModel::immigration() { return immigration_law(indices(1)); }

Vec9 BranchingModel::immigration_vector() {
    const ImmigrationLaw law = immigration();
    return {law.pi[0], law.pi[1], law.pi[2], 0, 0, 0, 0, 0, 0};
}

Vec9 row_times(const Vec9& row, const Mat9& m) {
    Vec9 out{};
    for (int r = 0; r < 9; ++r) {
        if (row[r] == 0.0) continue;
        for (int c = 0; c < 9; ++c) out[c] += row[r] * m[r][c];
    }
    return out;
}

Vec9 times_column(const Mat9& m, const Vec9& col) {
    Vec9 out{};
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 9; ++c) out[r] += m[r][c] * col[c];
    return out;
}

double dot(const Vec9& a, const Vec9& b) {
    double s = 0.0;
    for (int j = 0; j < 9; ++j) s += a[j] * b[j];
    return s;
}

Vec9 expected_tally(BranchingModel& model, long long i) {
    if (i > 0) throw std::invalid_argument("tally level must be <= 0");
    Vec9 e = model.immigration_vector();
    for (long long level = 0; level >= i; --level) e = row_times(e, model.mean(level).q);
    return e;
}

Vec9 expected_tally(const Environment& env, long long i, const HittingOptions& opt) {
    BranchingModel model(env, opt);
    return expected_tally(model, i);
}

T1Result expected_t1(BranchingModel& model, double tol, long long max_levels) {
    T1Result out;
    try {
        Vec9 e = model.immigration_vector();
        double sum = 1.0;
        double prev = std::numeric_limits<double>::infinity();
        int rising = 0;
        for (long long level = 0; out.levels < max_levels; --level) {
            e = row_times(e, model.mean(level).q);
            const double term = dot(e, kTimeWeights);
            sum += term;
            ++out.levels;
            if (term < tol) {
                out.converged = true;
                break;
            }
            rising = term >= prev ? rising + 1 : 0;
            if (rising >= kDivergenceRun) {
                std::ostringstream os;
                os << "ladder-time series terms stopped decreasing near level " << level;
                throw Diverging(os.str());
            }
            prev = term;
        }
        out.value = sum;
    } catch (const NotConverged& e) {
        throw Diverging(std::string("hitting probabilities did not converge (recurrent regime?): ") + e.what());
    }
    return out;
}

T1Result expected_t1(const Environment& env, double tol, long long max_levels, const HittingOptions& opt) {
    BranchingModel model(env, opt);
    return expected_t1(model, tol, max_levels);
}

}  // namespace ladderwalk
