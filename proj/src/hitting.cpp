#include "ladderwalk/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ladderwalk/errors.hpp"

namespace ladderwalk {

namespace {

constexpr double kProbSlack = 1e-10;
constexpr double kSingularTol = 1e-13;

[[noreturn, gnu::cold, gnu::noinline]] void throw_not_admissible(const SiteLaw& law, long long site, double eps) {
    std::ostringstream os;
    os << "site " << site << " has jump(-2) probability " << law.q2 << " below the floor " << eps;
    throw NotAdmissible(os.str());
}

inline void require_admissible(const SiteLaw& law, long long site, double eps) {
    if (!law.admissible(eps)) [[unlikely]]
        throw_not_admissible(law, site, eps);
}

double clamp_prob(double p, const char* what) {
    if (!std::isfinite(p) || p < -kProbSlack || p > 1.0 + kProbSlack) {
        std::ostringstream os;
        os.precision(17);
        os << what << " evaluated to " << p << ", outside [0, 1]";
        throw DegenerateSystem(os.str());
    }
    return std::clamp(p, 0.0, 1.0);
}

// Upper-exit probabilities of [a+1, m] from its top site m, for every m in
// [a+1, b-1]: up1[m-a-1] lands on m+1, up2[m-a-1] on m+2.
//
// Growing the interval by one site uses only the exits of the previous
// interval from its top two sites, so each step is a first-step equation in
// nonnegative quantities.
void upper_exit_sweep(const Environment& env, long long a, long long b, double eps,
                      std::vector<double>& up1, std::vector<double>& up2) {
    const long long n = b - a - 1;
    up1.assign(static_cast<std::size_t>(n), 0.0);
    up2.assign(static_cast<std::size_t>(n), 0.0);
    // exits of the empty interval: everything is absorbed below
    double top1 = 0.0, top2 = 0.0;    // from m to m+1, m+2
    double next1 = 0.0, next2 = 0.0;  // from m-1 to m+1, m+2
    for (long long m = a + 1; m <= b - 1; ++m) {
        const SiteLaw w = env.law_at(m);
        require_admissible(w, m, eps);
        // The walk at the new top site either exits or falls back into the
        // old interval at its top (m-1) or next-to-top (m-2) site.
        const double den = (w.p1 + w.p2) + w.q1 * (1.0 - top1) + w.q2 * (1.0 - next1);
        if (!(den > kSingularTol)) {
            std::ostringstream os;
            os << "walk started at site " << m << " cannot leave [" << a + 1 << ", " << m << "] upward";
            throw DegenerateSystem(os.str());
        }
        const double new_top1 = (w.p1 + w.q1 * top2 + w.q2 * next2) / den;
        const double new_top2 = w.p2 / den;
        const double new_next1 = top2 + top1 * new_top1;
        const double new_next2 = top1 * new_top2;
        top1 = new_top1;
        top2 = new_top2;
        next1 = new_next1;
        next2 = new_next2;
        up1[static_cast<std::size_t>(m - a - 1)] = top1;
        up2[static_cast<std::size_t>(m - a - 1)] = top2;
    }
}

// Fills exit probabilities to `target` for starts in [lowest, b-1] by chaining
// successive upper exits; out[k - lowest].
void chain_down(const std::vector<double>& up1, const std::vector<double>& up2, long long a, long long b,
                long long lowest, long long target, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(b - lowest), 0.0);
    double r_next = (target == b) ? 1.0 : 0.0;      // value at m + 1
    double r_next2 = (target == b + 1) ? 1.0 : 0.0;  // value at m + 2
    for (long long m = b - 1; m >= lowest; --m) {
        const std::size_t j = static_cast<std::size_t>(m - a - 1);
        const double r = up1[j] * r_next + up2[j] * r_next2;
        out[static_cast<std::size_t>(m - lowest)] = r;
        r_next2 = r_next;
        r_next = r;
    }
}

void check_monotone(ExitProbTable& t) {
    t.monotone = true;
    for (std::size_t j = 1; j < t.to_b.size(); ++j) {
        if (t.to_b[j] + t.to_b1[j] < t.to_b[j - 1] + t.to_b1[j - 1] - 1e-9) {
            t.monotone = false;
            return;
        }
    }
}

ExitProbTable exit_recursive(const Environment& env, long long a, long long b, double eps) {
    std::vector<double> up1, up2;
    upper_exit_sweep(env, a, b, eps, up1, up2);
    ExitProbTable t;
    t.a = a;
    t.b = b;
    chain_down(up1, up2, a, b, a + 1, b, t.to_b);
    chain_down(up1, up2, a, b, a + 1, b + 1, t.to_b1);
    for (auto& p : t.to_b) p = clamp_prob(p, "exit probability");
    for (auto& p : t.to_b1) p = clamp_prob(p, "exit probability");
    check_monotone(t);
    return t;
}

// Closed form. With u_j = P_{j+1} - P_j and V_l = (u_{l-2}, u_{l-1}, u_l),
// the interior equations read V_l = M_l V_{l+1}, so V_{a+1} = G V_b with
// G = M_{a+1} ... M_{b-1}. The two unknowns u_{b-2}, u_{b-1} follow from
// u_{a-1} = 0 and sum_{j=a}^{b-1} u_j = P_b - P_a.
// The 2x2 system loses roughly one digit per site to the growing mode of G,
// so it is evaluated in quad precision.
using Quad = __float128;
using QMat3 = std::array<std::array<Quad, 3>, 3>;

Quad quad_abs(Quad v) { return v < 0 ? -v : v; }

QMat3 quad_step(const SiteLaw& w) {
    const Quad q2 = w.q2;
    QMat3 m{};
    m[0][0] = -(Quad(w.q1) + q2) / q2;
    m[0][1] = (Quad(w.p1) + Quad(w.p2)) / q2;
    m[0][2] = Quad(w.p2) / q2;
    m[1][0] = 1;
    m[2][1] = 1;
    return m;
}

QMat3 quad_multiply(const QMat3& x, const QMat3& y) {
    QMat3 z{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 3; ++k) z[r][c] += x[r][k] * y[k][c];
    return z;
}

ExitProbTable exit_transfer(const Environment& env, long long a, long long b, double eps) {
    const long long n = b - a - 1;
    std::vector<QMat3> steps(static_cast<std::size_t>(n));
    for (long long l = a + 1; l <= b - 1; ++l) {
        const SiteLaw w = env.law_at(l);
        require_admissible(w, l, eps);
        steps[static_cast<std::size_t>(l - a - 1)] = quad_step(w);
    }
    // prod = M_l ... M_{b-1} and sum = sum_{l'=l}^{b} M_{l'} ... M_{b-1}, both divided by scale.
    QMat3 prod{}, sum{};
    for (int r = 0; r < 3; ++r) prod[r][r] = sum[r][r] = 1;
    Quad scale = 1;
    for (long long l = b - 1; l >= a + 1; --l) {
        prod = quad_multiply(steps[static_cast<std::size_t>(l - a - 1)], prod);
        Quad big = 0;
        for (const auto& row : prod)
            for (Quad v : row) big = std::max(big, quad_abs(v));
        if (!(big > 0) || !std::isfinite(static_cast<double>(big)))
            throw DegenerateSystem("step-matrix product is not finite");
        if (big > Quad(1e100)) {
            for (auto& row : prod)
                for (Quad& v : row) v /= big;
            for (auto& row : sum)
                for (Quad& v : row) v /= big;
            scale *= big;
        }
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) sum[r][c] += prod[r][c];
    }
    const Quad inv_scale = Quad(1) / scale;

    ExitProbTable t;
    t.a = a;
    t.b = b;
    t.to_b.assign(static_cast<std::size_t>(n), 0.0);
    t.to_b1.assign(static_cast<std::size_t>(n), 0.0);
    for (int which = 0; which < 2; ++which) {
        const Quad p_top = which == 0 ? 1 : 0;   // P_b
        const Quad u_top = which == 0 ? -1 : 1;  // u_b = P_{b+1} - P_b
        const Quad total = which == 0 ? 1 : 0;   // P_b - P_a
        // row 1: e1 G (x, y, u_top) = 0; row 2: (e1 S + e2)(x, y, u_top) = total
        Quad m11 = prod[0][0], m12 = prod[0][1], r1 = -prod[0][2] * u_top;
        Quad m21 = sum[0][0], m22 = sum[0][1] + inv_scale, r2 = total * inv_scale - sum[0][2] * u_top;
        const Quad n1 = std::max({quad_abs(m11), quad_abs(m12), quad_abs(r1)});
        const Quad n2 = std::max({quad_abs(m21), quad_abs(m22), quad_abs(r2)});
        if (n1 > 0) m11 /= n1, m12 /= n1, r1 /= n1;
        if (n2 > 0) m21 /= n2, m22 /= n2, r2 /= n2;
        const Quad det = m11 * m22 - m12 * m21;
        if (!(quad_abs(det) >= Quad(kSingularTol))) throw DegenerateSystem("exit-probability linear system is singular");
        const Quad x = (r1 * m22 - m12 * r2) / det;  // u_{b-2}
        const Quad y = (m11 * r2 - r1 * m21) / det;  // u_{b-1}
        auto& out = which == 0 ? t.to_b : t.to_b1;
        // Walk V downward from V_b and accumulate the partial sums of u.
        std::array<Quad, 3> v{x, y, u_top};
        Quad acc = y;
        out[static_cast<std::size_t>(n - 1)] = static_cast<double>(p_top - acc);
        if (n >= 2) {
            acc += x;
            out[static_cast<std::size_t>(n - 2)] = static_cast<double>(p_top - acc);
        }
        for (long long l = b - 1; l >= a + 3; --l) {
            const QMat3& m = steps[static_cast<std::size_t>(l - a - 1)];
            std::array<Quad, 3> nv{};
            for (int r = 0; r < 3; ++r) nv[r] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2];
            v = nv;
            acc += v[0];  // u_{l-2}
            out[static_cast<std::size_t>(l - a - 3)] = static_cast<double>(p_top - acc);
        }
    }
    for (auto& p : t.to_b) p = clamp_prob(p, "exit probability");
    for (auto& p : t.to_b1) p = clamp_prob(p, "exit probability");
    check_monotone(t);
    return t;
}

}  // namespace

StepMatrix build_step_matrix(const SiteLaw& law, double eps) {
    if (!law.admissible(eps)) {
        std::ostringstream os;
        os << "jump(-2) probability " << law.q2 << " is below the floor " << eps;
        throw NotAdmissible(os.str());
    }
    StepMatrix s;
    s.m[0] = {-(law.q1 + law.q2) / law.q2, (law.p1 + law.p2) / law.q2, law.p2 / law.q2};
    s.m[1] = {1.0, 0.0, 0.0};
    s.m[2] = {0.0, 1.0, 0.0};
    return s;
}

Mat3 multiply(const Mat3& x, const Mat3& y) {
    Mat3 z{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) z[r][c] = x[r][0] * y[0][c] + x[r][1] * y[1][c] + x[r][2] * y[2][c];
    return z;
}

double ExitProbTable::at(long long k, long long target) const {
    const auto j = static_cast<std::size_t>(k - a - 1);
    if (k < a + 1 || k > b - 1) throw std::out_of_range("start outside the interval");
    if (target == b) return to_b[j];
    if (target == b + 1) return to_b1[j];
    throw std::out_of_range("target must be b or b+1");
}

double ExitProbTable::lower(long long k) const { return std::max(0.0, 1.0 - at(k, b) - at(k, b + 1)); }

ExitProbTable exit_probabilities(const Environment& env, long long a, long long b, ExitMethod method,
                                 double eps) {
    if (b < a + 2) throw std::invalid_argument("interval needs a + 2 <= b");
    return method == ExitMethod::Recursive ? exit_recursive(env, a, b, eps) : exit_transfer(env, a, b, eps);
}

namespace {

// Hitting profiles over i for every start in [k_lo, k_hi] from one doubling
// sequence of sweeps; settles when every start has settled.
std::vector<HitProfile> hit_span(const Environment& env, long long k_lo, long long k_hi, long long i, double tol,
                                 long long max_depth, double eps) {
    if (k_hi > i) throw std::invalid_argument("start must not exceed the threshold");
    const long long b = i + 1;
    long long depth = 16;
    while (i - depth + 1 > k_lo) depth *= 2;
    if (depth > max_depth) throw std::invalid_argument("start lies deeper than max_depth");

    const std::size_t n = static_cast<std::size_t>(k_hi - k_lo + 1);
    std::vector<double> up1, up2, v1, v2;
    std::vector<std::array<double, 2>> prev(n), cur(n);
    bool have_prev = false;
    for (;;) {
        const long long a = i - depth;
        upper_exit_sweep(env, a, b, eps, up1, up2);
        chain_down(up1, up2, a, b, k_lo, b, v1);
        chain_down(up1, up2, a, b, k_lo, b + 1, v2);
        bool settled = have_prev;
        for (std::size_t j = 0; j < n; ++j) {
            cur[j] = {clamp_prob(v1[j], "hitting probability"), clamp_prob(v2[j], "hitting probability")};
            settled = settled && std::abs(cur[j][0] - prev[j][0]) < tol && std::abs(cur[j][1] - prev[j][1]) < tol;
        }
        if (settled) {
            std::vector<HitProfile> out(n);
            for (std::size_t j = 0; j < n; ++j)
                out[j] = HitProfile{k_lo + static_cast<long long>(j), i, cur[j][0], cur[j][1], depth, true};
            return out;
        }
        if (depth * 2 > max_depth) {
            std::size_t j = 0;
            while (j + 1 < n && std::abs(cur[j][0] - prev[j][0]) < tol && std::abs(cur[j][1] - prev[j][1]) < tol) ++j;
            std::ostringstream os;
            os.precision(17);
            os << "hitting probabilities from " << k_lo + static_cast<long long>(j) << " over " << i
               << " did not settle by depth " << depth << ": (" << prev[j][0] << ", " << prev[j][1] << ") then ("
               << cur[j][0] << ", " << cur[j][1] << ")";
            throw NotConverged(os.str(), prev[j], cur[j], depth);
        }
        prev.swap(cur);
        have_prev = true;
        depth *= 2;
    }
}

}  // namespace

HitProfile hit_from_below(const Environment& env, long long k, long long i, double tol, long long max_depth,
                          double eps) {
    return hit_span(env, k, k, i, tol, max_depth, eps).front();
}

std::array<HitProfile, 2> hit_top_pair(const Environment& env, long long i, double tol, long long max_depth,
                                       double eps) {
    const std::vector<HitProfile> span = hit_span(env, i - 1, i, i, tol, max_depth, eps);
    return {span[1], span[0]};
}

double characteristic_poly(const SiteLaw& law, double lambda) {
    return ((lambda + (law.q1 + law.q2) / law.q2) * lambda - (law.p1 + law.p2) / law.q2) * lambda -
           law.p2 / law.q2;
}

HomogeneousRoot homogeneous_root(const SiteLaw& law, double eps) {
    law.validate();
    if (!law.admissible(eps)) throw NotAdmissible("jump(-2) probability is below the ellipticity floor");
    if (local_drift(law) < -kLawSumTolerance) throw DriftNegative("local drift is negative");
    // q2 * F, same sign as F with O(1) coefficients
    auto g = [&](double x) { return ((law.q2 * x + (law.q1 + law.q2)) * x - (law.p1 + law.p2)) * x - law.p2; };
    double lo = -1.0, hi = 0.0;
    if (!(g(lo) > 0.0)) throw DegenerateSystem("characteristic cubic is not positive at -1");
    double h = 0.0;
    if (law.p2 > 0.0) {
        // bisect down to adjacent doubles
        for (int it = 0; it < 2000; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (g(mid) > 0.0) lo = mid;
            else hi = mid;
        }
        h = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
    }
    HomogeneousRoot out;
    out.h = h;
    // remaining factor lambda^2 + B lambda + C
    const double B = (law.q1 + law.q2) / law.q2 + h;
    const double C = -(law.p1 + law.p2) / law.q2 + h * B;
    const double disc = B * B - 4.0 * C;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double r1 = (-B - std::copysign(s, B)) / 2.0;
        const double r2 = r1 != 0.0 ? C / r1 : (-B + std::copysign(s, B)) / 2.0;
        out.other_min_abs = std::min(std::abs(r1), std::abs(r2));
    } else {
        out.other_min_abs = std::sqrt(C);
    }
    out.g_abs_ge_1 = out.other_min_abs >= 1.0 - 1e-12;
    return out;
}

}  // namespace ladderwalk
