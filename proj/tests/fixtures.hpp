#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ladderwalk/branching.hpp"
#include "ladderwalk/environment.hpp"

namespace fixtures {

using ladderwalk::Environment;
using ladderwalk::SiteLaw;

// Homogeneous reference laws in (q2, q1, p1, p2) order, strongest drift first.
inline SiteLaw law_strong() { return SiteLaw::make(0.0800, 0.3600, 0.2100, 0.3500); }
inline SiteLaw law_mild() { return SiteLaw::make(0.1900, 0.3000, 0.3000, 0.2100); }
inline SiteLaw law_weak() { return SiteLaw::make(0.3199, 0.1801, 0.1789, 0.3211); }
inline SiteLaw law_rare_long() { return SiteLaw::make(0.0001, 0.4999, 0.4998, 0.0002); }
inline SiteLaw law_balanced() { return SiteLaw::make(0.1372, 0.3628, 0.3627, 0.1373); }

inline std::vector<SiteLaw> reference_laws() {
    return {law_strong(), law_mild(), law_weak(), law_rare_long(), law_balanced()};
}

// Random law with q2 >= floor and entries from a flat Dirichlet.
inline SiteLaw random_law(std::mt19937_64& rng, double floor = 0.02) {
    std::exponential_distribution<double> e(1.0);
    double v[4];
    double s = 0;
    for (double& x : v) s += (x = e(rng));
    for (double& x : v) x /= s;
    v[0] = floor + (1.0 - floor) * v[0];
    for (int j = 1; j < 4; ++j) v[j] *= (1.0 - floor);
    const double rest = v[0] + v[1] + v[2];
    return SiteLaw::make(v[0], v[1], v[2], 1.0 - rest);
}

// Random law biased upward so the walk is transient to the right.
inline SiteLaw random_upward_law(std::mt19937_64& rng) {
    for (;;) {
        const SiteLaw w = random_law(rng, 0.03);
        if (ladderwalk::local_drift(w) > 0.15) return w;
    }
}

inline Environment random_explicit_env(std::mt19937_64& rng, long long lo, long long hi) {
    std::vector<SiteLaw> laws;
    for (long long i = lo; i <= hi; ++i) laws.push_back(random_law(rng));
    return Environment::explicit_range(lo, std::move(laws), random_law(rng));
}

// Exit law of the chain killed outside [a+1, b-1] by Gaussian elimination in
// long double; rows are starts, columns the absorbing sites a-1, a, b, b+1.
inline std::vector<std::array<long double, 4>> gauss_exit(const Environment& env, long long a, long long b) {
    const int n = static_cast<int>(b - a - 1);
    std::vector<std::vector<long double>> m(n, std::vector<long double>(n + 4, 0.0L));
    for (int r = 0; r < n; ++r) {
        const long long k = a + 1 + r;
        const SiteLaw w = env.law_at(k);
        m[r][r] = 1.0L;
        const int jumps[4] = {-2, -1, 1, 2};
        const double probs[4] = {w.q2, w.q1, w.p1, w.p2};
        for (int t = 0; t < 4; ++t) {
            const long long to = k + jumps[t];
            if (to > a && to < b) {
                m[r][static_cast<int>(to - a - 1)] -= probs[t];
            } else {
                const int col = to == a - 1 ? 0 : to == a ? 1 : to == b ? 2 : 3;
                m[r][n + col] += probs[t];
            }
        }
    }
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
        std::swap(m[c], m[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double f = m[r][c] / m[c][c];
            if (f == 0.0L) continue;
            for (int j = c; j < n + 4; ++j) m[r][j] -= f * m[c][j];
        }
    }
    std::vector<std::array<long double, 4>> out(n);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < 4; ++j) out[r][j] = m[r][n + j] / m[r][r];
    return out;
}

// Root in (-1, 0) of the characteristic cubic, from companion-matrix eigenvalues.
inline double companion_root(const SiteLaw& w) {
    Eigen::Matrix3d c;
    c << -(w.q1 + w.q2) / w.q2, (w.p1 + w.p2) / w.q2, w.p2 / w.q2, 1, 0, 0, 0, 1, 0;
    const Eigen::Vector3cd ev = c.eigenvalues();
    double best = 1.0;
    for (int k = 0; k < 3; ++k)
        if (std::abs(ev[k].imag()) < 1e-9 && ev[k].real() > -1.0 && ev[k].real() <= 0.0) best = ev[k].real();
    return best;
}

// Calls fn(tally) for every tally an offspring law can charge with at most
// n_max core children (the first two A and B coordinates), times each
// admissible pattern of the unit coordinates.
template <class Fn>
void for_each_offspring_tally(int n_max, Fn&& fn) {
    static const std::array<std::array<long long, 5>, 10> extras = {{{0, 0, 0, 0, 0},
                                                                     {1, 0, 0, 0, 0},
                                                                     {0, 1, 0, 0, 0},
                                                                     {0, 0, 1, 0, 0},
                                                                     {0, 0, 0, 1, 0},
                                                                     {0, 0, 0, 0, 1},
                                                                     {1, 0, 1, 0, 0},
                                                                     {1, 0, 0, 1, 0},
                                                                     {0, 1, 1, 0, 0},
                                                                     {0, 1, 0, 1, 0}}};
    for (long long a = 0; a <= n_max; ++a)
        for (long long b = 0; a + b <= n_max; ++b)
            for (long long c = 0; a + b + c <= n_max; ++c)
                for (long long d = 0; a + b + c + d <= n_max; ++d)
                    for (const auto& e : extras) fn(ladderwalk::Tally{a, b, e[0], c, d, e[1], e[2], e[3], e[4]});
}

// Core-children count beyond which the geometric tail is below 1e-13.
inline int offspring_truncation(const ladderwalk::ExcursionIndices& ind) {
    const double go = ind.alpha[0] + ind.alpha[1] + ind.beta[0] + ind.beta[1];
    return static_cast<int>(std::ceil(std::log(1e-13) / std::log(go))) + 2;
}

}  // namespace fixtures
