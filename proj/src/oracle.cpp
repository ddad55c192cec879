#include "ladderwalk/oracle.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "ladderwalk/errors.hpp"

namespace ladderwalk {

namespace {

constexpr double kResidualTol = 1e-9;
constexpr double kConditionFloor = 1e-14;
constexpr int kJumps[4] = {-2, -1, 1, 2};

// I - P restricted to the interior, and the one-step absorption mass onto each
// absorbing site (columns: a-1, a, b, b+1).
struct AbsorbingSystem {
    long long a, b;
    Eigen::MatrixXd lhs;
    Eigen::MatrixXd absorb;

    AbsorbingSystem(const Environment& env, long long a_, long long b_) : a(a_), b(b_) {
        if (b < a + 2) throw std::invalid_argument("interval needs a + 2 <= b");
        const long long n = b - a - 1;
        lhs = Eigen::MatrixXd::Identity(n, n);
        absorb = Eigen::MatrixXd::Zero(n, 4);
        for (long long k = a + 1; k <= b - 1; ++k) {
            const SiteLaw w = env.law_at(k);
            w.validate();
            const long long row = k - a - 1;
            for (int jump : kJumps) {
                const long long to = k + jump;
                const double p = w.prob(jump);
                if (to > a && to < b) lhs(row, to - a - 1) -= p;
                else absorb(row, column(to)) += p;
            }
        }
    }

    int column(long long site) const {
        if (site == a - 1) return 0;
        if (site == a) return 1;
        if (site == b) return 2;
        if (site == b + 1) return 3;
        throw std::invalid_argument("target must be one of a-1, a, b, b+1");
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
        // A closed class inside the interval makes I - P singular even when
        // the right-hand side is consistent, so the residual alone misses it.
        // The rcond estimate can miss an exact zero pivot; check U directly.
        const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
        const double pivot_ratio = pivots.size() ? pivots.minCoeff() / pivots.maxCoeff() : 1.0;
        const double rcond = std::min(lu.rcond(), pivot_ratio);
        if (!(rcond > kConditionFloor)) {
            std::ostringstream os;
            os << "absorbing-chain system on [" << a + 1 << ", " << b - 1 << "] is singular (rcond " << rcond << ")";
            throw SingularSystem(os.str());
        }
        Eigen::VectorXd x = lu.solve(rhs);
        const double residual = (lhs * x - rhs).lpNorm<Eigen::Infinity>();
        if (!(residual <= kResidualTol) || !x.allFinite()) {
            std::ostringstream os;
            os << "absorbing-chain system on [" << a + 1 << ", " << b - 1 << "] is singular (residual "
               << residual << ")";
            throw SingularSystem(os.str());
        }
        return x;
    }

    long long index(long long start) const {
        if (start <= a || start >= b) throw std::invalid_argument("start must lie in [a+1, b-1]");
        return start - a - 1;
    }
};

}  // namespace

double solve_exit(const Environment& env, long long a, long long b, long long start, long long target) {
    AbsorbingSystem sys(env, a, b);
    const long long row = sys.index(start);
    const Eigen::VectorXd p = sys.solve(sys.absorb.col(sys.column(target)));
    return p(row);
}

double solve_expected_exit_time(const Environment& env, long long a, long long b, long long start) {
    AbsorbingSystem sys(env, a, b);
    const long long row = sys.index(start);
    const Eigen::VectorXd t = sys.solve(Eigen::VectorXd::Ones(sys.lhs.rows()));
    return t(row);
}

double solve_exit_time_on_target(const Environment& env, long long a, long long b, long long start,
                                 long long target) {
    AbsorbingSystem sys(env, a, b);
    const long long row = sys.index(start);
    const Eigen::VectorXd p = sys.solve(sys.absorb.col(sys.column(target)));
    // E[T; Z] accumulates the exit probability over every visited interior site.
    const Eigen::VectorXd g = sys.solve(p);
    return g(row);
}

}  // namespace ladderwalk
