#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <unordered_map>

#include "ladderwalk/environment.hpp"
#include "ladderwalk/hitting.hpp"

namespace ladderwalk {

using Vec9 = std::array<double, 9>;
using Mat9 = std::array<Vec9, 9>;
// Excursion counts in the order A1 A2 A3 B1 B2 B3 C1 C2 C3.
using Tally = std::array<long long, 9>;

// Time contributed by each excursion type to the ladder time.
inline constexpr Vec9 kTimeWeights = {2, 2, 1, 1, 1, 0, 2, 2, 1};

// Type codes 1..9 follow the tally order.
enum ParentType : int { A1 = 1, A2, A3, B1, B2, B3, C1, C2, C3 };

struct ExcursionIndices {
    long long level = 0;
    std::array<double, 3> alpha{};  // sums to the jump(-1) mass at level
    std::array<double, 3> beta{};   // sums to the jump(-2) mass at level
    std::array<double, 3> gamma{};  // sums to the jump(-2) mass at level + 1
};

struct OffspringScalars {
    long long level = 0;
    double x = 0, y = 0, z = 0, w = 0;
    double s = 0, t = 0, v = 0;
};

struct MeanMatrix {
    long long level = 0;
    Mat9 q{};
};

struct ImmigrationLaw {
    std::array<double, 3> pi{};  // U_1 = e1, e2, e3
};

struct HittingOptions {
    double tol = 1e-12;
    long long max_depth = kDefaultMaxDepth;
};

ExcursionIndices excursion_indices(const Environment& env, long long i, const HittingOptions& opt = {});

// beta2_next is the beta_2 index of level i + 1.
OffspringScalars offspring_scalars(const ExcursionIndices& indices, double beta2_next);

// Probability that a parent of the given type at level i+1 leaves `child` at level i.
double offspring_pmf(int parent_type, const Tally& child, const ExcursionIndices& indices,
                     const OffspringScalars& scalars);

Tally offspring_sample(int parent_type, const ExcursionIndices& indices, const OffspringScalars& scalars,
                       std::mt19937_64& rng);

MeanMatrix mean_matrix(const OffspringScalars& scalars);

// From the indices at level 1.
ImmigrationLaw immigration_law(const ExcursionIndices& level_one);

// Memoized per-level branching data of one environment. Periodic and
// homogeneous environments share entries across levels of equal phase.
// Not thread-safe; give each worker its own model.
class BranchingModel {
public:
    explicit BranchingModel(Environment env, HittingOptions opt = {});

    const Environment& environment() const { return env_; }
    const ExcursionIndices& indices(long long i);
    const OffspringScalars& scalars(long long i);
    const MeanMatrix& mean(long long i);
    ImmigrationLaw immigration();
    // (pi_1, pi_2, pi_3, 0, ..., 0)
    Vec9 immigration_vector();

private:
    long long key(long long i) const;
    Environment env_;
    HittingOptions opt_;
    std::unordered_map<long long, ExcursionIndices> indices_;
    std::unordered_map<long long, OffspringScalars> scalars_;
    std::unordered_map<long long, MeanMatrix> means_;
};

Vec9 row_times(const Vec9& row, const Mat9& m);
Vec9 times_column(const Mat9& m, const Vec9& col);
double dot(const Vec9& a, const Vec9& b);

// E[U_i] = u1 Q_0 Q_{-1} ... Q_i for i <= 0.
Vec9 expected_tally(BranchingModel& model, long long i);
Vec9 expected_tally(const Environment& env, long long i, const HittingOptions& opt = {});

struct T1Result {
    double value = 0.0;
    long long levels = 0;
    bool converged = false;
};

inline constexpr long long kDefaultMaxLevels = 100000;
// Consecutive non-decreasing series terms that count as divergence.
inline constexpr int kDivergenceRun = 50;

T1Result expected_t1(BranchingModel& model, double tol = 1e-12, long long max_levels = kDefaultMaxLevels);
T1Result expected_t1(const Environment& env, double tol = 1e-12, long long max_levels = kDefaultMaxLevels,
                     const HittingOptions& opt = {});

}  // namespace ladderwalk
