#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ladderwalk/branching.hpp"
#include "ladderwalk/simulator.hpp"

namespace ladderwalk {

struct Decomposition {
    long long t1 = 0;
    int immigration = 0;         // sub-type 1..3 of the excursion at level 1
    std::vector<Tally> tallies;  // tallies[k] belongs to level -k

    Tally tally(long long level) const;
    Tally immigration_tally() const;  // U_1 as a unit vector
    long long lowest_level() const { return 1 - static_cast<long long>(tallies.size()); }
};

// Incremental excursion classifier fed one step at a time. The virtual step
// 1 -> 0 is applied on construction.
class ExcursionTracker {
public:
    ExcursionTracker();
    void reset();
    // Throws MalformedPath for an increment outside {-2, -1, 1, 2} or a step
    // that does not start where the previous one ended.
    void step(long long from, long long to);
    bool finished() const { return immigration_ != 0; }
    Decomposition result() const;
    const std::vector<Tally>& tallies() const { return tallies_; }
    int immigration() const { return immigration_; }
    long long steps() const { return steps_; }

private:
    enum : char { None = 0, OpenA = 'A', OpenB = 'B', OpenC = 'C' };
    char& open_at(long long level);
    void open(long long level, char type);
    void close(long long level, int subtype);

    std::vector<char> open_;     // open_[1 - level] for level <= 1
    std::vector<Tally> tallies_;  // tallies_[-level] for level <= 0
    long long position_ = 0;
    long long steps_ = 0;
    int immigration_ = 0;
};

Decomposition decompose(const WalkPath& path);

struct IdentityReport {
    bool ok = false;
    long long t1 = 0;
    long long weighted_sum = 0;  // 1 + sum_i U_i . weights
    long long dv_sum = 0;        // 1 + sum_i (D_i + V_i1 + V_i2)
    std::optional<long long> first_bad_level;
    std::string detail;
};

IdentityReport verify_identity(const Decomposition& d, const WalkPath& path);

}  // namespace ladderwalk
