#include "ladderwalk/decomposer.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "ladderwalk/errors.hpp"

namespace ladderwalk {

namespace {

// Column of a closed excursion in the tally: type offset + sub-type.
int tally_index(char type, int subtype) {
    const int base = type == 'A' ? 0 : type == 'B' ? 3 : 6;
    return base + subtype - 1;
}

constexpr long long kTallyWeights[9] = {2, 2, 1, 1, 1, 0, 2, 2, 1};

}  // namespace

Tally Decomposition::tally(long long level) const {
    if (level > 0) return Tally{};
    const auto k = static_cast<std::size_t>(-level);
    return k < tallies.size() ? tallies[k] : Tally{};
}

Tally Decomposition::immigration_tally() const {
    Tally t{};
    if (immigration >= 1 && immigration <= 3) t[immigration - 1] = 1;
    return t;
}

ExcursionTracker::ExcursionTracker() { reset(); }

void ExcursionTracker::reset() {
    open_.assign(2, None);
    tallies_.clear();
    position_ = 0;
    steps_ = 0;
    immigration_ = 0;
    open_at(1) = OpenA;  // virtual step 1 -> 0
}

char& ExcursionTracker::open_at(long long level) {
    const auto k = static_cast<std::size_t>(1 - level);
    if (k >= open_.size()) open_.resize(std::max(k + 1, open_.size() * 2), None);
    return open_[k];
}

void ExcursionTracker::open(long long level, char type) {
    if (level > 0) throw MalformedPath("down-step from above 0 before the ladder time");
    char& slot = open_at(level);
    if (slot != None) {
        std::ostringstream os;
        os << "second excursion opened at level " << level << " before the first closed";
        throw MalformedPath(os.str());
    }
    slot = type;
}

void ExcursionTracker::close(long long level, int subtype) {
    if (level > 1) return;  // nothing is ever opened above the immigration level
    char& slot = open_at(level);
    if (slot == None) return;
    if (level == 1) {
        immigration_ = subtype;
    } else if (level <= 0) {
        const auto k = static_cast<std::size_t>(-level);
        if (k >= tallies_.size()) tallies_.resize(k + 1, Tally{});
        ++tallies_[k][tally_index(slot, subtype)];
    }
    slot = None;
}

void ExcursionTracker::step(long long from, long long to) {
    if (from != position_) throw MalformedPath("step does not start at the current position");
    if (finished()) throw MalformedPath("step after the ladder time");
    const long long d = to - from;
    switch (d) {
        case -1:
            open(from, OpenA);
            break;
        case -2:
            open(from, OpenB);
            open(from - 1, OpenC);
            break;
        case 1:
            close(to, 1);
            break;
        case 2:
            // closes the level jumped over and the landing level
            close(to - 1, 3);
            close(to, 2);
            break;
        default: {
            std::ostringstream os;
            os << "increment " << d << " from " << from << " is not a jump of size 1 or 2";
            throw MalformedPath(os.str());
        }
    }
    position_ = to;
    ++steps_;
}

Decomposition ExcursionTracker::result() const {
    Decomposition d;
    d.t1 = steps_;
    d.immigration = immigration_;
    d.tallies = tallies_;
    return d;
}

Decomposition decompose(const WalkPath& path) {
    if (path.positions.empty() || path.positions.front() != 0) throw MalformedPath("path must start at 0");
    ExcursionTracker tracker;
    for (std::size_t n = 1; n < path.positions.size(); ++n) {
        if (tracker.finished()) throw MalformedPath("path continues after first exceeding 0");
        tracker.step(path.positions[n - 1], path.positions[n]);
    }
    if (!tracker.finished()) throw MalformedPath("path never exceeds 0");
    return tracker.result();
}

IdentityReport verify_identity(const Decomposition& d, const WalkPath& path) {
    IdentityReport rep;
    rep.t1 = static_cast<long long>(path.positions.size()) - 1;

    // Direct counts from the path for levels <= 0.
    std::map<long long, std::array<long long, 3>> direct;  // level -> (D, V1, V2)
    for (std::size_t n = 1; n < path.positions.size(); ++n) {
        const long long from = path.positions[n - 1], to = path.positions[n];
        const long long jump = to - from;
        if (jump < 0) {
            const long long level = to + 1;  // landing at level - 1 from level or level + 1
            if (level <= 0) ++direct[level][0];
        } else if (to <= 0) {
            ++direct[to][jump == 1 ? 1 : 2];
        }
    }

    long long weighted = 1, dv = 1;
    const long long lowest = std::min(d.lowest_level(), direct.empty() ? 0 : direct.begin()->first);
    for (long long level = 0; level >= lowest; --level) {
        const Tally u = d.tally(level);
        for (int j = 0; j < 9; ++j) weighted += u[j] * kTallyWeights[j];
        const long long dd = u[0] + u[1] + u[2] + u[6] + u[7] + u[8];
        const long long v1 = u[0] + u[3] + u[6];
        const long long v2 = u[1] + u[4] + u[7];
        dv += dd + v1 + v2;
        const auto it = direct.find(level);
        const std::array<long long, 3> want = it == direct.end() ? std::array<long long, 3>{} : it->second;
        if (!rep.first_bad_level && (dd != want[0] || v1 != want[1] || v2 != want[2])) {
            rep.first_bad_level = level;
            std::ostringstream os;
            os << "level " << level << ": tallies give D=" << dd << " V1=" << v1 << " V2=" << v2
               << ", path gives D=" << want[0] << " V1=" << want[1] << " V2=" << want[2];
            rep.detail = os.str();
        }
    }
    rep.weighted_sum = weighted;
    rep.dv_sum = dv;
    const Tally imm = d.immigration_tally();
    const bool immigration_ok = imm[0] + imm[1] + imm[2] == 1;
    rep.ok = !rep.first_bad_level && weighted == rep.t1 && dv == rep.t1 && d.t1 == rep.t1 && immigration_ok;
    if (!rep.ok && rep.detail.empty()) {
        std::ostringstream os;
        os << "T1=" << rep.t1 << " but weighted sum=" << weighted << ", D/V sum=" << dv
           << (immigration_ok ? "" : ", immigration is not a unit vector");
        rep.detail = os.str();
    }
    return rep;
}

}  // namespace ladderwalk
