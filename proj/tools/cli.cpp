#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ladderwalk/branching.hpp"
#include "ladderwalk/decomposer.hpp"
#include "ladderwalk/errors.hpp"
#include "ladderwalk/hitting.hpp"
#include "ladderwalk/io.hpp"
#include "ladderwalk/oracle.hpp"
#include "ladderwalk/parallel.hpp"
#include "ladderwalk/rwre.hpp"
#include "ladderwalk/simulator.hpp"

namespace ladderwalk::cli {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rounds through the 12-digit text form so JSON carries the same digits as CSV.
json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return std::strtod(format_number(x).c_str(), nullptr);
}

std::string cell(double x) { return format_number(x); }
std::string cell(long long x) { return std::to_string(x); }
std::string cell(int x) { return std::to_string(x); }
std::string cell(bool x) { return x ? "true" : "false"; }
std::string cell(const std::string& s) { return s; }

template <class... T>
void csv_line(std::ostream& out, const T&... v) {
    bool first = true;
    ((out << (first ? "" : ",") << cell(v), first = false), ...);
    out << "\n";
}

void csv_header(std::ostream& out, const std::vector<std::string>& names) {
    for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
    out << "\n";
}

const std::array<const char*, 9> kTypeNames = {"A1", "A2", "A3", "B1", "B2", "B3", "C1", "C2", "C3"};

// Options shared by most subcommands.
struct Common {
    std::string env_file;
    std::string law;
    bool json = false;
    bool csv = false;
    int workers = 1;
    bool json_default = false;

    void add_env(CLI::App* app) {
        auto* e = app->add_option("--env", env_file, "environment JSON file");
        auto* l = app->add_option("--law", law, "inline homogeneous law q2,q1,p1,p2");
        e->excludes(l);
    }
    void add_format(CLI::App* app, bool default_json) {
        json_default = default_json;
        auto* j = app->add_flag("--json", json, "JSON output");
        auto* c = app->add_flag("--csv", csv, "CSV output");
        j->excludes(c);
    }
    void add_workers(CLI::App* app) {
        app->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 1024));
    }
    bool use_json() const { return json || (json_default && !csv); }

    int effective_workers() const {
        const char* v = std::getenv("LADDERWALK_WORKERS");
        if (!v || !*v) return workers;
        char* end = nullptr;
        const long w = std::strtol(v, &end, 10);
        if (*end != '\0' || w < 1 || w > 1024) throw UsageError("LADDERWALK_WORKERS must be an integer in [1, 1024]");
        return static_cast<int>(w);
    }
};

SiteLaw parse_inline_law(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0') throw UsageError("--law expects four comma-separated numbers");
        v.push_back(x);
    }
    if (v.size() != 4) throw UsageError("--law expects four comma-separated numbers");
    try {
        return SiteLaw::make(v[0], v[1], v[2], v[3]);
    } catch (const InvalidLaw& e) {
        throw UsageError(e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw UsageError("'" + path + "': " + e.what());
    }
}

Environment resolve_env(const Common& c) {
    if (c.env_file.empty() == c.law.empty()) throw UsageError("give exactly one of --env or --law");
    if (!c.law.empty()) return Environment::homogeneous(parse_inline_law(c.law));
    try {
        return environment_from_json(read_json_file(c.env_file));
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
}

json law_json(const SiteLaw& w) { return json{{"q2", num(w.q2)}, {"q1", num(w.q1)}, {"p1", num(w.p1)}, {"p2", num(w.p2)}}; }

// ---- subcommands ----

struct ExitCmd {
    Common c;
    long long a = 0, b = 0;
    std::string method = "recursive";
    int run(std::ostream& out) {
        const Environment env = resolve_env(c);
        const ExitMethod m = method == "transfer" ? ExitMethod::TransferMatrix : ExitMethod::Recursive;
        const ExitProbTable t = exit_probabilities(env, a, b, m);
        json rows = json::array();
        if (!c.use_json()) csv_header(out, {"start", "target", "probability", "depth", "converged"});
        for (long long k = a + 1; k <= b - 1; ++k) {
            for (long long target : {b, b + 1}) {
                const double p = t.at(k, target);
                if (c.use_json())
                    rows.push_back({{"start", k}, {"target", target}, {"probability", num(p)}, {"depth", b - a},
                                    {"converged", true}});
                else
                    csv_line(out, k, target, p, b - a, true);
            }
        }
        if (c.use_json()) out << json{{"a", a}, {"b", b}, {"monotone", t.monotone}, {"rows", rows}}.dump(2) << "\n";
        return kOk;
    }
};

struct HitCmd {
    Common c;
    long long k = 0, i = 0;
    double tol = 1e-12;
    long long max_depth = kDefaultMaxDepth;
    int run(std::ostream& out) {
        const Environment env = resolve_env(c);
        const HitProfile h = hit_from_below(env, k, i, tol, max_depth);
        if (c.use_json()) {
            json rows = json::array();
            rows.push_back({{"start", k}, {"target", i + 1}, {"probability", num(h.f1)}, {"depth", h.depth},
                            {"converged", h.converged}});
            rows.push_back({{"start", k}, {"target", i + 2}, {"probability", num(h.f2)}, {"depth", h.depth},
                            {"converged", h.converged}});
            out << json{{"rows", rows}}.dump(2) << "\n";
        } else {
            csv_header(out, {"start", "target", "probability", "depth", "converged"});
            csv_line(out, k, i + 1, h.f1, h.depth, h.converged);
            csv_line(out, k, i + 2, h.f2, h.depth, h.converged);
        }
        return kOk;
    }
};

struct OracleExitCmd {
    Common c;
    long long a = 0, b = 0;
    std::vector<long long> starts;
    int run(std::ostream& out) {
        const Environment env = resolve_env(c);
        if (b - a < 2) throw UsageError("need b - a >= 2");
        std::vector<long long> ks = starts;
        if (ks.empty())
            for (long long k = a + 1; k <= b - 1; ++k) ks.push_back(k);
        json rows = json::array();
        if (!c.use_json()) csv_header(out, {"start", "target", "probability"});
        for (long long k : ks) {
            for (long long target : {a - 1, a, b, b + 1}) {
                const double p = solve_exit(env, a, b, k, target);
                if (c.use_json())
                    rows.push_back({{"start", k}, {"target", target}, {"probability", num(p)}});
                else
                    csv_line(out, k, target, p);
            }
        }
        if (c.use_json()) out << json{{"a", a}, {"b", b}, {"rows", rows}}.dump(2) << "\n";
        return kOk;
    }
};

struct OracleTimeCmd {
    Common c;
    long long a = 0, b = 0;
    std::vector<long long> starts;
    int run(std::ostream& out) {
        const Environment env = resolve_env(c);
        if (b - a < 2) throw UsageError("need b - a >= 2");
        std::vector<long long> ks = starts;
        if (ks.empty())
            for (long long k = a + 1; k <= b - 1; ++k) ks.push_back(k);
        json rows = json::array();
        if (!c.use_json()) csv_header(out, {"start", "expected_time", "time_on_b", "time_on_b1"});
        for (long long k : ks) {
            const double t = solve_expected_exit_time(env, a, b, k);
            const double tb = solve_exit_time_on_target(env, a, b, k, b);
            const double tb1 = solve_exit_time_on_target(env, a, b, k, b + 1);
            if (c.use_json())
                rows.push_back({{"start", k}, {"expected_time", num(t)}, {"time_on_b", num(tb)}, {"time_on_b1", num(tb1)}});
            else
                csv_line(out, k, t, tb, tb1);
        }
        if (c.use_json()) out << json{{"a", a}, {"b", b}, {"rows", rows}}.dump(2) << "\n";
        return kOk;
    }
};

struct T1Cmd {
    Common c;
    double tol = 1e-12;
    long long max_levels = kDefaultMaxLevels;
    int run(std::ostream& out, std::ostream& err) {
        const Environment env = resolve_env(c);
        const T1Result r = expected_t1(env, tol, max_levels);
        if (!r.converged) err << "warning: series truncated at " << r.levels << " levels\n";
        if (c.use_json()) {
            out << json{{"expected_t1", num(r.value)}, {"levels", r.levels}, {"converged", r.converged}}.dump(2) << "\n";
        } else {
            csv_header(out, {"expected_t1", "levels", "converged"});
            csv_line(out, r.value, r.levels, r.converged);
        }
        return r.converged ? kOk : kComputationError;
    }
};

struct MeanMatrixCmd {
    Common c;
    long long level = 0;
    int run(std::ostream& out) {
        BranchingModel model(resolve_env(c));
        const MeanMatrix& m = model.mean(level);
        if (c.use_json()) {
            json rows = json::array();
            for (const Vec9& r : m.q) {
                json row = json::array();
                for (double x : r) row.push_back(num(x));
                rows.push_back(row);
            }
            json labels = json::array();
            for (const char* n : kTypeNames) labels.push_back(n);
            out << json{{"level", level}, {"types", labels}, {"rows", rows}}.dump(2) << "\n";
        } else {
            std::vector<std::string> h = {"level", "parent"};
            for (const char* n : kTypeNames) h.emplace_back(n);
            csv_header(out, h);
            for (int r = 0; r < 9; ++r) {
                out << level << "," << kTypeNames[r];
                for (double x : m.q[r]) out << "," << cell(x);
                out << "\n";
            }
        }
        return kOk;
    }
};

struct SimulateCmd {
    Common c;
    long long replicas = 1000;
    std::uint64_t seed = 0;
    long long horizon = -1;
    long long step_cap = kDefaultStepCap;
    std::string dump_paths;
    int run(std::ostream& out, std::ostream& err) {
        const Environment env = resolve_env(c);
        if (horizon >= 0) {
            const HorizonResult h = run_horizon(env, seed, horizon);
            if (c.use_json()) {
                out << json{{"n_steps", h.n_steps},
                            {"final_position", h.final_position},
                            {"empirical_drift", num(h.empirical_drift)},
                            {"min_position", h.min_position},
                            {"max_position", h.max_position}}
                           .dump(2)
                    << "\n";
            } else {
                csv_header(out, {"n_steps", "final_position", "empirical_drift", "min_position", "max_position"});
                csv_line(out, h.n_steps, h.final_position, h.empirical_drift, h.min_position, h.max_position);
            }
            return kOk;
        }
        const EnsembleStats s = run_ensemble(env, seed, replicas, c.effective_workers(), step_cap);
        if (s.bias_warning) err << "warning: " << s.abandoned << " replicas hit the step cap; moments are biased\n";
        if (!dump_paths.empty()) {
            std::ofstream f(dump_paths);
            if (!f) throw UsageError("cannot write '" + dump_paths + "'");
            for (long long r = 0; r < replicas; ++r) {
                WalkPath p;
                try {
                    p = run_to_ladder(env, replica_seed(seed, static_cast<std::uint64_t>(r)), step_cap);
                } catch (const CapReached& e) {
                    p = e.path;
                }
                for (std::size_t n = 0; n < p.positions.size(); ++n) f << (n ? " " : "") << p.positions[n];
                f << "\n";
            }
        }
        if (c.use_json()) {
            out << json{{"replicas", s.replicas},     {"stopped", s.stopped},     {"abandoned", s.abandoned},
                        {"mean_t1", num(s.mean_t1)},  {"se_t1", num(s.se_t1)},    {"var_t1", num(s.var_t1)},
                        {"mean_x", num(s.mean_x)},    {"se_x", num(s.se_x)},      {"var_x", num(s.var_x)},
                        {"x1_count", s.x_hist[0]},    {"x2_count", s.x_hist[1]},  {"bias_warning", s.bias_warning}}
                       .dump(2)
                << "\n";
        } else {
            csv_header(out, {"replicas", "stopped", "abandoned", "mean_t1", "se_t1", "var_t1", "mean_x", "se_x", "var_x",
                             "x1_count", "x2_count", "bias_warning"});
            csv_line(out, s.replicas, s.stopped, s.abandoned, s.mean_t1, s.se_t1, s.var_t1, s.mean_x, s.se_x, s.var_x,
                     s.x_hist[0], s.x_hist[1], s.bias_warning);
        }
        return kOk;
    }
};

struct DecomposeCmd {
    Common c;
    long long replicas = 1;
    std::uint64_t seed = 0;
    long long step_cap = kDefaultStepCap;
    bool fail_fast = false;

    struct Partial {
        std::vector<Tally> tallies;  // index -level
        std::array<long long, 3> immigration{};
        long long paths = 0, abandoned = 0, failures = 0;
        long long first_failure = -1;
        std::string first_detail;
        long long t1_sum = 0;
    };

    int run(std::ostream& out, std::ostream& err) {
        const Environment env = resolve_env(c);
        if (replicas < 1) throw UsageError("--replicas must be >= 1");
        constexpr long long kChunk = 256;
        const long long chunks = (replicas + kChunk - 1) / kChunk;
        std::vector<Partial> parts(static_cast<std::size_t>(chunks));
        std::atomic<long long> stop_at{std::numeric_limits<long long>::max()};
        parallel_chunks(replicas, kChunk, c.effective_workers(), [&](long long ci, long long begin, long long end) {
            Partial& p = parts[static_cast<std::size_t>(ci)];
            if (fail_fast && begin > stop_at.load()) return;
            for (long long r = begin; r < end; ++r) {
                WalkPath path;
                try {
                    path = run_to_ladder(env, replica_seed(seed, static_cast<std::uint64_t>(r)), step_cap);
                } catch (const CapReached&) {
                    ++p.abandoned;
                    continue;
                }
                const Decomposition d = decompose(path);
                const IdentityReport rep = verify_identity(d, path);
                ++p.paths;
                p.t1_sum += d.t1;
                if (!rep.ok) {
                    ++p.failures;
                    if (p.first_failure < 0) {
                        p.first_failure = r;
                        p.first_detail = rep.detail;
                    }
                    if (fail_fast) {
                        long long cur = stop_at.load();
                        while (r < cur && !stop_at.compare_exchange_weak(cur, r)) {
                        }
                        return;
                    }
                }
                if (d.tallies.size() > p.tallies.size()) p.tallies.resize(d.tallies.size(), Tally{});
                for (std::size_t k = 0; k < d.tallies.size(); ++k)
                    for (int j = 0; j < 9; ++j) p.tallies[k][j] += d.tallies[k][j];
                ++p.immigration[d.immigration - 1];
            }
        });

        Partial total;
        for (const Partial& p : parts) {
            if (p.first_failure >= 0 && total.first_failure < 0) {
                total.first_failure = p.first_failure;
                total.first_detail = p.first_detail;
            }
            total.paths += p.paths;
            total.abandoned += p.abandoned;
            total.failures += p.failures;
            total.t1_sum += p.t1_sum;
            if (p.tallies.size() > total.tallies.size()) total.tallies.resize(p.tallies.size(), Tally{});
            for (std::size_t k = 0; k < p.tallies.size(); ++k)
                for (int j = 0; j < 9; ++j) total.tallies[k][j] += p.tallies[k][j];
            for (int j = 0; j < 3; ++j) total.immigration[j] += p.immigration[j];
        }

        if (fail_fast && total.first_failure >= 0) {
            err << "identity violated on replica " << total.first_failure << ": " << total.first_detail << "\n";
            return kComputationError;
        }
        if (total.abandoned > 0) err << "warning: " << total.abandoned << " replicas hit the step cap and were skipped\n";

        const double mean_t1 = total.paths ? static_cast<double>(total.t1_sum) / static_cast<double>(total.paths) : 0.0;
        if (c.use_json()) {
            json levels = json::array();
            levels.push_back({{"level", 1},
                              {"tally", {total.immigration[0], total.immigration[1], total.immigration[2], 0, 0, 0, 0, 0, 0}}});
            for (std::size_t k = 0; k < total.tallies.size(); ++k)
                levels.push_back({{"level", -static_cast<long long>(k)}, {"tally", total.tallies[k]}});
            json j{{"paths", total.paths},         {"abandoned", total.abandoned}, {"identity_failures", total.failures},
                   {"mean_t1", num(mean_t1)},      {"levels", levels}};
            if (total.first_failure >= 0) j["first_failure"] = {{"replica", total.first_failure}, {"detail", total.first_detail}};
            out << j.dump(2) << "\n";
        } else {
            std::vector<std::string> h = {"level"};
            for (const char* n : kTypeNames) h.emplace_back(n);
            csv_header(out, h);
            csv_line(out, 1, total.immigration[0], total.immigration[1], total.immigration[2], 0, 0, 0, 0, 0, 0);
            for (std::size_t k = 0; k < total.tallies.size(); ++k) {
                out << -static_cast<long long>(k);
                for (long long x : total.tallies[k]) out << "," << x;
                out << "\n";
            }
            out << "\n";
            csv_header(out, {"paths", "abandoned", "identity_failures", "mean_t1"});
            csv_line(out, total.paths, total.abandoned, total.failures, mean_t1);
        }
        if (total.failures > 0) {
            err << "identity violated on " << total.failures << " paths; first at replica " << total.first_failure << ": "
                << total.first_detail << "\n";
            return kComputationError;
        }
        return kOk;
    }
};

struct VelocityCmd {
    Common c;
    std::string env_law_file;
    long long samples = 100;
    double tol = 1e-12;
    std::uint64_t seed = 0;
    std::string factor = "drift";
    long long max_levels = kDefaultMaxLevels;
    int run(std::ostream& out, std::ostream& err) {
        EnvLaw law;
        if (env_law_file.empty() == c.law.empty()) throw UsageError("give exactly one of --env-law or --law");
        if (!c.law.empty()) {
            law = EnvLaw::point_mass(parse_inline_law(c.law));
        } else {
            try {
                law = env_law_from_json(read_json_file(env_law_file));
            } catch (const ParseError& e) {
                throw UsageError(e.what());
            }
        }
        const VelocityReport r = velocity(law, samples, tol, seed, c.effective_workers(), max_levels);
        if (r.divergent > 0)
            err << "warning: " << r.divergent << " of " << r.samples << " environment samples did not converge\n";
        const bool drift = factor == "drift";
        const double v = drift ? r.velocity_drift : r.velocity_abs;
        const double vse = drift ? r.velocity_drift_se : r.velocity_abs_se;
        const double divergent_fraction = static_cast<double>(r.divergent) / static_cast<double>(r.samples);
        if (c.use_json()) {
            out << json{{"factor", factor},
                        {"velocity", num(v)},
                        {"velocity_se", num(vse)},
                        {"drift_factor", {{"velocity", num(r.velocity_drift)}, {"velocity_se", num(r.velocity_drift_se)},
                                          {"numerator", num(r.numerator_drift)}, {"numerator_se", num(r.numerator_drift_se)}}},
                        {"abs_factor", {{"velocity", num(r.velocity_abs)}, {"velocity_se", num(r.velocity_abs_se)},
                                        {"numerator", num(r.numerator_abs)}, {"numerator_se", num(r.numerator_abs_se)}}},
                        {"denominator", num(r.denominator)},
                        {"denominator_se", num(r.denominator_se)},
                        {"samples", r.samples},
                        {"used", r.used},
                        {"divergent", r.divergent},
                        {"divergent_fraction", num(divergent_fraction)},
                        {"tol", num(tol)},
                        {"max_levels", max_levels}}
                       .dump(2)
                << "\n";
        } else {
            csv_header(out, {"factor", "velocity", "velocity_se", "velocity_drift", "velocity_drift_se", "velocity_abs",
                             "velocity_abs_se", "numerator_drift", "numerator_abs", "denominator", "denominator_se",
                             "samples", "used", "divergent"});
            csv_line(out, factor, v, vse, r.velocity_drift, r.velocity_drift_se, r.velocity_abs, r.velocity_abs_se,
                     r.numerator_drift, r.numerator_abs, r.denominator, r.denominator_se, r.samples, r.used, r.divergent);
        }
        return kOk;
    }
};

struct WaldCmd {
    Common c;
    std::string output;
    int run(std::ostream& out, std::ostream& err) {
        const std::vector<WaldRow> rows = wald_table();
        std::ofstream file;
        if (!output.empty()) {
            file.open(output);
            if (!file) throw UsageError("cannot write '" + output + "'");
        }
        std::ostream& o = output.empty() ? out : file;
        bool all_ok = true;
        if (c.use_json()) {
            json arr = json::array();
            for (const WaldRow& r : rows) {
                arr.push_back({{"row", r.row},
                               {"law", law_json(r.law)},
                               {"drift", num(r.drift)},
                               {"expected_t1", num(r.expected_t1)},
                               {"route_a", num(r.route_a)},
                               {"route_b", num(r.route_b)},
                               {"reference_a", num(r.reference_a)},
                               {"reference_b", num(r.reference_b)},
                               {"delta", num(r.delta)},
                               {"tolerance", num(r.tolerance)},
                               {"levels", r.levels},
                               {"converged", r.converged},
                               {"slow_convergence", r.slow},
                               {"ok", r.ok}});
            }
            o << json{{"rows", arr}}.dump(2) << "\n";
        } else {
            csv_header(o, {"row", "q2", "q1", "p1", "p2", "drift", "expected_t1", "route_a", "route_b", "reference_a",
                           "reference_b", "delta", "tolerance", "levels", "converged", "slow_convergence", "ok"});
            for (const WaldRow& r : rows)
                csv_line(o, r.row, r.law.q2, r.law.q1, r.law.p1, r.law.p2, r.drift, r.expected_t1, r.route_a, r.route_b,
                         r.reference_a, r.reference_b, r.delta, r.tolerance, r.levels, r.converged, r.slow, r.ok);
        }
        for (const WaldRow& r : rows) {
            if (!r.error.empty()) err << "row " << r.row << ": " << r.error << "\n";
            else if (!r.ok)
                err << "row " << r.row << ": |delta| = " << std::abs(r.delta) << " or reference mismatch exceeds "
                    << r.tolerance << "\n";
            if (r.slow) err << "row " << r.row << ": slow convergence (" << r.levels << " levels)\n";
            all_ok = all_ok && r.ok;
        }
        return all_ok ? kOk : kComputationError;
    }
};

int dispatch(CLI::App& app, std::ostream& out, std::ostream& err, int argc, const char* const* argv) {
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("ladderwalk ") + kVersion);

    ExitCmd exit_cmd;
    auto* s_exit = app.add_subcommand("exit", "exit probabilities of an interval");
    exit_cmd.c.add_env(s_exit);
    exit_cmd.c.add_format(s_exit, false);
    s_exit->add_option("--a", exit_cmd.a, "lower end")->required();
    s_exit->add_option("--b", exit_cmd.b, "upper end")->required();
    s_exit->add_option("--method", exit_cmd.method, "recursive | transfer")
        ->check(CLI::IsMember({"recursive", "transfer"}));

    HitCmd hit_cmd;
    auto* s_hit = app.add_subcommand("hit", "first-entrance probabilities from below");
    hit_cmd.c.add_env(s_hit);
    hit_cmd.c.add_format(s_hit, false);
    s_hit->add_option("--k", hit_cmd.k, "start site")->required();
    s_hit->add_option("--i", hit_cmd.i, "threshold")->required();
    s_hit->add_option("--tol", hit_cmd.tol, "convergence tolerance")->check(CLI::PositiveNumber);
    s_hit->add_option("--max-depth", hit_cmd.max_depth, "deepest interval")->check(CLI::PositiveNumber);

    OracleExitCmd oexit_cmd;
    auto* s_oexit = app.add_subcommand("oracle-exit", "exit probabilities by linear solve");
    oexit_cmd.c.add_env(s_oexit);
    oexit_cmd.c.add_format(s_oexit, false);
    s_oexit->add_option("--a", oexit_cmd.a, "lower end")->required();
    s_oexit->add_option("--b", oexit_cmd.b, "upper end")->required();
    s_oexit->add_option("--k", oexit_cmd.starts, "start site(s); default all");

    OracleTimeCmd otime_cmd;
    auto* s_otime = app.add_subcommand("oracle-time", "expected exit times by linear solve");
    otime_cmd.c.add_env(s_otime);
    otime_cmd.c.add_format(s_otime, false);
    s_otime->add_option("--a", otime_cmd.a, "lower end")->required();
    s_otime->add_option("--b", otime_cmd.b, "upper end")->required();
    s_otime->add_option("--k", otime_cmd.starts, "start site(s); default all");

    T1Cmd t1_cmd;
    auto* s_t1 = app.add_subcommand("t1", "expected ladder time from the branching series");
    t1_cmd.c.add_env(s_t1);
    t1_cmd.c.add_format(s_t1, false);
    s_t1->add_option("--tol", t1_cmd.tol, "term cutoff")->check(CLI::PositiveNumber);
    s_t1->add_option("--max-levels", t1_cmd.max_levels, "truncation")->check(CLI::PositiveNumber);

    MeanMatrixCmd mm_cmd;
    auto* s_mm = app.add_subcommand("mean-matrix", "offspring mean matrix at a level");
    mm_cmd.c.add_env(s_mm);
    mm_cmd.c.add_format(s_mm, true);
    s_mm->add_option("--level", mm_cmd.level, "level")->required();

    SimulateCmd sim_cmd;
    auto* s_sim = app.add_subcommand("simulate", "Monte Carlo ladder ensemble or long run");
    sim_cmd.c.add_env(s_sim);
    sim_cmd.c.add_format(s_sim, false);
    sim_cmd.c.add_workers(s_sim);
    s_sim->add_option("--replicas", sim_cmd.replicas, "replicas")->check(CLI::PositiveNumber);
    s_sim->add_option("--seed", sim_cmd.seed, "master seed");
    s_sim->add_option("--horizon", sim_cmd.horizon, "run a single walk for n steps instead")
        ->check(CLI::NonNegativeNumber);
    s_sim->add_option("--step-cap", sim_cmd.step_cap, "per-replica step cap")->check(CLI::PositiveNumber);
    s_sim->add_option("--dump-paths", sim_cmd.dump_paths, "write raw paths, one per line");

    DecomposeCmd dec_cmd;
    auto* s_dec = app.add_subcommand("decompose", "excursion tallies and the ladder-time identity");
    dec_cmd.c.add_env(s_dec);
    dec_cmd.c.add_format(s_dec, false);
    dec_cmd.c.add_workers(s_dec);
    s_dec->add_option("--replicas", dec_cmd.replicas, "paths")->check(CLI::PositiveNumber);
    s_dec->add_option("--seed", dec_cmd.seed, "master seed");
    s_dec->add_option("--step-cap", dec_cmd.step_cap, "per-path step cap")->check(CLI::PositiveNumber);
    s_dec->add_flag("--fail-fast", dec_cmd.fail_fast, "stop at the first identity violation");

    VelocityCmd vel_cmd;
    auto* s_vel = app.add_subcommand("velocity", "asymptotic speed under an environment law");
    s_vel->add_option("--env-law", vel_cmd.env_law_file, "environment-law JSON (homogeneous or iid)");
    s_vel->add_option("--law", vel_cmd.c.law, "inline point-mass law q2,q1,p1,p2");
    vel_cmd.c.add_format(s_vel, true);
    vel_cmd.c.add_workers(s_vel);
    s_vel->add_option("--samples", vel_cmd.samples, "environment draws")->check(CLI::PositiveNumber);
    s_vel->add_option("--tol", vel_cmd.tol, "series term cutoff")->check(CLI::PositiveNumber);
    s_vel->add_option("--seed", vel_cmd.seed, "seed");
    s_vel->add_option("--factor", vel_cmd.factor, "drift | abs")->check(CLI::IsMember({"drift", "abs"}));
    s_vel->add_option("--max-levels", vel_cmd.max_levels, "series truncation")->check(CLI::PositiveNumber);

    WaldCmd wald_cmd;
    auto* s_wald = app.add_subcommand("wald-table", "homogeneous consistency table");
    wald_cmd.c.add_format(s_wald, false);
    s_wald->add_option("--output", wald_cmd.output, "write the table to a file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (s_exit->parsed()) return exit_cmd.run(out);
        if (s_hit->parsed()) return hit_cmd.run(out);
        if (s_oexit->parsed()) return oexit_cmd.run(out);
        if (s_otime->parsed()) return otime_cmd.run(out);
        if (s_t1->parsed()) return t1_cmd.run(out, err);
        if (s_mm->parsed()) return mm_cmd.run(out);
        if (s_sim->parsed()) return sim_cmd.run(out, err);
        if (s_dec->parsed()) return dec_cmd.run(out, err);
        if (s_vel->parsed()) return vel_cmd.run(out, err);
        if (s_wald->parsed()) return wald_cmd.run(out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsageError;
    } catch (const NotConverged& e) {
        err << "error: " << e.what() << " (last depth " << e.depth << ", f = " << format_number(e.last[0]) << ", "
            << format_number(e.last[1]) << "; previous " << format_number(e.previous[0]) << ", "
            << format_number(e.previous[1]) << ")\n";
        return kComputationError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kComputationError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace

const std::array<WaldReference, 5>& wald_references() {
    static const std::array<WaldReference, 5> refs = {{
        {SiteLaw::make(0.0800, 0.3600, 0.2100, 0.3500), 1.467727692, 1.467727692, 1e-6},
        {SiteLaw::make(0.1900, 0.3000, 0.3000, 0.2100), 1.323718710, 1.323718710, 1e-6},
        {SiteLaw::make(0.3199, 0.1801, 0.1789, 0.3211), 1.481684406, 1.481684406, 1e-6},
        {SiteLaw::make(0.0001, 0.4999, 0.4998, 0.0002), 1.000399840, 1.000399840, 1e-6},
        {SiteLaw::make(0.1372, 0.3628, 0.3627, 0.1373), 1.226498171, 1.226490265, 1e-4},
    }};
    return refs;
}

std::vector<WaldRow> wald_table(double tol, long long max_levels) {
    std::vector<WaldRow> rows;
    int n = 0;
    for (const WaldReference& ref : wald_references()) {
        WaldRow r;
        r.row = ++n;
        r.law = ref.law;
        r.reference_a = ref.reference_a;
        r.reference_b = ref.reference_b;
        r.tolerance = ref.tolerance;
        r.drift = local_drift(ref.law);
        try {
            const T1Result t1 = expected_t1(Environment::homogeneous(ref.law), tol, max_levels);
            r.expected_t1 = t1.value;
            r.levels = t1.levels;
            r.converged = t1.converged;
            r.route_a = t1.value * r.drift;
            r.route_b = 1.0 - homogeneous_root(ref.law).h;
            r.delta = r.route_a - r.route_b;
            r.slow = r.levels > 100000;
            r.ok = r.converged && std::abs(r.delta) <= r.tolerance &&
                   std::abs(r.route_a - r.reference_a) <= r.tolerance &&
                   std::abs(r.route_b - r.reference_b) <= r.tolerance;
        } catch (const Error& e) {
            r.error = e.what();
        }
        rows.push_back(r);
    }
    return rows;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bounded-jump random walk toolkit", "ladderwalk"};
    return dispatch(app, out, err, argc, argv);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("ladderwalk");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ladderwalk::cli
