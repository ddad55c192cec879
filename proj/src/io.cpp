#include "ladderwalk/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "ladderwalk/errors.hpp"

namespace ladderwalk {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* what) {
    if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) throw ParseError(std::string("unknown field '") + item.key() + "' in " + what);
}

std::vector<SiteLaw> laws_from(const json& j) {
    if (!j.contains("laws") || !j.at("laws").is_array()) throw ParseError("environment needs a 'laws' array");
    std::vector<SiteLaw> out;
    for (const auto& l : j.at("laws")) out.push_back(law_from_json(l));
    return out;
}

double number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
    return j.at(key).get<double>();
}

const std::set<std::string> kEnvKeys = {"kind", "laws", "period", "range", "default", "seed", "dirichlet_alpha",
                                        "weights", "margin"};

EnvLaw iid_law_from(const json& j) {
    if (j.contains("dirichlet_alpha")) {
        const auto& a = j.at("dirichlet_alpha");
        if (!a.is_array() || a.size() != 4) throw ParseError("'dirichlet_alpha' must hold four numbers");
        std::array<double, 4> alpha{};
        for (int k = 0; k < 4; ++k) alpha[k] = a.at(k).get<double>();
        const double margin = j.contains("margin") ? number(j, "margin") : 1e-6;
        return EnvLaw::dirichlet(alpha, margin);
    }
    std::vector<double> weights;
    if (j.contains("weights")) weights = j.at("weights").get<std::vector<double>>();
    return EnvLaw::mixture(laws_from(j), weights);
}

}  // namespace

SiteLaw law_from_json(const json& j) {
    reject_unknown(j, {"q2", "q1", "p1", "p2"}, "site law");
    try {
        return SiteLaw::make(number(j, "q2"), number(j, "q1"), number(j, "p1"), number(j, "p2"));
    } catch (const InvalidLaw& e) {
        throw ParseError(e.what());
    }
}

json law_to_json(const SiteLaw& law) { return json{{"q2", law.q2}, {"q1", law.q1}, {"p1", law.p1}, {"p2", law.p2}}; }

Environment environment_from_json(const json& j) {
    reject_unknown(j, kEnvKeys, "environment");
    if (!j.contains("kind") || !j.at("kind").is_string()) throw ParseError("environment needs a string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "homogeneous") {
            const auto laws = laws_from(j);
            if (laws.size() != 1) throw ParseError("homogeneous environment takes exactly one law");
            return Environment::homogeneous(laws[0]);
        }
        if (kind == "periodic") {
            auto laws = laws_from(j);
            if (j.contains("period") && j.at("period").get<long long>() != static_cast<long long>(laws.size()))
                throw ParseError("'period' must equal the number of laws");
            return Environment::periodic(std::move(laws));
        }
        if (kind == "explicit") {
            if (!j.contains("range") || !j.at("range").is_array() || j.at("range").size() != 2)
                throw ParseError("explicit environment needs 'range': [lo, hi]");
            const long long lo = j.at("range").at(0).get<long long>();
            const long long hi = j.at("range").at(1).get<long long>();
            auto laws = laws_from(j);
            if (hi < lo || static_cast<long long>(laws.size()) != hi - lo + 1)
                throw ParseError("explicit environment needs one law per site of 'range'");
            if (!j.contains("default")) throw ParseError("explicit environment needs a 'default' law");
            return Environment::explicit_range(lo, std::move(laws), law_from_json(j.at("default")));
        }
        if (kind == "iid") {
            const std::uint64_t seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;
            return Environment::iid(iid_law_from(j), seed);
        }
    } catch (const InvalidLaw& e) {
        throw ParseError(e.what());
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    throw ParseError("unknown environment kind '" + kind + "'");
}

Environment load_environment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open environment file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("environment file '" + path + "': " + e.what());
    }
    return environment_from_json(j);
}

json environment_to_json(const Environment& env) {
    json j;
    switch (env.kind()) {
        case EnvKind::Homogeneous:
            j["kind"] = "homogeneous";
            j["laws"] = json::array({law_to_json(env.law_at(0))});
            break;
        case EnvKind::Periodic: {
            j["kind"] = "periodic";
            const long long p = *env.period();
            json laws = json::array();
            for (long long i = 0; i < p; ++i) laws.push_back(law_to_json(env.law_at(i)));
            j["laws"] = laws;
            j["period"] = p;
            break;
        }
        case EnvKind::Explicit: {
            j["kind"] = "explicit";
            const long long lo = env.stored_lo() - env.offset();
            const long long hi = lo + static_cast<long long>(env.stored_laws().size()) - 1;
            json laws = json::array();
            for (long long i = lo; i <= hi; ++i) laws.push_back(law_to_json(env.law_at(i)));
            j["range"] = json::array({lo, hi});
            j["laws"] = laws;
            j["default"] = law_to_json(env.fallback());
            break;
        }
        case EnvKind::Iid: {
            if (env.offset() != 0) throw ParseError("a shifted i.i.d. environment has no file form");
            j["kind"] = "iid";
            j["seed"] = env.seed();
            const EnvLaw& law = env.env_law();
            if (law.kind == EnvLaw::Kind::Dirichlet) {
                j["dirichlet_alpha"] = law.alpha;
                j["margin"] = law.margin;
            } else {
                json laws = json::array();
                for (const auto& a : law.atoms) laws.push_back(law_to_json(a));
                j["laws"] = laws;
                j["weights"] = law.weights;
            }
            break;
        }
    }
    return j;
}

EnvLaw env_law_from_json(const json& j) {
    const Environment env = environment_from_json(j);
    switch (env.kind()) {
        case EnvKind::Homogeneous: return EnvLaw::point_mass(env.law_at(0));
        case EnvKind::Iid: return env.env_law();
        default: throw ParseError("an environment law must be homogeneous or iid");
    }
}

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

}  // namespace ladderwalk
