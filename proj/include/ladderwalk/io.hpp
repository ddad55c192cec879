#pragma once

#include <string>

#include <json.hpp>

#include "ladderwalk/environment.hpp"

namespace ladderwalk {

// Environment file: {"kind", "laws", "period", "range", "default", "seed",
// "dirichlet_alpha", "weights", "margin"}; unknown keys are rejected.
Environment environment_from_json(const nlohmann::json& j);
Environment load_environment(const std::string& path);
nlohmann::json environment_to_json(const Environment& env);

// Law of a single site under the file's environment: point mass for a
// homogeneous file, the sampler of an iid file.
EnvLaw env_law_from_json(const nlohmann::json& j);

nlohmann::json law_to_json(const SiteLaw& law);
SiteLaw law_from_json(const nlohmann::json& j);

// 12 significant digits.
std::string format_number(double x);

}  // namespace ladderwalk
