#pragma once

#include "uconv/trigpoly.hpp"

#include <json.hpp>
#include <string>

namespace uconv {

// {"name": ..., "components": [[[m1, m2, a, b], ...], ...], "lattice": [[L11, L12], ...]}
nlohmann::json family_to_json(const PhaseFamily& f);
PhaseFamily family_from_json(const nlohmann::json& j);

PhaseFamily load_family(const std::string& path);
void save_family(const PhaseFamily& f, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace uconv
