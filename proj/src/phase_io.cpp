#include "uconv/phase_io.hpp"

#include "uconv/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace uconv {

nlohmann::json family_to_json(const PhaseFamily& f) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : f.components) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& [m, v] : c.terms()) terms.push_back({m[0], m[1], v.a, v.b});
        comps.push_back(terms);
    }
    nlohmann::json lat = nlohmann::json::array();
    for (const auto& row : f.lattice) lat.push_back({row[0], row[1]});
    nlohmann::json j;
    j["name"] = f.name;
    j["components"] = comps;
    j["lattice"] = lat;
    return j;
}

PhaseFamily family_from_json(const nlohmann::json& j) {
    PhaseFamily f;
    try {
        f.name = j.value("name", std::string{});
        for (const auto& comp : j.at("components")) {
            TrigPoly p(2);
            for (const auto& t : comp) {
                if (!t.is_array() || t.size() != 4)
                    throw ConfigError("phase term must be [m1, m2, a, b]");
                p.add(Freq{t[0].get<std::int64_t>(), t[1].get<std::int64_t>()}, t[2].get<double>(),
                      t[3].get<double>());
            }
            f.components.push_back(p);
        }
        for (const auto& row : j.at("lattice")) {
            if (!row.is_array() || row.size() != 2) throw ConfigError("lattice row must be [L1, L2]");
            f.lattice.push_back({row[0].get<std::int64_t>(), row[1].get<std::int64_t>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("phase family: ") + e.what());
    }
    f.validate();
    return f;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

PhaseFamily load_family(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return family_from_json(j);
}

void save_family(const PhaseFamily& f, const std::string& path) {
    write_file(path, family_to_json(f).dump(2) + "\n");
}

} // namespace uconv
