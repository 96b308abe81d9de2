#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uconv {

inline constexpr int kSchemaVersion = 1;

// git describe of the build, "unknown" outside a checkout
std::string code_version();

struct Scenario {
    std::string id;
    std::string operation;  // fh-check | qcalc-verify | norm-sweep | fefferman | sw-sweep | square-sum
    std::string phase;      // resolved path, empty when the operation takes none
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json expect = nlohmann::json::array();  // list of checks
};

struct Config {
    int schema_version = kSchemaVersion;
    std::vector<Scenario> scenarios;
};

// Throws ConfigError on schema problems and IoError on missing files.
Config parse_config(const std::string& yaml_text, const std::string& base_dir);
Config load_config(const std::string& path);

const std::vector<std::string>& known_operations();

struct OperationResult {
    nlohmann::json metrics = nlohmann::json::object();
    std::vector<std::string> outputs;
};

struct OpContext {
    std::string out_dir = ".";
    std::string stem;  // output file name stem
    int jobs = 1;
};

// Shared by the scenario runner and the direct subcommands.
OperationResult run_operation(const std::string& operation, const std::string& phase,
                              const nlohmann::json& params, const OpContext& ctx);

struct AssertionResult {
    std::string check;
    bool pass = false;
    std::string detail;
};

struct RunRecord {
    std::string id;
    std::string version;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;
    nlohmann::json metrics = nlohmann::json::object();
    std::vector<AssertionResult> assertions;
};

struct RunOptions {
    int jobs = 1;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;  // replaces every scenario seed when set
};

std::vector<RunRecord> run(const Config& cfg, const RunOptions& opt);
bool all_passed(const std::vector<RunRecord>& records);
nlohmann::json to_json(const RunRecord& r);

// Evaluate one expect-check against the metrics of a run (by scenario id).
AssertionResult evaluate_check(const nlohmann::json& check, const std::string& own_id,
                               const std::vector<RunRecord>& records);

// Writes the phase corpus and corpus.yaml into dir; returns the written paths.
std::vector<std::string> bundle_corpus(const std::string& dir);

// n lists: [64, 128], "2^6..2^11", or "64,128,256"
std::vector<std::int64_t> parse_n_list(const nlohmann::json& v);
// "log:1e2:1e7:25"
std::vector<double> parse_lambda_grid(const std::string& spec);

} // namespace uconv
