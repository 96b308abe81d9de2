#include "uconv/scenario.hpp"

#include "uconv/errors.hpp"
#include "uconv/fhcheck.hpp"
#include "uconv/norms.hpp"
#include "uconv/oscint.hpp"
#include "uconv/phase_io.hpp"
#include "uconv/qcalc.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#ifndef UCONV_VERSION
#define UCONV_VERSION "unknown"
#endif

namespace uconv {

namespace fs = std::filesystem;
using nlohmann::json;

std::string code_version() { return UCONV_VERSION; }

const std::vector<std::string>& known_operations() {
    static const std::vector<std::string> ops = {"fh-check",  "qcalc-verify", "norm-sweep",
                                                 "fefferman", "sw-sweep",     "square-sum"};
    return ops;
}

namespace {

json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
        return nullptr;
    case YAML::NodeType::Sequence: {
        json a = json::array();
        for (const auto& c : n) a.push_back(yaml_to_json(c));
        return a;
    }
    case YAML::NodeType::Map: {
        json o = json::object();
        for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
        return o;
    }
    case YAML::NodeType::Scalar: {
        const std::string& s = n.Scalar();
        if (n.Tag() == "!") return s;  // quoted
        if (s == "true" || s == "True") return true;
        if (s == "false" || s == "False") return false;
        std::int64_t i = 0;
        double d = 0.0;
        if (YAML::convert<std::int64_t>::decode(n, i) && s.find_first_of(".eE") == std::string::npos) return i;
        if (YAML::convert<double>::decode(n, d)) return d;
        return s;
    }
    }
    return nullptr;
}

[[noreturn]] void config_error(const std::string& where, const std::string& msg) {
    throw ConfigError(where + ": " + msg);
}

const std::set<std::string> kCheckKeys = {"metric", "equals", "min", "max", "near", "tol"};

void validate_bound(const json& b, const std::string& where, const std::set<std::string>& ids) {
    if (b.is_number()) return;
    if (!b.is_object()) config_error(where, "bound must be a number or {scenario, metric, factor}");
    for (auto it = b.begin(); it != b.end(); ++it)
        if (it.key() != "scenario" && it.key() != "metric" && it.key() != "factor")
            config_error(where, "unknown field '" + it.key() + "'");
    if (!b.contains("scenario") || !b["scenario"].is_string()) config_error(where, "reference needs 'scenario'");
    if (!ids.count(b["scenario"].get<std::string>()))
        config_error(where, "reference to unknown scenario '" + b["scenario"].get<std::string>() + "'");
    if (!b.contains("metric") || !b["metric"].is_string()) config_error(where, "reference needs 'metric'");
    if (b.contains("factor") && !b["factor"].is_number()) config_error(where, "'factor' must be a number");
}

bool randomised(const std::string& op) { return op == "sw-sweep"; }

std::int64_t integer(const json& p, const char* key, std::int64_t def) {
    if (!p.contains(key)) return def;
    if (!p[key].is_number_integer()) throw ConfigError(std::string("parameter '") + key + "' must be an integer");
    return p[key].get<std::int64_t>();
}

std::string str(const json& p, const char* key, const std::string& def) {
    if (!p.contains(key)) return def;
    if (!p[key].is_string()) throw ConfigError(std::string("parameter '") + key + "' must be a string");
    return p[key].get<std::string>();
}

std::string now_utc() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string out_path(const OpContext& ctx, const std::string& ext) {
    return (fs::path(ctx.out_dir) / (ctx.stem + ext)).string();
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::string csv_line(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s += ',';
        s += cells[i];
    }
    return s + "\n";
}

std::string fmt(double x) { return format_double(x); }
std::string fmt(std::int64_t x) { return std::to_string(x); }

std::vector<StreamPoint> parse_points(const json& p) {
    std::vector<StreamPoint> pts;
    if (!p.contains("points")) return pts;
    if (!p["points"].is_array()) throw ConfigError("parameter 'points' must be a list of [x, y]");
    for (const auto& q : p["points"]) {
        if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number())
            throw ConfigError("parameter 'points' must be a list of [x, y]");
        pts.push_back({q[0].get<double>(), q[1].get<double>()});
    }
    return pts;
}

NormStrategy parse_strategy(const json& p, int jobs) {
    NormStrategy s;
    s.P = static_cast<int>(integer(p, "P", s.P));
    s.W = static_cast<int>(integer(p, "W", s.W));
    s.Mmax = integer(p, "mmax", 0);
    s.G = static_cast<int>(integer(p, "G", 0));
    s.points = parse_points(p);
    if (p.contains("witnesses")) s.use_witnesses = p["witnesses"].get<bool>();
    if (p.contains("critical")) s.critical = p["critical"].get<bool>();
    if (p.contains("tuned")) s.tuned = p["tuned"].get<bool>();
    if (p.contains("dyadic")) s.dyadic = p["dyadic"].get<bool>();
    s.jobs = jobs;
    return s;
}

double torus_dist(double a, double b) {
    double d = std::abs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

// --- operations

OperationResult op_fh_check(const std::string& phase, const json& p, const OpContext& ctx) {
    PhaseFamily f = load_family(phase);
    int grid = static_cast<int>(integer(p, "grid", 512));
    int omega = static_cast<int>(integer(p, "omega_samples", f.d() == 1 ? 1 : 64));
    FHReport rep = witness_search(f, grid, omega);
    OperationResult r;
    json out = {{"schema_version", kSchemaVersion},
                {"family", f.name},
                {"verdict", to_string(rep.verdict)},
                {"structure", to_string(structural_classify(f))},
                {"grid_n", rep.grid_n},
                {"spacing", rep.spacing},
                {"bisect_tol", rep.bisect_tol},
                {"omega_samples", rep.omega_samples},
                {"omega_skipped", rep.omega_skipped},
                {"witnesses", json::array()}};
    for (const auto& w : rep.witnesses)
        out["witnesses"].push_back({{"x", w.x}, {"y", w.y}, {"omega", w.omega}, {"axis", w.axis},
                                    {"psi_st", w.psi_st}, {"residual", w.residual}});
    r.metrics["verdict"] = to_string(rep.verdict);
    r.metrics["structure"] = to_string(structural_classify(f));
    r.metrics["witness_count"] = rep.witnesses.size();
    if (p.contains("target")) {
        const auto& t = p["target"];
        if (!t.is_array() || t.size() != 2) throw ConfigError("parameter 'target' must be [x, y]");
        double best = 1e300, psi = 0.0;
        for (const auto& w : rep.witnesses) {
            double d = std::hypot(torus_dist(w.x, t[0].get<double>()), torus_dist(w.y, t[1].get<double>()));
            if (d < best) {
                best = d;
                psi = w.psi_st;
            }
        }
        if (!rep.witnesses.empty()) {
            r.metrics["witness_distance"] = best;
            r.metrics["psi_st_at_target"] = psi;
        }
    }
    if (!ctx.out_dir.empty()) {
        std::string path = p.contains("json") ? p["json"].get<std::string>() : out_path(ctx, ".json");
        write_json(path, out);
        r.outputs.push_back(path);
    }
    return r;
}

OperationResult op_qcalc(const json& p, const OpContext& ctx) {
    int depth = static_cast<int>(integer(p, "max_depth", 8));
    std::vector<std::string> requested;
    if (p.contains("check") && p["check"].is_array()) {
        for (const auto& c : p["check"]) {
            if (!c.is_string()) throw ConfigError("parameter 'check' must be a name or a list of names");
            requested.push_back(c.get<std::string>());
        }
    } else {
        requested.push_back(str(p, "check", "all"));
    }
    std::vector<std::string> which;
    for (const auto& check : requested) {
        if (check == "all") which.insert(which.end(), {"homogeneity", "positivity", "vanishing", "identity", "top"});
        else if (check == "homogeneity" || check == "positivity" || check == "vanishing" || check == "identity" ||
                 check == "top")
            which.push_back(check);
        else throw ConfigError("parameter 'check' must be homogeneity, positivity, vanishing, identity, top or all");
    }
    int top_depth = static_cast<int>(integer(p, "top_depth", depth));
    int draws = static_cast<int>(integer(p, "draws", 0));
    std::uint64_t seed = static_cast<std::uint64_t>(integer(p, "seed", 1));
    QTable table;
    json out = {{"schema_version", kSchemaVersion}, {"max_depth", depth}, {"checks", json::object()}};
    long checked = 0, passed = 0;
    json violations = json::array();
    for (const auto& w : which) {
        CheckReport rep;
        if (w == "identity" && draws > 0) rep = identity_draws(table, draws, seed, depth);
        else rep = sweep_checks(table, w, w == "top" ? top_depth : depth);
        out["checks"][w] = {{"checked", rep.checked}, {"passed", rep.passed}};
        checked += rep.checked;
        passed += rep.passed;
        for (const auto& v : rep.violations) violations.push_back(w + ": " + v);
    }
    out["checked"] = checked;
    out["passed"] = passed;
    out["violations"] = violations;
    OperationResult r;
    r.metrics["checked"] = checked;
    r.metrics["passed"] = passed;
    r.metrics["violations"] = violations.size();
    if (!ctx.out_dir.empty()) {
        std::string path = out_path(ctx, ".json");
        write_json(path, out);
        r.outputs.push_back(path);
    }
    return r;
}

OperationResult curve_result(const NormCurve& c, const OpContext& ctx) {
    OperationResult r;
    std::string csv = csv_line({"n", "norm", "M", "N", "x", "y"});
    double lo = 1e300, hi = -1e300;
    std::int64_t grid = 0;
    for (const auto& pt : c.points) {
        csv += csv_line({fmt(pt.n), fmt(pt.est.norm), fmt(pt.est.M), fmt(pt.est.N), fmt(pt.est.x), fmt(pt.est.y)});
        lo = std::min(lo, pt.est.norm);
        hi = std::max(hi, pt.est.norm);
        grid = std::max<std::int64_t>({grid, pt.est.Gs, pt.est.Gt});
    }
    r.metrics["slope"] = c.fit.slope;
    r.metrics["intercept"] = c.fit.intercept;
    r.metrics["r2"] = c.fit.r2;
    r.metrics["norm_min"] = lo;
    r.metrics["norm_max"] = hi;
    r.metrics["grid_max"] = grid;
    if (!ctx.out_dir.empty()) {
        std::string path = out_path(ctx, ".csv");
        write_file(path, csv);
        r.outputs.push_back(path);
    }
    return r;
}

OperationResult op_norm_sweep(const std::string& phase, const json& p, const OpContext& ctx, bool square) {
    PhaseFamily f = load_family(phase);
    std::vector<std::int64_t> ns = parse_n_list(p.contains("n") ? p["n"] : json("2^6..2^11"));
    NormMode mode = square ? NormMode::Sq : parse_norm_mode(str(p, "mode", "rect"));
    NormStrategy s = parse_strategy(p, ctx.jobs);
    std::vector<double> omega;
    if (p.contains("omega")) omega = p["omega"].get<std::vector<double>>();
    if (square && p.contains("pointwise") && p["pointwise"].get<bool>()) {
        if (s.points.empty()) throw ConfigError("pointwise square sums need 'points'");
        const auto pt = s.points.front();
        OperationResult r;
        std::string csv = csv_line({"n", "value", "M", "N", "x", "y"});
        std::vector<double> x, y;
        for (auto n : ns) {
            PointValue v = tuned_point_value(f, n, pt.x, pt.y, NormMode::Sq, s.W, ctx.jobs);
            csv += csv_line({fmt(n), fmt(v.value), fmt(v.M), fmt(v.N), fmt(pt.x), fmt(pt.y)});
            x.push_back(std::log(static_cast<double>(n)));
            y.push_back(v.value);
        }
        std::size_t h = ns.size() / 2;
        LinearFit fit = fit_line({x.begin() + static_cast<std::ptrdiff_t>(h), x.end()},
                                 {y.begin() + static_cast<std::ptrdiff_t>(h), y.end()});
        r.metrics["slope"] = fit.slope;
        r.metrics["intercept"] = fit.intercept;
        r.metrics["r2"] = fit.r2;
        if (!ctx.out_dir.empty()) {
            std::string path = out_path(ctx, ".csv");
            write_file(path, csv);
            r.outputs.push_back(path);
        }
        return r;
    }
    return curve_result(growth_curve(f, ns, mode, s, omega), ctx);
}

OperationResult op_fefferman(const json& p, const OpContext& ctx) {
    std::vector<double> grid = parse_lambda_grid(str(p, "lambda_grid", "log:1e2:1e7:25"));
    std::string csv = csv_line({"lambda", "value"});
    std::vector<double> x, y;
    for (double l : grid) {
        double v = fefferman_sine(l);
        csv += csv_line({fmt(l), fmt(v)});
        x.push_back(std::log(l));
        y.push_back(v);
    }
    OperationResult r;
    if (grid.size() >= 2) {
        LinearFit fit = fit_line(x, y);
        r.metrics["slope"] = fit.slope;
        r.metrics["r2"] = fit.r2;
    }
    if (!ctx.out_dir.empty()) {
        std::string path = out_path(ctx, ".csv");
        write_file(path, csv);
        r.outputs.push_back(path);
    }
    return r;
}

OperationResult op_sw(const json& p, const OpContext& ctx) {
    if (!p.contains("seed")) throw ConfigError("sw-sweep needs a 'seed'");
    int degree = static_cast<int>(integer(p, "degree", 3));
    std::int64_t trials = integer(p, "trials", 10000);
    std::uint64_t seed = static_cast<std::uint64_t>(integer(p, "seed", 0));
    SWResult res = sw_sample(degree, trials, seed, ctx.jobs);
    OperationResult r;
    r.metrics["max"] = res.max;
    r.metrics["trials"] = res.trials;
    json out = {{"schema_version", kSchemaVersion}, {"degree", degree},          {"trials", res.trials},
                {"seed", seed},                     {"max", res.max},            {"argmax_coefficients", res.argmax_coeffs},
                {"argmax_a", res.argmax_a},         {"argmax_b", res.argmax_b}};
    if (!ctx.out_dir.empty()) {
        std::string path = out_path(ctx, ".json");
        write_json(path, out);
        r.outputs.push_back(path);
    }
    return r;
}

double resolve_bound(const json& b, const std::vector<RunRecord>& records, std::string& text) {
    if (b.is_number()) {
        text = fmt(b.get<double>());
        return b.get<double>();
    }
    std::string id = b["scenario"].get<std::string>(), metric = b["metric"].get<std::string>();
    double factor = b.contains("factor") ? b["factor"].get<double>() : 1.0;
    for (const auto& r : records)
        if (r.id == id) {
            if (!r.metrics.contains(metric) || !r.metrics[metric].is_number())
                throw ConfigError("scenario '" + id + "' has no numeric metric '" + metric + "'");
            text = fmt(factor) + " * " + id + "." + metric;
            return factor * r.metrics[metric].get<double>();
        }
    throw ConfigError("reference to unknown scenario '" + id + "'");
}

template <class E>
[[noreturn]] void rethrow_as(const E& e, const std::string& id) {
    throw E("scenario '" + id + "': " + e.what());
}

[[noreturn]] void rethrow_with_id(std::exception_ptr ep, const std::string& id) {
    try {
        std::rethrow_exception(ep);
    } catch (const AliasGuardFailed& e) {
        throw AliasGuardFailed("scenario '" + id + "': " + e.what(), e.tail_mass);
    } catch (const QuadratureFailed& e) {
        throw QuadratureFailed("scenario '" + id + "': " + e.what(), e.residual);
    } catch (const ConfigError& e) {
        rethrow_as(e, id);
    } catch (const IoError& e) {
        rethrow_as(e, id);
    } catch (const RangeError& e) {
        rethrow_as(e, id);
    } catch (const DimMismatch& e) {
        rethrow_as(e, id);
    } catch (const DepthTooLarge& e) {
        rethrow_as(e, id);
    } catch (const OrderTooLarge& e) {
        rethrow_as(e, id);
    } catch (const std::exception& e) {
        throw Error("scenario '" + id + "': " + e.what());
    }
}

} // namespace

std::vector<std::int64_t> parse_n_list(const json& v) {
    std::vector<std::int64_t> out;
    if (v.is_array()) {
        for (const auto& x : v) {
            if (!x.is_number_integer()) throw ConfigError("n list entries must be integers");
            out.push_back(x.get<std::int64_t>());
        }
        return out;
    }
    if (v.is_number_integer()) return {v.get<std::int64_t>()};
    if (!v.is_string()) throw ConfigError("n must be a list, an integer, or a range like 2^6..2^11");
    std::string s = v.get<std::string>();
    auto dots = s.find("..");
    if (dots != std::string::npos) {
        auto pw = [&](const std::string& t) -> int {
            if (t.rfind("2^", 0) != 0) throw ConfigError("range bounds must look like 2^k: '" + s + "'");
            try {
                return std::stoi(t.substr(2));
            } catch (const std::exception&) {
                throw ConfigError("bad exponent in '" + s + "'");
            }
        };
        int a = pw(s.substr(0, dots)), b = pw(s.substr(dots + 2));
        if (a < 0 || b > 40 || a > b) throw ConfigError("bad n range '" + s + "'");
        for (int k = a; k <= b; ++k) out.push_back(std::int64_t{1} << k);
        return out;
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stoll(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad n list '" + s + "'");
        }
    }
    return out;
}

std::vector<double> parse_lambda_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() != 4 || (parts[0] != "log" && parts[0] != "lin"))
        throw ConfigError("lambda grid must look like log:1e2:1e7:25, got '" + spec + "'");
    double a = 0.0, b = 0.0;
    int k = 0;
    try {
        a = std::stod(parts[1]);
        b = std::stod(parts[2]);
        k = std::stoi(parts[3]);
    } catch (const std::exception&) {
        throw ConfigError("bad lambda grid '" + spec + "'");
    }
    if (!(a > 0.0) || !(b >= a) || k < 1) throw ConfigError("bad lambda grid '" + spec + "'");
    std::vector<double> g;
    for (int i = 0; i < k; ++i) {
        double u = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
        g.push_back(parts[0] == "log" ? std::exp(std::log(a) + u * (std::log(b) - std::log(a))) : a + u * (b - a));
    }
    return g;
}

Config parse_config(const std::string& yaml_text, const std::string& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config does not parse: ") + e.what());
    }
    Config cfg;
    if (!root || root.IsNull()) return cfg;
    if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
    for (const auto& kv : root) {
        auto key = kv.first.as<std::string>();
        if (key != "schema_version" && key != "scenarios") config_error("config", "unknown field '" + key + "'");
    }
    if (root["schema_version"]) {
        json v = yaml_to_json(root["schema_version"]);
        if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
            config_error("schema_version", "must be " + std::to_string(kSchemaVersion));
    }
    YAML::Node list = root["scenarios"];
    if (!list || list.IsNull()) return cfg;
    if (!list.IsSequence()) config_error("scenarios", "must be a list");
    std::set<std::string> ids;
    std::vector<json> raw;
    for (const auto& n : list) raw.push_back(yaml_to_json(n));
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const json& s = raw[i];
        std::string where = "scenarios[" + std::to_string(i) + "]";
        if (!s.is_object()) config_error(where, "must be a mapping");
        if (!s.contains("id") || !s["id"].is_string() || s["id"].get<std::string>().empty())
            config_error(where + ".id", "missing or not a string");
        std::string id = s["id"].get<std::string>();
        if (!ids.insert(id).second) config_error(where + ".id", "duplicate id '" + id + "'");
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const json& s = raw[i];
        Scenario sc;
        sc.id = s["id"].get<std::string>();
        std::string where = "scenario '" + sc.id + "'";
        for (auto it = s.begin(); it != s.end(); ++it)
            if (it.key() != "id" && it.key() != "operation" && it.key() != "phase" && it.key() != "params" &&
                it.key() != "expect")
                config_error(where, "unknown field '" + it.key() + "'");
        if (!s.contains("operation") || !s["operation"].is_string())
            config_error(where + ".operation", "missing or not a string");
        sc.operation = s["operation"].get<std::string>();
        const auto& ops = known_operations();
        if (std::find(ops.begin(), ops.end(), sc.operation) == ops.end())
            config_error(where + ".operation", "unknown operation '" + sc.operation + "'");
        const bool needs_phase = sc.operation == "fh-check" || sc.operation == "norm-sweep" ||
                                 sc.operation == "square-sum";
        if (s.contains("phase")) {
            if (!s["phase"].is_string()) config_error(where + ".phase", "must be a path");
            fs::path p = s["phase"].get<std::string>();
            if (p.is_relative()) p = fs::path(base_dir) / p;
            if (!fs::exists(p)) throw IoError(where + ".phase: file not found: " + p.string());
            sc.phase = p.string();
        } else if (needs_phase) {
            config_error(where + ".phase", "operation '" + sc.operation + "' needs a phase file");
        }
        if (s.contains("params")) {
            if (!s["params"].is_object()) config_error(where + ".params", "must be a mapping");
            sc.params = s["params"];
        }
        if (randomised(sc.operation) && !sc.params.contains("seed"))
            config_error(where + ".params.seed", "randomised operation needs a seed");
        if (s.contains("expect")) {
            if (!s["expect"].is_array()) config_error(where + ".expect", "must be a list of checks");
            sc.expect = s["expect"];
            for (std::size_t k = 0; k < sc.expect.size(); ++k) {
                const json& c = sc.expect[k];
                std::string cw = where + ".expect[" + std::to_string(k) + "]";
                if (!c.is_object()) config_error(cw, "must be a mapping");
                for (auto it = c.begin(); it != c.end(); ++it)
                    if (!kCheckKeys.count(it.key())) config_error(cw, "unknown field '" + it.key() + "'");
                if (!c.contains("metric") || !c["metric"].is_string()) config_error(cw + ".metric", "missing");
                bool any = false;
                if (c.contains("min")) validate_bound(c["min"], cw + ".min", ids), any = true;
                if (c.contains("max")) validate_bound(c["max"], cw + ".max", ids), any = true;
                if (c.contains("equals")) any = true;
                if (c.contains("near")) {
                    if (!c["near"].is_number() || !c.contains("tol") || !c["tol"].is_number())
                        config_error(cw, "'near' needs numeric 'near' and 'tol'");
                    any = true;
                }
                if (!any) config_error(cw, "check needs one of equals, min, max, near");
            }
        }
        cfg.scenarios.push_back(std::move(sc));
    }
    return cfg;
}

Config load_config(const std::string& path) {
    return parse_config(read_file(path), fs::path(path).parent_path().string());
}

OperationResult run_operation(const std::string& operation, const std::string& phase, const json& params,
                              const OpContext& ctx) {
    if (operation == "fh-check") return op_fh_check(phase, params, ctx);
    if (operation == "qcalc-verify") return op_qcalc(params, ctx);
    if (operation == "norm-sweep") return op_norm_sweep(phase, params, ctx, false);
    if (operation == "square-sum") return op_norm_sweep(phase, params, ctx, true);
    if (operation == "fefferman") return op_fefferman(params, ctx);
    if (operation == "sw-sweep") return op_sw(params, ctx);
    throw ConfigError("operation: unknown operation '" + operation + "'");
}

AssertionResult evaluate_check(const json& c, const std::string& own_id, const std::vector<RunRecord>& records) {
    AssertionResult a;
    const RunRecord* own = nullptr;
    for (const auto& r : records)
        if (r.id == own_id) own = &r;
    std::string metric = c["metric"].get<std::string>();
    a.check = metric;
    if (!own || !own->metrics.contains(metric)) {
        a.pass = false;
        a.check += " (present)";
        a.detail = "metric not produced";
        return a;
    }
    const json& v = own->metrics[metric];
    bool pass = true;
    std::vector<std::string> parts, details;
    if (c.contains("equals")) {
        parts.push_back("== " + c["equals"].dump());
        if (v != c["equals"]) pass = false;
    }
    auto numeric = [&]() {
        if (!v.is_number()) throw ConfigError("metric '" + metric + "' of '" + own_id + "' is not numeric");
        return v.get<double>();
    };
    if (c.contains("min")) {
        std::string text;
        double b = resolve_bound(c["min"], records, text);
        parts.push_back(">= " + text);
        if (!(numeric() >= b)) pass = false;
    }
    if (c.contains("max")) {
        std::string text;
        double b = resolve_bound(c["max"], records, text);
        parts.push_back("<= " + text);
        if (!(numeric() <= b)) pass = false;
    }
    if (c.contains("near")) {
        double target = c["near"].get<double>(), tol = c["tol"].get<double>();
        parts.push_back("within " + fmt(tol) + " of " + fmt(target));
        if (!(std::abs(numeric() - target) <= tol)) pass = false;
    }
    for (const auto& p : parts) a.check += " " + p;
    a.pass = pass;
    a.detail = "value " + (v.is_number() ? fmt(v.get<double>()) : v.dump());
    return a;
}

std::vector<RunRecord> run(const Config& cfg, const RunOptions& opt) {
    const std::size_t n = cfg.scenarios.size();
    std::vector<RunRecord> records(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const int jobs = std::max(1, opt.jobs);
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            const Scenario& sc = cfg.scenarios[i];
            RunRecord& rec = records[i];
            rec.id = sc.id;
            rec.version = code_version();
            rec.started = now_utc();
            try {
                json params = sc.params;
                if (opt.seed && randomised(sc.operation)) params["seed"] = *opt.seed;
                OpContext ctx;
                ctx.out_dir = opt.out_dir;
                ctx.stem = sc.id;
                ctx.jobs = 1;  // scenario-level parallelism only
                OperationResult res = run_operation(sc.operation, sc.phase, params, ctx);
                rec.metrics = res.metrics;
                rec.outputs = res.outputs;
            } catch (...) {
                errors[i] = std::current_exception();
            }
            rec.finished = now_utc();
        }
    };
    if (jobs == 1 || n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(jobs, static_cast<int>(n)); ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < n; ++i)
        if (errors[i]) rethrow_with_id(errors[i], cfg.scenarios[i].id);
    // assertions may refer to other scenarios, so they run after every scenario finished
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& c : cfg.scenarios[i].expect) {
            try {
                records[i].assertions.push_back(evaluate_check(c, records[i].id, records));
            } catch (...) {
                rethrow_with_id(std::current_exception(), records[i].id);
            }
        }
    return records;
}

bool all_passed(const std::vector<RunRecord>& records) {
    for (const auto& r : records)
        for (const auto& a : r.assertions)
            if (!a.pass) return false;
    return true;
}

json to_json(const RunRecord& r) {
    json j = {{"id", r.id},          {"version", r.version}, {"started", r.started},
              {"finished", r.finished}, {"outputs", r.outputs}, {"metrics", r.metrics},
              {"assertions", json::array()}};
    for (const auto& a : r.assertions)
        j["assertions"].push_back({{"check", a.check}, {"pass", a.pass}, {"detail", a.detail}});
    return j;
}


namespace {

PhaseFamily one(const std::string& name, TrigPoly p, std::int64_t L1, std::int64_t L2) {
    PhaseFamily f;
    f.name = name;
    f.components.push_back(std::move(p));
    f.lattice.push_back({L1, L2});
    return f;
}

} // namespace

std::vector<std::string> bundle_corpus(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create corpus directory " + dir + ": " + ec.message());

    const TrigPoly sin_s = TrigPoly::sin_term({1, 0}), cos_s = TrigPoly::cos_term({1, 0});
    const TrigPoly sin_t = TrigPoly::sin_term({0, 1}), cos_t = TrigPoly::cos_term({0, 1});
    // cos(2 pi s) (-1 + sin(2 pi t))
    const TrigPoly sq_phase = cos_s * (TrigPoly::constant(-1.0) + sin_t);
    const std::int64_t L1 = static_cast<std::int64_t>(std::ceil(100.0 * c2_norm(sq_phase)));
    // At (1/4, t0) with sin(2 pi t0) = 1 - 6/(2 pi): d_s phase = 6, d_t phase = 0, so L = (8, 14)
    // makes both tuned components equal to 14 while d_ss phase vanishes.
    const double t0 = std::asin(1.0 - 6.0 / (2.0 * std::numbers::pi)) / (2.0 * std::numbers::pi);

    std::vector<std::pair<std::string, PhaseFamily>> files = {
        {"pure_character.json", one("pure_character", TrigPoly(2), 3, 2)},
        {"split.json", one("split", sin_s + cos_t * 0.5, 0, 0)},
        {"composite.json", one("composite", TrigPoly::sin_term({2, 3}, 0.25), 0, 0)},
        {"product.json", one("product", sin_s * cos_t, 4, 4)},
        {"sq_bounded.json", one("sq_bounded", sq_phase, L1, 1000 * L1 + 1)},
        {"sq_failing.json", one("sq_failing", sq_phase, 8, 14)},
        {"generic.json", one("generic", sin_s * cos_t + TrigPoly::cos_term({1, -2}, 0.3), 1, -1)},
    };
    std::vector<std::string> written;
    for (const auto& [file, fam] : files) {
        std::string path = (fs::path(dir) / file).string();
        save_family(fam, path);
        written.push_back(path);
    }

    const double half_pi = std::numbers::pi / 2.0;
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    std::ostringstream y;
    y << "# Regression corpus: every scenario below is part of the acceptance suite.\n"
      << "schema_version: " << kSchemaVersion << "\n"
      << "scenarios:\n"
      << "  - id: fefferman\n"
      << "    operation: fefferman\n"
      << "    params: {lambda_grid: \"log:1e3:1e7:25\"}\n"
      << "    expect:\n"
      << "      - {metric: slope, near: " << fmt(half_pi) << ", tol: " << fmt(0.02 * half_pi) << "}\n"
      << "  - id: qcalc-top\n"
      << "    operation: qcalc-verify\n"
      << "    params: {max_depth: 10, check: top}\n"
      << "    expect:\n"
      << "      - {metric: violations, equals: 0}\n"
      << "  - id: qcalc-structure\n"
      << "    operation: qcalc-verify\n"
      << "    params: {max_depth: 8, check: [homogeneity, positivity, vanishing]}\n"
      << "    expect:\n"
      << "      - {metric: violations, equals: 0}\n"
      << "      - {metric: passed, min: {scenario: qcalc-structure, metric: checked}}\n"
      << "  - id: qcalc-identity\n"
      << "    operation: qcalc-verify\n"
      << "    params: {max_depth: 8, check: identity, draws: 50, seed: 20240601}\n"
      << "    expect:\n"
      << "      - {metric: violations, equals: 0}\n"
      << "      - {metric: passed, equals: 50}\n"
      << "  - id: fh-product\n"
      << "    operation: fh-check\n"
      << "    phase: product.json\n"
      << "    params: {grid: 512, target: [0, 0.25]}\n"
      << "    expect:\n"
      << "      - {metric: verdict, equals: VIOLATED}\n"
      << "      - {metric: witness_distance, max: 1e-6}\n"
      << "      - {metric: psi_st_at_target, near: " << fmt(-four_pi2) << ", tol: 1e-6}\n"
      << "  - id: fh-split\n"
      << "    operation: fh-check\n"
      << "    phase: split.json\n"
      << "    params: {grid: 512}\n"
      << "    expect:\n"
      << "      - {metric: verdict, equals: NO_WITNESS_FOUND}\n"
      << "  - id: fh-composite\n"
      << "    operation: fh-check\n"
      << "    phase: composite.json\n"
      << "    params: {grid: 512}\n"
      << "    expect:\n"
      << "      - {metric: verdict, equals: NO_WITNESS_FOUND}\n"
      << "      - {metric: structure, equals: COMPOSITE}\n"
      << "  - id: norm-pure\n"
      << "    operation: norm-sweep\n"
      << "    phase: pure_character.json\n"
      << "    params: {mode: rect, n: [16, 32, 64, 128]}\n"
      << "    expect:\n"
      << "      - {metric: norm_max, near: 1, tol: 1e-6}\n"
      << "      - {metric: norm_min, near: 1, tol: 1e-6}\n"
      << "  - id: norm-product\n"
      << "    operation: norm-sweep\n"
      << "    phase: product.json\n"
      << "    params: {mode: rect, n: \"2^6..2^11\"}\n"
      << "    expect:\n"
      << "      - {metric: slope, min: 0.01}\n"
      << "      - {metric: r2, min: 0.95}\n"
      << "  - id: norm-split\n"
      << "    operation: norm-sweep\n"
      << "    phase: split.json\n"
      << "    params: {mode: rect, n: \"2^6..2^11\"}\n"
      << "    expect:\n"
      << "      - {metric: slope, max: {scenario: norm-product, metric: slope, factor: 0.05}}\n"
      << "  - id: norm-composite\n"
      << "    operation: norm-sweep\n"
      << "    phase: composite.json\n"
      << "    params: {mode: rect, n: \"2^6..2^11\"}\n"
      << "    expect:\n"
      << "      - {metric: slope, max: {scenario: norm-product, metric: slope, factor: 0.05}}\n"
      << "  - id: sq-failing\n"
      << "    operation: square-sum\n"
      << "    phase: sq_failing.json\n"
      << "    params: {n: \"2^6..2^11\", points: [[0.25, " << fmt(t0) << "]]}\n"
      << "    expect:\n"
      << "      - {metric: slope, min: 0.01}\n"
      << "      - {metric: r2, min: 0.9}\n"
      << "  - id: sq-bounded\n"
      << "    operation: square-sum\n"
      << "    phase: sq_bounded.json\n"
      << "    params: {n: \"2^6..2^11\", points: [[0.25, " << fmt(t0) << "]]}\n"
      << "    expect:\n"
      << "      - {metric: slope, max: {scenario: sq-failing, metric: slope, factor: 0.05}}\n"
      << "  - id: sw-small\n"
      << "    operation: sw-sweep\n"
      << "    params: {degree: 3, trials: 10000, seed: 7}\n"
      << "  - id: sw-large\n"
      << "    operation: sw-sweep\n"
      << "    params: {degree: 3, trials: 100000, seed: 7}\n"
      << "    expect:\n"
      << "      - {metric: max, max: {scenario: sw-small, metric: max, factor: 1.01}}\n";
    std::string cfg = (fs::path(dir) / "corpus.yaml").string();
    write_file(cfg, y.str());
    written.push_back(cfg);
    return written;
}

} // namespace uconv
