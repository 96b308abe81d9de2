#include "uconv/errors.hpp"
#include "uconv/phase_io.hpp"
#include "uconv/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

using nlohmann::json;

namespace {

struct Globals {
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
};

void print_metrics(const uconv::OperationResult& r) {
    std::cout << r.metrics.dump(2) << "\n";
    for (const auto& p : r.outputs) std::cerr << "wrote " << p << "\n";
}

uconv::OpContext context(const Globals& g, const std::string& stem) {
    std::filesystem::create_directories(g.out_dir);
    return {g.out_dir, stem, g.jobs};
}

// Path of an explicit --out/--json file split into (dir, stem) so the operation writes there.
uconv::OpContext context_for(const Globals& g, const std::string& stem, const std::string& explicit_out) {
    if (explicit_out.empty()) return context(g, stem);
    std::filesystem::path p(explicit_out);
    std::string dir = p.has_parent_path() ? p.parent_path().string() : ".";
    std::filesystem::create_directories(dir);
    return {dir, p.stem().string(), g.jobs};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uniform convergence toolkit for Fourier series on the torus"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed_value = 0;
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed_value, "Seed for randomised operations");
    app.add_option("--out-dir", g.out_dir, "Directory for CSV/JSON outputs");

    // fh-check
    auto* fh = app.add_subcommand("fh-check", "Search for points where the factorisation hypothesis fails");
    std::string fh_phase, fh_json;
    int fh_grid = 512, fh_omega = 0;
    fh->add_option("--phase", fh_phase, "Phase family file")->required();
    fh->add_option("--grid", fh_grid, "Grid size");
    fh->add_option("--omega-samples", fh_omega, "Directions sampled when d > 1");
    fh->add_option("--json", fh_json, "Report path");

    // qcalc-verify
    auto* qc = app.add_subcommand("qcalc-verify", "Check the structural properties of the Q coefficients");
    int qc_depth = 8, qc_draws = 0;
    std::string qc_check = "all";
    qc->add_option("--max-depth", qc_depth, "Largest k + l");
    qc->add_option("--check", qc_check, "Which check")
        ->check(CLI::IsMember({"homogeneity", "positivity", "vanishing", "identity", "top", "all"}));
    qc->add_option("--draws", qc_draws, "Random identity draws (0: one per (k, l))");

    // norm-sweep / square-sum
    auto* ns = app.add_subcommand("norm-sweep", "Estimate partial-sum norms over a range of n");
    auto* sq = app.add_subcommand("square-sum", "Estimate square partial-sum norms over a range of n");
    std::string ns_phase, ns_mode = "rect", ns_n = "2^6..2^11", ns_out, ns_points;
    std::int64_t ns_mmax = 0;
    bool sq_pointwise = false;
    for (auto* sub : {ns, sq}) {
        sub->add_option("--phase", ns_phase, "Phase family file")->required();
        sub->add_option("--n", ns_n, "n values: 2^6..2^11 or 64,128,...");
        sub->add_option("--mmax", ns_mmax, "Largest truncation order (0: whole spectrum)");
        sub->add_option("--out", ns_out, "CSV path");
        sub->add_option("--points", ns_points, "Extra candidate points as JSON, e.g. [[0.25,0]]");
    }
    ns->add_option("--mode", ns_mode, "rect or sq")->check(CLI::IsMember({"rect", "sq"}));
    sq->add_flag("--pointwise", sq_pointwise, "Tuned value at the first point only");

    // fefferman
    auto* fe = app.add_subcommand("fefferman", "Tabulate the Fefferman sine integral");
    std::string fe_grid = "log:1e2:1e7:25", fe_out;
    fe->add_option("--lambda-grid", fe_grid, "log:a:b:k or lin:a:b:k");
    fe->add_option("--out", fe_out, "CSV path");

    // sw-sweep
    auto* sw = app.add_subcommand("sw-sweep", "Random search for the largest truncated oscillatory integral");
    int sw_degree = 3;
    std::int64_t sw_trials = 10000;
    std::uint64_t sw_seed = 0;
    sw->add_option("--degree", sw_degree, "Polynomial degree");
    sw->add_option("--trials", sw_trials, "Number of random draws");
    auto* sw_seed_opt = sw->add_option("--seed", sw_seed, "Seed");

    // run
    auto* rn = app.add_subcommand("run", "Run the scenarios of a config file");
    std::string rn_config;
    rn->add_option("config", rn_config, "Config file")->required()->check(CLI::ExistingFile);

    // corpus
    auto* co = app.add_subcommand("corpus", "Write the regression corpus");
    std::string co_dir = "corpus";
    co->add_option("dir", co_dir, "Target directory");

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) g.seed = seed_value;

    try {
        if (*fh) {
            json p = {{"grid", fh_grid}};
            if (fh_omega > 0) p["omega_samples"] = fh_omega;
            auto ctx = context_for(g, std::filesystem::path(fh_phase).stem().string() + "_fh", fh_json);
            auto r = uconv::run_operation("fh-check", fh_phase, p, ctx);
            print_metrics(r);
            return r.metrics["verdict"] == "VIOLATED" ? 2 : 0;
        }
        if (*qc) {
            json p = {{"max_depth", qc_depth}, {"check", qc_check}, {"draws", qc_draws}};
            if (g.seed) p["seed"] = *g.seed;
            auto r = uconv::run_operation("qcalc-verify", "", p, context(g, "qcalc"));
            print_metrics(r);
            return r.metrics["violations"] == 0 ? 0 : 1;
        }
        if (*ns || *sq) {
            json p = {{"mode", ns_mode}, {"mmax", ns_mmax}, {"n", ns_n}};
            if (!ns_points.empty()) {
                try {
                    p["points"] = json::parse(ns_points);
                } catch (const json::exception& e) {
                    throw uconv::ConfigError(std::string("--points: ") + e.what());
                }
            }
            if (sq_pointwise) p["pointwise"] = true;
            std::string op = *sq ? "square-sum" : "norm-sweep";
            auto ctx = context_for(g, std::filesystem::path(ns_phase).stem().string() + "_" + op, ns_out);
            print_metrics(uconv::run_operation(op, ns_phase, p, ctx));
            return 0;
        }
        if (*fe) {
            auto ctx = context_for(g, "fefferman", fe_out);
            print_metrics(uconv::run_operation("fefferman", "", {{"lambda_grid", fe_grid}}, ctx));
            return 0;
        }
        if (*sw) {
            if (!*sw_seed_opt && !g.seed) throw uconv::ConfigError("sw-sweep needs --seed");
            json p = {{"degree", sw_degree}, {"trials", sw_trials}, {"seed", *sw_seed_opt ? sw_seed : *g.seed}};
            print_metrics(uconv::run_operation("sw-sweep", "", p, context(g, "sw_sweep")));
            return 0;
        }
        if (*rn) {
            uconv::Config cfg = uconv::load_config(rn_config);
            uconv::RunOptions opt{g.jobs, g.out_dir, g.seed};
            std::filesystem::create_directories(g.out_dir);
            auto records = uconv::run(cfg, opt);
            json all = {{"schema_version", uconv::kSchemaVersion}, {"records", json::array()}};
            for (const auto& r : records) {
                all["records"].push_back(uconv::to_json(r));
                for (const auto& a : r.assertions)
                    std::cout << (a.pass ? "PASS " : "FAIL ") << r.id << ": " << a.check << " (" << a.detail
                              << ")\n";
            }
            uconv::write_file((std::filesystem::path(g.out_dir) / "run_record.json").string(), all.dump(2) + "\n");
            return uconv::all_passed(records) ? 0 : 1;
        }
        if (*co) {
            for (const auto& p : uconv::bundle_corpus(co_dir)) std::cout << p << "\n";
            return 0;
        }
    } catch (const uconv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const uconv::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
