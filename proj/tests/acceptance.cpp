// Runs the regression corpus grouped by criterion and prints one PASS/FAIL line per criterion.
// Exit status is 0 once the report is complete; --strict makes any FAIL exit with 1.

#include "oracles.hpp"
#include "uconv/character.hpp"
#include "uconv/errors.hpp"
#include "uconv/phase_io.hpp"
#include "uconv/scenario.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace uconv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Timed {
    std::vector<RunRecord> records;
    double seconds = 0.0;
    std::string error;
};

Timed run_subset(const Config& all, const std::set<std::string>& ids, const std::string& out_dir) {
    Config c;
    for (const auto& s : all.scenarios)
        if (ids.count(s.id)) c.scenarios.push_back(s);
    RunOptions o;
    o.out_dir = out_dir;
    Timed t;
    auto start = std::chrono::steady_clock::now();
    try {
        t.records = run(c, o);
    } catch (const std::exception& e) {
        t.error = e.what();
    }
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return t;
}

const RunRecord* find(const Timed& t, const std::string& id) {
    for (const auto& r : t.records)
        if (r.id == id) return &r;
    return nullptr;
}

std::string metric(const Timed& t, const std::string& id, const std::string& key) {
    const RunRecord* r = find(t, id);
    if (!r || !r->metrics.contains(key)) return "?";
    const auto& v = r->metrics[key];
    return v.is_number() ? format_double(v.get<double>()) : v.dump();
}

Outcome judge(const Timed& t, double limit, std::string extra = "") {
    Outcome o;
    std::ostringstream d;
    d.precision(1);
    d << std::fixed << t.seconds << " s (limit " << limit << " s)";
    if (!t.error.empty()) {
        o.detail = d.str() + "; error: " + t.error;
        return o;
    }
    bool ok = t.seconds <= limit && !t.records.empty();
    for (const auto& r : t.records)
        for (const auto& a : r.assertions)
            if (!a.pass) {
                ok = false;
                d << "; " << r.id << ": " << a.check << " (" << a.detail << ")";
            }
    o.pass = ok;
    o.detail = d.str() + (extra.empty() ? "" : "; " + extra);
    return o;
}

// Truncated coefficient sums against direct quadrature against the Dirichlet kernels.
Outcome pipeline_crosscheck(const std::string& corpus) {
    auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::int64_t> order(0, 64);
    double worst = 0.0;
    std::ostringstream d;
    for (const char* name : {"split", "composite", "product", "sq_failing", "generic"}) {
        PhaseFamily f = load_family(corpus + "/" + name + ".json");
        const std::int64_t n = 2;
        CharacterSpec spec = make_character_spec(f, n);
        CharacterField c = build_character(spec, 1024, 1024);
        for (int i = 0; i < 10; ++i) {
            double x = unit(rng), y = unit(rng);
            std::int64_t M = order(rng), N = order(rng);
            cplx a = partial_sum_at(c, M, N, x, y);
            cplx b = oracle::dirichlet_partial_sum(spec, M, N, x, y, 1024);
            // relative to |b|, floored at 1e-2 so sums that nearly cancel are not divided by ~0
            worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-2));
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    d.precision(1);
    d << std::fixed << secs << " s (limit 120 s); worst relative difference " << std::scientific << worst;
    return {worst <= 1e-4 && secs <= 120.0, d.str()};
}

} // namespace

int main(int argc, char** argv) {
    bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    fs::path root = fs::temp_directory_path() / "uconv_acceptance";
    fs::remove_all(root);
    fs::create_directories(root / "out");
    bundle_corpus((root / "corpus").string());
    Config cfg = load_config((root / "corpus" / "corpus.yaml").string());
    const std::string out = (root / "out").string();

    std::vector<std::pair<std::string, Outcome>> rows;

    {
        Timed t = run_subset(cfg, {"fefferman"}, out);
        rows.push_back({"1 Fefferman constant", judge(t, 10.0, "slope " + metric(t, "fefferman", "slope"))});
    }
    rows.push_back({"2 Symbolic exactness", judge(run_subset(cfg, {"qcalc-top", "qcalc-structure"}, out), 60.0)});
    rows.push_back({"3 Identity verification", judge(run_subset(cfg, {"qcalc-identity"}, out), 30.0)});
    rows.push_back(
        {"4 FH dichotomy", judge(run_subset(cfg, {"fh-product", "fh-split", "fh-composite"}, out), 20.0)});
    {
        Timed t = run_subset(cfg, {"norm-product", "norm-split", "norm-composite"}, out);
        double grid = 0.0;
        for (const auto& r : t.records)
            if (r.metrics.contains("grid_max")) grid = std::max(grid, r.metrics["grid_max"].get<double>());
        std::string extra = "slopes product " + metric(t, "norm-product", "slope") + " (r2 " +
                            metric(t, "norm-product", "r2") + "), split " + metric(t, "norm-split", "slope") +
                            ", composite " + metric(t, "norm-composite", "slope") + "; largest grid " +
                            format_double(grid) + " (limit 16384)";
        Outcome o = judge(t, 900.0, extra);
        o.pass = o.pass && grid <= 16384.0;
        rows.push_back({"5 Norm dichotomy", o});
    }
    {
        Timed t = run_subset(cfg, {"sq-failing", "sq-bounded"}, out);
        std::string extra = "slopes failing " + metric(t, "sq-failing", "slope") + " (r2 " +
                            metric(t, "sq-failing", "r2") + "), bounded " + metric(t, "sq-bounded", "slope");
        rows.push_back({"6 Square-sum split", judge(t, 900.0, extra)});
    }
    {
        Timed t = run_subset(cfg, {"sw-small", "sw-large"}, out);
        std::string extra =
            "max " + metric(t, "sw-small", "max") + " at 1e4, " + metric(t, "sw-large", "max") + " at 1e5";
        rows.push_back({"7 Stein-Wainger uniformity", judge(t, 300.0, extra)});
    }
    rows.push_back({"8 Pipeline cross-check", pipeline_crosscheck((root / "corpus").string())});

    int failed = 0;
    for (const auto& [name, o] : rows) {
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
        failed += !o.pass;
    }
    std::cout << (rows.size() - failed) << "/" << rows.size() << " criteria passed\n";
    return strict && failed ? 1 : 0;
}
