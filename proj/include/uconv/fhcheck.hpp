#pragma once

#include "uconv/trigpoly.hpp"

#include <string>
#include <vector>

namespace uconv {

enum class Verdict { Violated, NoWitnessFound };
enum class Structure { Split, Composite, Product, Generic };

const char* to_string(Verdict v);
const char* to_string(Structure s);

struct Witness {
    double x = 0.0;
    double y = 0.0;
    std::vector<double> omega;
    std::string axis;      // "ss" or "tt": the second derivative that vanishes
    double psi_st = 0.0;
    double residual = 0.0;  // |psi_ss| or |psi_tt| at the refined point
};

struct FHReport {
    Verdict verdict = Verdict::NoWitnessFound;
    std::vector<Witness> witnesses;
    int grid_n = 0;
    double spacing = 0.0;
    double bisect_tol = 0.0;
    int omega_samples = 0;
    int omega_skipped = 0;  // directions dropped by the psi(-w) = -psi(w) symmetry
    double tau_zero_rel = 0.0;
    double tau_st_rel = 0.0;
};

std::vector<std::vector<double>> sample_directions(std::size_t d, int count);

FHReport witness_search(const PhaseFamily& f, int grid_n, int omega_samples);

// Point test at a single (x, y) for the contracted phase psi.
bool is_witness(const TrigPoly& psi, double x, double y);

Structure structural_classify(const PhaseFamily& f);

// Values of p on the grid (i/g, j/g), row-major in i. Exact table lookups.
std::vector<double> eval_grid(const TrigPoly& p, int g);

} // namespace uconv
