#pragma once

#include "uconv/character.hpp"
#include "uconv/stream_sums.hpp"
#include "uconv/trigpoly.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace uconv {

enum class NormMode { Rect, Sq };
const char* to_string(NormMode m);
NormMode parse_norm_mode(const std::string& s);

struct NormStrategy {
    int P = 16;                 // spatial candidates: the (i/P, j/P) grid
    bool dyadic = true;         // {1, 2, 4, ..., Mmax} sweep
    bool tuned = true;          // pairs around tune_MN at every candidate point
    int W = 2;                  // tuned offsets -W..W
    std::vector<StreamPoint> points;  // extra candidate points
    bool use_witnesses = true;  // add FH witnesses as candidate points
    int witness_limit = 8;
    int witness_grid = 256;
    bool critical = true;       // add critical points of the phase (stationary or inflected in each axis)
    int critical_limit = 8;
    double offset_ratio = 1.0442737824274138;  // 2^(1/16): geometric offsets at priority points
    std::int64_t Mmax = 0;      // 0: large enough to contain the whole stored spectrum
    int G = 0;                  // 0: automatic, doubling on alias-guard failure
    int jobs = 1;
};

struct NormEstimate {
    double norm = 0.0;
    std::int64_t M = 0, N = 0;
    double x = 0.0, y = 0.0;
    std::int64_t Mmax = 0;
    int Gs = 0, Gt = 0;
    double tail_mass = 0.0;
    double parseval = 0.0;
    std::size_t pairs = 0;  // number of (M, N, x, y) candidates examined
};

// General entry point on an explicit character.
NormEstimate estimate_norm(const CharacterSpec& spec, NormMode mode, const NormStrategy& s,
                           const std::vector<StreamPoint>& witness_points = {});

NormEstimate urect_estimate(const PhaseFamily& f, std::int64_t n, const NormStrategy& s = {});
NormEstimate usq_estimate(const PhaseFamily& f, std::int64_t n, const NormStrategy& s = {});
NormEstimate urect_estimate(const PhaseFamily& f, const std::vector<std::int64_t>& nvec,
                            const NormStrategy& s = {});
NormEstimate usq_estimate(const PhaseFamily& f, const std::vector<std::int64_t>& nvec,
                          const NormStrategy& s = {});

// Points where (d_s phase + ks or d_ss phase) and (d_t phase + kt or d_tt phase) both vanish.
std::vector<StreamPoint> critical_points(const CharacterSpec& spec, int limit);

// {-W..W} together with +-round(ratio^k) up to cap.
std::vector<std::int64_t> offset_set(int W, double cap, double ratio);

// Witness points of the family along a direction (d = 1: omega = {1}).
std::vector<StreamPoint> witness_points(const PhaseFamily& f, const std::vector<double>& omega,
                                        int grid_n, int limit);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
// least squares y = slope * x + intercept
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct CurvePoint {
    std::int64_t n = 0;
    NormEstimate est;
};

struct NormCurve {
    std::string family;
    NormMode mode = NormMode::Rect;
    std::vector<CurvePoint> points;
    LinearFit fit;                    // norm against ln n
    std::size_t fit_begin = 0;        // fit window [fit_begin, points.size())
};

// d > 1: n-vectors are q * v with v the best integer approximation of omega (radius 1e3);
// q runs over n_list.
NormCurve growth_curve(const PhaseFamily& f, const std::vector<std::int64_t>& n_list, NormMode mode,
                       const NormStrategy& s = {}, const std::vector<double>& omega = {});

// Integer vector of norm <= radius whose direction is closest to omega.
std::vector<std::int64_t> lattice_direction(const std::vector<double>& omega, double radius = 1e3);

// |S_{M,N}| at one point for the tuned pairs around (M*, N*), maximised over offsets;
// Sq mode uses the diagonal offsets (M* + o, M* + o) and (N* + o, N* + o).
struct PointValue {
    double value = 0.0;
    std::int64_t M = 0, N = 0;
};
PointValue tuned_point_value(const PhaseFamily& f, std::int64_t n, double x, double y,
                             NormMode mode, int W = 2, int jobs = 1);

} // namespace uconv
