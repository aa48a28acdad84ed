#pragma once

// Parameter sweeps for the asymptotic limits eps -> 0, L -> 0, L -> inf,
// delta -> 0 and for continuous dependence on the initial data, with
// least-squares slope fitting in log-log coordinates.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bsch/stepper.hpp"

namespace bsch {

struct RunSetup {
    StripGrid grid{64, 33, 1.0};
    ModelParams params;
    InitialData init;
    double linear_tol = 1e-11;  // CG tolerance for dual-norm evaluations
};

// lx = 1, 64 x 33, T = 0.25, tau = 1/512, phi0 = 0.2 cos(2 pi x) cos(pi y),
// zero forcing, L = 1, delta = 1, eps = 1e-2, regular quartic on both sides.
RunSetup default_scenario();
// amplitude * cos(2 pi kx x / lx) * cos(pi ky y) + offset, with psi0 its trace.
InitialData cosine_mode(const StripGrid& g, double amplitude, int kx, int ky, double offset);

enum class StudyKind { YosidaRate, KineticZero, KineticInfinity, DeltaZero, Stability };
enum class ReferenceRule { SmallestOver16, DirectLimitRun };

std::string_view to_string(StudyKind k);
StudyKind study_kind_from_string(std::string_view name);

struct StudySpec {
    StudyKind kind = StudyKind::YosidaRate;
    RunSetup base;
    std::vector<double> sweep;
    ReferenceRule reference_rule = ReferenceRule::SmallestOver16;
    // Divisor applied to the smallest sweep value under SmallestOver16.
    double reference_divisor = 16.0;
    // Stability study: mean-free perturbation of phi0 (bulk array); empty
    // selects cos(4 pi x / lx).
    std::vector<double> perturbation;
    int jobs = 1;
};

// StudySpec with the sweep and reference rule used by the acceptance suite.
StudySpec default_study(StudyKind kind);

struct StudyPoint {
    double param = 0.0;
    double value = 0.0;  // quantity entering the slope fit
    std::map<std::string, double> errors;
};

struct StudyResult {
    StudyKind kind = StudyKind::YosidaRate;
    std::vector<StudyPoint> points;  // in sweep order
    double slope = 0.0;
    double fit_residual = 0.0;
    std::string fit_quantity;
    std::string reference;
    std::map<std::string, double> summary;
};

struct FitResult {
    double slope = 0.0;
    double residual = 0.0;  // RMS deviation of log errors from the fitted line
    int excluded = 0;       // points dropped because their error was exactly 0
};

// Ordinary least squares on (log p, log e). Points with e == 0 are skipped;
// DegenerateFit if fewer than two remain or any parameter is not positive.
FitResult fit_slope(const std::vector<std::pair<double, double>>& points);

StudyResult study_yosida(const StudySpec& spec);
StudyResult study_kinetic_zero(const StudySpec& spec);
StudyResult study_kinetic_infinity(const StudySpec& spec);
StudyResult study_delta_zero(const StudySpec& spec);
StudyResult study_stability(const StudySpec& spec);
StudyResult run_study(const StudySpec& spec);

// max over points of value/param^power divided by the min.
double ratio_spread(const StudyResult& r, double power);
bool strictly_decreasing(const std::vector<double>& v);

}  // namespace bsch
