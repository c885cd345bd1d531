#pragma once

#include <utility>
#include <vector>

#include "carpetlab/fit.hpp"
#include "carpetlab/form.hpp"
#include "carpetlab/scaling.hpp"

namespace carpetlab {

/// V(x0, k) for k = 0 .. eccentricity of x0, using the graph's vertex measure.
std::vector<double> volume_profile(const Graph& g, VertexId x0);

/// Slope of log V(x0, r) against log r.
FitReport volume_growth_fit(const Graph& g, VertexId x0, const std::vector<double>& radii);

/// Slope of log E^{x0} tau_{B(x0, r)} against log r, with exit times from
/// linear solves. Needs at least 3 distinct radii, the largest at most a third
/// of the graph diameter.
FitReport fit_walk_dimension(const DirichletForm& df, VertexId x0, const std::vector<double>& radii,
                             const SolverOptions& opts = {});

struct OndiagReport {
    FitReport fit;                 // log p_t(x0,x0) against log t over the window
    std::vector<double> times;     // all requested times, ascending
    std::vector<double> density;   // p_t(x0, x0)
    std::vector<char> in_window;   // density >= 10 / m(X)
    double saturation = 0.0;       // 1 / m(X)
};

/// On-diagonal heat kernel decay restricted to the pre-saturation window.
OndiagReport ondiag_fit(const DirichletForm& df, VertexId x0, const std::vector<double>& times);

struct DgPairSpec {
    VertexId x1 = 0;
    VertexId x2 = 0;
    double t = 0.0;
};

struct DgPair {
    VertexId x1 = 0;
    VertexId x2 = 0;
    double R = 0.0;          // d(x1, x2)
    double t = 0.0;
    double overlap = 0.0;    // <P_t 1_{B1}, 1_{B2}>_m with B_i = B(x_i, R/4)
    double norm_bound = 0.0; // ||1_{B1}||_2 ||1_{B2}||_2
    double phi_value = 0.0;  // Phi(R, t)
};

struct DgReport {
    std::vector<DgPair> pairs;
    FitReport fit;           // -log(overlap / norm_bound) against Phi(R, t)
    double slope = 0.0;
    double r_squared = 0.0;
    int excluded = 0;        // pairs with zero overlap (left out of the regression)
};

/// Davies-Gaffney overlaps for distantly supported indicator functions.
/// The overlap of a pair is computed from its smaller vertex id, so swapping
/// x1 and x2 gives the same number.
DgReport dg_check(const DirichletForm& df, const ScalingFunction& sf, const std::vector<DgPairSpec>& pairs,
                  int threads = 1);

struct UhkSample {
    VertexId y = 0;
    double t = 0.0;
    double distance = 0.0;
    double density = 0.0;  // p_t(x0, y)
};

struct UhkReport {
    double c1 = 0.0;
    double c2 = 0.0;
    bool dominated = false;      // envelope dominates every sample at (c1, c2)
    double max_violation = 0.0;  // max_s log(p / envelope) at (c1, c2); <= 0 when dominated
    double mean_log_gap = 0.0;   // mean_s log(envelope / p) at (c1, c2)
    std::vector<UhkSample> samples;
};

/// p_t(x0, y) for each (y, t); every t must lie in the pre-saturation window.
std::vector<UhkSample> heat_kernel_samples(const DirichletForm& df, VertexId x0,
                                           const std::vector<std::pair<VertexId, double>>& sample);

/// V(x0, Psi^{-1}(c1 t))^{-1} exp(-Phi(c2 d, t)), with V read from volume_profile().
double uhk_envelope(const std::vector<double>& volumes, const ScalingFunction& sf, double c1, double c2, double d,
                    double t);

/// Fits the tightest (c1, c2) on a log grid over [1e-2, 1e2]^2 whose envelope
/// dominates the sample. For each c2 the largest dominating c1 is taken, and
/// among those the pair with the smallest mean log gap wins. When no grid pair
/// dominates, the pair with the smallest max violation is reported.
UhkReport uhk_check(const DirichletForm& df, const ScalingFunction& sf, VertexId x0,
                    const std::vector<std::pair<VertexId, double>>& sample, int grid_points = 41);

/// Fraction of samples above the envelope with constants (c1, c2).
double uhk_violation_fraction(const DirichletForm& df, const ScalingFunction& sf, VertexId x0,
                              const std::vector<UhkSample>& samples, double c1, double c2);

struct EscapeReport {
    double r = 0.0;
    double psi_r = 0.0;
    std::vector<double> eps;          // ascending
    std::vector<double> probability;  // P^{x0}(tau_B <= eps Psi(r))
    double admissible_eps = 0.0;      // largest grid eps with P <= eps' for every grid eps' <= eps; 0 if none
};

/// Exit probabilities of B(x0, r) from the killed semigroup.
EscapeReport escape_prob_check(const DirichletForm& df, const ScalingFunction& sf, VertexId x0, double r,
                               const std::vector<double>& eps_grid);

}  // namespace carpetlab
