#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carpetlab/carpet.hpp"
#include "carpetlab/fit.hpp"
#include "carpetlab/form.hpp"
#include "carpetlab/inequalities.hpp"
#include "carpetlab/scaling.hpp"

namespace carpetlab {

/// Time change by a(x) = max(1, d(origin, x)^p).
struct TimeChangeSpec {
    double p = 0.0;
    VertexId origin = 0;
};

VertexField time_change_weights(const Graph& g, const TimeChangeSpec& spec);
/// Same conductances on the measure m_a = m / a.
DirichletForm time_changed_form(const DirichletForm& df, const TimeChangeSpec& spec);

/// Intrinsic distance from the origin: shortest paths with edge weight
/// (a(x)^{-1/2} + a(y)^{-1/2}) / 2.
std::vector<double> rho_a_distances(const Graph& g, const TimeChangeSpec& spec);
std::vector<double> rho_a_metric(const Graph& g, const TimeChangeSpec& spec, const std::vector<VertexId>& targets);

/// Increment sequence of a truncation sweep and its convergence label.
struct SequenceTrend {
    std::vector<double> values;
    std::vector<double> increments;  // values[i+1] - values[i]
    std::vector<double> ratios;      // increments[i+1] / increments[i]
    std::string label;               // "convergent", "divergent" or "inconclusive"
};

/// "convergent" when every increment ratio is at most converge_ratio,
/// "divergent" when every ratio is at least diverge_ratio; needs 3 values.
SequenceTrend classify_increments(std::vector<double> values, double converge_ratio = 0.7,
                                  double diverge_ratio = 0.95);

struct RhoShellReport {
    std::vector<double> radii;
    std::vector<double> shell_distance;  // rho_a between the graph spheres of radius R and 2R
    FitReport fit;
    double predicted_exponent = 0.0;     // 1 - p/2
};

/// rho_a distance from {d = R} to {d = 2R} for each R, and its log-log slope.
RhoShellReport rho_shell_scan(const Graph& g, const TimeChangeSpec& spec, const std::vector<double>& radii);

/// rho_a(origin, far shell) for each generation of the dim-carpet.
SequenceTrend rho_truncation_sweep(int dim, const std::vector<int>& generations, double p,
                                   std::int64_t cell_budget = kDefaultCellBudget);

struct MaProfile {
    double total = 0.0;                 // m_a of the whole truncation
    std::vector<double> rho_radii;
    std::vector<double> ball_measure;   // m_a(B_rho(origin, r))
};

MaProfile ma_profile(const DirichletForm& df, const TimeChangeSpec& spec, const std::vector<double>& rho_radii);
/// m_a(X_n) for each generation of the dim-carpet.
SequenceTrend ma_total_sweep(int dim, const std::vector<int>& generations, double p,
                             std::int64_t cell_budget = kDefaultCellBudget);

enum class VgcVerdict { holds, fails, inconclusive };
const char* to_string(VgcVerdict v);

struct VgcReport {
    VgcVerdict verdict = VgcVerdict::inconclusive;
    double rho_exponent = 0.0;     // 1 + slope of the per-level rho increments against distance
    bool rho_bounded = false;      // rho_exponent < -delta
    double mass_exponent = 0.0;    // slope of m_a over triadic shells [3^j, 3^{j+1}) against 3^j
    std::string mass_regime;       // "infinite", "finite" or "undetermined"
    double integral = 0.0;         // int_1^{rho_max} r / log m_a(B_rho(0, r)) dr on the truncation
    double rho_max = 0.0;
    std::string reason;
};

/// Volume growth criterion for the time-changed space. Infinite intrinsic
/// radius means it holds; finite radius holds only with finite total mass.
VgcReport vgc_classify(const CarpetGraph& g, const TimeChangeSpec& spec, double delta = 0.005,
                       double mass_band = 0.1);

struct GreenSweep {
    int dim = 3;
    std::vector<int> generations;
    std::vector<double> ps;
    std::vector<std::vector<double>> sums;  // sums[i][k] = E^0 A_inf on generation k for ps[i]
    std::vector<SequenceTrend> trends;      // per p
    std::vector<double> exit_times;         // E^0 tau (p = 0) per generation
    std::vector<double> walk_dimension;     // log(exit_times[k+1] / exit_times[k]) / log 3
};

/// Green columns g_{D_n}(0, .) m(.) of the generation-n carpet minus its far
/// shell, kept so that sums for any p can be formed later.
struct GreenColumns {
    int dim = 3;
    std::vector<int> generations;
    std::vector<VertexField> green_mass;      // zero off D_n
    std::vector<std::vector<int>> distance;   // graph distance from the origin
    std::vector<double> exit_times;
    std::vector<double> walk_dimension;
};

GreenColumns green_columns(int dim, const std::vector<int>& generations,
                           std::int64_t cell_budget = kDefaultCellBudget, const SolverOptions& opts = {});
GreenSweep a_infty_sums(const GreenColumns& cols, const std::vector<double>& ps);

/// E^0 A_inf = sum_x g_{D_n}(0, x) a(x)^{-1} m(x) with D_n the generation-n
/// carpet minus its far shell; one Green solve per generation serves every p.
GreenSweep a_infty_green(int dim, const std::vector<int>& generations, const std::vector<double>& ps,
                         std::int64_t cell_budget = kDefaultCellBudget, const SolverOptions& opts = {});

struct McShell {
    double radius = 0.0;
    std::vector<double> accumulated;  // A at first hitting of {d >= radius}, per walker
    double median = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
};

struct McReport {
    std::vector<McShell> shells;
    SequenceTrend median_trend;
    int walkers = 0;
    std::uint64_t seed = 0;
};

/// Continuous-time walks from the origin accumulating A_t = int a(W_s)^{-1} ds
/// until each shell radius is first reached. Walker i uses its own stream
/// derived from (seed, i), so output does not depend on the thread count.
McReport a_infty_mc(const DirichletForm& df, const TimeChangeSpec& spec, int walkers, const std::vector<double>& shells,
                    std::uint64_t seed, int threads = 1);

struct CriterionA {
    std::vector<double> sequence;  // theta_n m(U_n) / 4^n
    double log_slope = 0.0;        // slope of log sequence against n
    bool satisfied = false;
};
/// liminf theta_n m(U_n) / 4^n = 0, judged by a decreasing log-linear trend
/// ending below the first term.
CriterionA criterion_a(const std::vector<double>& theta, const std::vector<double>& mass);

struct CriterionB {
    std::vector<double> theta_over_n2;  // theta_n / n^2
    std::vector<double> b_needed;       // log m(U_n) / (2 (log n)^2), n >= 2
    bool satisfied = false;
};
/// theta_n <= c0^2 n^2 and m(U_n) <= exp(2 b (log n)^2), judged by both
/// sequences not exceeding their earlier maximum at the last ring.
CriterionB criterion_b(const std::vector<double>& theta, const std::vector<double>& mass);

struct ScomReport {
    std::string classification;  // "complete" or "inconclusive"
    double ring_ratio = 0.0;
    std::vector<double> radii;   // R^n
    std::vector<double> theta;   // theta_n for D_n inside D_{n+1}, time-changed measure
    std::vector<double> mass;    // m_a(U_n)
    FitReport theta_fit;         // log theta_n against log R^n, first ring dropped when rings >= 3
    bool theta_bounded = false;
    CriterionA a;
    CriterionB b;
};

/// Cutoff-Sobolev completeness criterion on d-balls D_n = B(origin, R^n),
/// n = 1..rings, with theta_n measured by csd_theta under m_a for the linear
/// cutoff of each ring.
ScomReport scom_check(const DirichletForm& df, const ScalingFunction& sf, const TimeChangeSpec& spec,
                      double ring_ratio, int rings, const FamilySpec& family = {}, double theta_growth_tol = 0.25);

}  // namespace carpetlab
