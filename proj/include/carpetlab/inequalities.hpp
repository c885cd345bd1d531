#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "carpetlab/fit.hpp"
#include "carpetlab/form.hpp"
#include "carpetlab/scaling.hpp"

namespace carpetlab {

enum class CutoffKind { linear, resolvent, improved, covermax };
const char* to_string(CutoffKind kind);

/// A [0,1]-valued field equal to 1 on `inner` and 0 off `outer`, built for the
/// ball pair B(center, R) inside B(center, R + r).
struct CutoffFn {
    VertexField values;
    VertexSet inner;  // dist <= R
    VertexSet outer;  // dist < R + r
    CutoffKind kind = CutoffKind::linear;
    VertexId center = 0;
    double R = 0.0;
    double r = 0.0;

    // Construction diagnostics; which ones are meaningful depends on `kind`.
    double calibration = 0.0;  // resolvent: c1 used in phi = min(1, c1 h / Psi(r))
    double lambda = 0.0;       // improved: shell decay rate
    int shells = 0;            // improved: number of shells used
    bool fallback = false;     // improved: too narrow for two shells
    int pieces = 0;            // covermax: number of covering balls
    int overlap = 0;           // covermax: max number of piece supports meeting at one vertex
    bool gamma_dominated = true;  // covermax: Gamma(phi) <= sum_i Gamma(phi_i) at every vertex
};

/// Builds a cutoff for B(x0, R) inside B(x0, R + r); min_width is the
/// smallest annulus width it accepts.
struct CutoffBuilder {
    std::function<CutoffFn(VertexId, double, double)> build;
    double min_width = 1.0;
    std::string name;
};

/// phi(x) = clamp((R + r - dist(x0, x)) / r, 0, 1).
CutoffFn cutoff_linear(const Graph& g, VertexId x0, double R, double r);

/// Resolvent cutoff: h solves (1/Psi(r) - L) h = 1_{D1} on the annulus
/// D0 = {R + r/10 < d < R + 9r/10} with zero outside, D1 = {R + r/5 < d < R + 4r/5};
/// phi = 1 on B(x0, R + r/2) and min(1, c1 h / Psi(r)) elsewhere. A
/// non-positive c1 is calibrated as Psi(r) / min h over D2 = {R + 2r/5 < d < R + 3r/5}.
CutoffFn cutoff_resolvent(const DirichletForm& df, const ScalingFunction& sf, VertexId x0, double R, double r,
                          double c1 = 0.0);

/// Weighted shell sum phi = sum_n (b_{n-1} - b_n) phi_n with b_n = e^{-n lambda}
/// and shell widths s_n = c0 r e^{-n lambda / beta2}; lambda solves
/// c1 (e^lambda - 1)^2 = 1/8 (lambda = 1 when c1 = 0).
CutoffFn cutoff_improve(const DirichletForm& df, const ScalingFunction& sf, VertexId x0, double R, double r,
                        const CutoffBuilder& weak, double c1);

/// Pointwise max of per-ball cutoffs for B(z, r/3) inside B(z, 2r/3) over a
/// greedy maximal r/3-packing of B(x0, R).
CutoffFn cutoff_cover_max(const DirichletForm& df, VertexId x0, double R, double r, const CutoffBuilder& ball_builder);

CutoffBuilder linear_builder(const Graph& g);
CutoffBuilder resolvent_builder(const DirichletForm& df, const ScalingFunction& sf);
/// Resolvent cutoff when the width allows it, linear otherwise.
CutoffBuilder auto_builder(const DirichletForm& df, const ScalingFunction& sf);

/// Vertices carrying the transition of phi: 0 < phi < 1, or phi differs from a
/// neighbour. This is where the graph energy measure of phi lives.
VertexSet cutoff_annulus(const Graph& g, const CutoffFn& phi);

struct FamilySpec {
    int eigenvectors = 4;
    int harmonic = 3;
    int smooth_fields = 50;
    std::uint64_t seed = 1;
};

struct TestFamily {
    std::vector<VertexField> fields;
    std::vector<std::string> labels;
};

/// Constants, coordinate functions, low Dirichlet modes of a neighbourhood of
/// the annulus, harmonic extensions of boundary noise and heat-smoothed white
/// noise (killed heat flow for `smoothing_time` near the annulus).
TestFamily default_test_family(const DirichletForm& df, const VertexSet& annulus, double smoothing_time,
                               const FamilySpec& spec = {});

struct CsdReport {
    double theta_star = 0.0;
    double R = 0.0;
    double r = 0.0;
    VertexId center = 0;
    int family_size = 0;
    int argmax = -1;  // index of the maximising field, -1 when theta_star = 0
    int annulus_size = 0;
};

/// theta* = max_f [sum_U f^2 Gamma(phi) - 1/8 sum_U phi^2 Gamma(f)]_+ / sum_U f^2 m.
/// The annulus defaults to cutoff_annulus(phi).
CsdReport csd_theta(const DirichletForm& df, const CutoffFn& phi, const std::vector<VertexField>& family,
                    const VertexSet* annulus = nullptr);

struct CsaScan {
    std::vector<CsdReport> reports;
    std::vector<double> widths;          // distinct r values
    std::vector<double> theta_max;       // max theta* per width
    std::vector<double> cs_per_width;    // max theta* Psi(r) per width
    FitReport fit;                        // log theta_max against log r (needs >= 2 widths)
    double cs_estimate = 0.0;             // max theta* Psi(r) overall
    double cs_spread = 0.0;               // max/min of cs_per_width
};

CsaScan csa_scan(const DirichletForm& df, const ScalingFunction& sf, const std::vector<VertexId>& centers,
                 const std::vector<double>& inner_radii, const std::vector<double>& widths, const CutoffBuilder& builder,
                 const FamilySpec& family = {}, int threads = 1);

struct FkSample {
    VertexId center = 0;
    double r = 0.0;
    std::string kind;  // "ball", "subball", "growth"
    double ball_measure = 0.0;
    double domain_measure = 0.0;
    double lambda1 = 0.0;
    double value = 0.0;  // lambda1 Psi(r) (m(D)/m(B))^nu
};

struct FkReport {
    double c_f_estimate = 0.0;
    double nu = 0.0;
    int samples = 0;
    int monotonicity_violations = 0;  // sampled D inside B with lambda1(D) < lambda1(B)
    std::vector<FkSample> details;
};

/// Random balls B(x, r) (r drawn from `radii`) and random connected D inside
/// each: the ball itself, a sub-ball intersected with B, or a randomly grown
/// connected subgraph.
FkReport fk_scan(const DirichletForm& df, const ScalingFunction& sf, double nu, int samples, std::uint64_t seed,
                 const std::vector<double>& radii, int threads = 1);

struct CacciopoliParams {
    VertexId x0 = 0;
    double R = 0.0;    // domain B = B(x0, R); cutoff for B(x0, R - r) inside B
    double r = 0.0;
    double T = 1.0;
    double level = 0.0;
    int trials = 20;
    std::uint64_t seed = 1;
    int time_intervals = 64;
};

struct CacciopoliReport {
    double max_ratio = 0.0;
    double theta = 0.0;
    double K = 0.0;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> ratios;
};

/// Evaluates both sides of the Cacciopoli inequality
///   sum_B v(T)^2 eta(T)^2 m + (2/9) int_0^T E(eta v) dt <= 2((20/9) theta + K) int_0^T sum_B v^2 m dt
/// for v = (u - level)_+, u a killed caloric function on B with random
/// nonnegative initial data, eta = phi k(t), k = min(1, t/T1), T1 = T/2, K = 1/T1.
/// Time integrals use composite Simpson on time_intervals steps.
CacciopoliReport cacciopoli_check(const DirichletForm& df, const CutoffFn& phi, double theta,
                                  const CacciopoliParams& params);

struct StabilityReport {
    double factor_bound = 1.0;  // C
    bool gamma_sandwich = true;
    std::vector<double> c1_grid;
    std::vector<double> c2_original;   // c2(c1) for the original form
    std::vector<double> c2_perturbed;  // c2'(C^2 c1) for the perturbed form
    std::vector<double> c1_min_original;   // minimal c1 achieving c2(c1_grid[i]) on the original form
    std::vector<double> c1_min_perturbed;  // minimal c1' achieving C * that c2 on the perturbed form
    double worst_c2_ratio = 0.0;  // max c2'(C^2 c1) / (C c2(c1))
    double worst_c1_ratio = 0.0;  // max c1'_min / (C^2 c1_min)
    bool c1_ok = true;
    bool c2_ok = true;
    double theta_original = 0.0;
    double theta_perturbed = 0.0;
};

/// Weak cutoff-Sobolev constants: for a given c1, the least c2 with
///   sum_U f^2 Gamma(phi) <= c1 sum_U Gamma(f) + c2 Psi(r)^{-1} sum_U f^2 m
/// over the family.
double weak_c2(const DirichletForm& df, const CutoffFn& phi, const std::vector<VertexField>& family,
               const VertexSet& annulus, double psi_r, double c1);
/// Least c1 for a given c2 (infinite when impossible).
double weak_c1(const DirichletForm& df, const CutoffFn& phi, const std::vector<VertexField>& family,
               const VertexSet& annulus, double psi_r, double c2);

/// Rebuilds the form with conductances multiplied by `factors` (each in
/// [1/C, C]) and compares the weak constants of the same cutoff and family.
StabilityReport stability_check(const DirichletForm& df, std::span<const double> factors, double C,
                                const CutoffFn& phi, const std::vector<VertexField>& family, double psi_r,
                                double tolerance = 0.01);

}  // namespace carpetlab
