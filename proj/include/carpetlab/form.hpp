#pragma once

#include <memory>
#include <span>
#include <vector>

#include "carpetlab/graph.hpp"

namespace carpetlab {

/// Scalar field on the vertices, indexed by vertex id.
using VertexField = std::vector<double>;

/// Graph Dirichlet form E(f,f) = sum_{edges {x,y}} c_xy (f(x) - f(y))^2 on L^2(m).
///
/// Generator: Lf(x) = m(x)^{-1} sum_y c_xy (f(y) - f(x)), so E(f,g) = -<Lf, g>_m.
/// Immutable after construction.
class DirichletForm {
public:
    /// Unit conductances and the graph's vertex measure.
    explicit DirichletForm(std::shared_ptr<const Graph> graph);
    DirichletForm(std::shared_ptr<const Graph> graph, std::vector<double> conductances,
                  std::vector<double> measure = {});

    const Graph& graph() const { return *graph_; }
    std::shared_ptr<const Graph> graph_ptr() const { return graph_; }
    VertexId size() const { return graph_->size(); }

    /// Per edge id.
    const std::vector<double>& conductances() const { return conductances_; }
    const std::vector<double>& measure() const { return measure_; }
    double weighted_degree(VertexId v) const;

    /// Same conductances on a different reference measure.
    DirichletForm with_measure(std::vector<double> measure) const;
    /// Conductances multiplied edge-wise by `factors`.
    DirichletForm with_conductance_factors(std::span<const double> factors) const;

private:
    std::shared_ptr<const Graph> graph_;
    std::vector<double> conductances_;
    std::vector<double> measure_;
};

/// Either the whole vertex set (reflecting) or a subset with the complement
/// acting as an absorbing (Dirichlet) boundary.
class Domain {
public:
    static Domain all() { return Domain(); }
    static Domain of(VertexSet vertices) { return Domain(std::move(vertices)); }

    bool is_all() const { return all_; }
    const VertexSet& vertices() const { return vertices_; }

private:
    Domain() : all_(true) {}
    explicit Domain(VertexSet v) : all_(false), vertices_(std::move(v)) {}
    bool all_;
    VertexSet vertices_;
};

struct EnergyResult {
    double energy = 0.0;
    VertexField gamma;  // Gamma(f,f)(x) = 1/2 sum_{y~x} c_xy (f(x)-f(y))^2
};

EnergyResult energy_and_measure(const DirichletForm& df, std::span<const double> f);
/// Polarised energy density Gamma(f,g)(x).
VertexField gamma_bilinear(const DirichletForm& df, std::span<const double> f, std::span<const double> g);
double energy(const DirichletForm& df, std::span<const double> f);

struct SolverOptions {
    /// Direct sparse LDL^T up to this many unknowns; preconditioned CG beyond.
    int direct_limit = 80000;
    double cg_tolerance = 1e-10;
};

/// Smallest eigenvalue of -L restricted to `domain` with zero boundary values,
/// by shift-invert Lanczos with full reorthogonalisation.
double lambda1_dirichlet(const DirichletForm& df, const VertexSet& domain, double rel_tol = 1e-10);
/// Dense symmetric eigensolve of the same problem (reference path, small domains).
double lambda1_dirichlet_dense(const DirichletForm& df, const VertexSet& domain);

struct DirichletModes {
    std::vector<double> eigenvalues;       // ascending
    std::vector<VertexField> eigenvectors;  // full-length, m-normalised, zero off the domain
};
DirichletModes lowest_dirichlet_modes(const DirichletForm& df, const VertexSet& domain, int count,
                                      double rel_tol = 1e-10);

/// Solves (lambda - L_D) u = rhs on the domain, u = 0 outside.
VertexField resolvent_solve(const DirichletForm& df, const VertexSet& domain, double lambda,
                            std::span<const double> rhs, const SolverOptions& opts = {});

enum class HeatMethod { automatic, uniformization, chebyshev };

struct HeatOptions {
    HeatMethod method = HeatMethod::automatic;
    /// Automatic mode uses uniformization while rate * t stays below this.
    double uniformization_limit = 400.0;
};

/// exp(t L) f (reflecting) or exp(t L_D) f (killed outside the domain), with
/// max-norm error below tol.
VertexField heat_apply(const DirichletForm& df, const Domain& domain, double t, std::span<const double> f,
                       double tol = 1e-9, const HeatOptions& opts = {});

/// heat_apply on several fields at once (shared operator sweeps).
std::vector<VertexField> heat_apply_many(const DirichletForm& df, const Domain& domain, double t,
                                         const std::vector<VertexField>& fs, double tol = 1e-9,
                                         const HeatOptions& opts = {});

/// y -> p_t(x0, y) for the reflecting semigroup (or the killed one on `domain`).
VertexField heat_kernel_column(const DirichletForm& df, VertexId x0, double t, double tol = 1e-12,
                               const Domain& domain = Domain::all());

/// Killed Green function y -> g_D(x0, y).
VertexField green_column(const DirichletForm& df, const VertexSet& domain, VertexId x0,
                         const SolverOptions& opts = {});

/// Mean exit time u(x) = E^x tau_D from L_D u = -1, u = 0 outside.
VertexField exit_time_solve(const DirichletForm& df, const VertexSet& domain, const SolverOptions& opts = {});

/// u = boundary values off the domain, L u = 0 on the domain.
VertexField harmonic_extension(const DirichletForm& df, const VertexSet& domain,
                               std::span<const double> outside_values, const SolverOptions& opts = {});

/// <f, g>_m.
double inner_m(const DirichletForm& df, std::span<const double> f, std::span<const double> g);

}  // namespace carpetlab
