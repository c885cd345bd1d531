#pragma once

// Internal numerical kernels shared by the form and estimate modules.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <span>
#include <vector>

#include "carpetlab/form.hpp"

namespace carpetlab::detail {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// The generator restricted to a domain, with local numbering. Edges leaving
/// the domain still contribute to the diagonal (absorbing boundary); with
/// Domain::all() the result is the reflecting generator.
class RestrictedGenerator {
public:
    RestrictedGenerator(const DirichletForm& df, const Domain& domain);

    int size() const { return static_cast<int>(globals_.size()); }
    const std::vector<VertexId>& globals() const { return globals_; }
    const Eigen::VectorXd& measure() const { return measure_; }
    /// Local index of a global vertex, -1 if outside.
    int local(VertexId v) const { return local_[v]; }

    /// out = L_D in, column by column (local numbering).
    void apply(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const;
    /// max_x deg_c(x)/m(x): uniformization rate; the spectrum of -L_D lies in [0, 2 * rate].
    double rate() const { return rate_; }
    /// K_D with (K_D)_{xx} = deg_c(x), (K_D)_{xy} = -c_xy; -L_D = M^{-1} K_D.
    SparseMatrix stiffness() const;
    /// True iff every connected component of the domain touches its complement.
    bool every_component_absorbed() const;

    Eigen::VectorXd gather(std::span<const double> global) const;
    VertexField scatter(const Eigen::VectorXd& local_values, VertexId n) const;

private:
    std::vector<VertexId> globals_;
    std::vector<int> local_;
    Eigen::VectorXd measure_;
    Eigen::VectorXd diag_;  // deg_c(x)
    std::vector<int> offsets_;
    std::vector<int> cols_;
    std::vector<double> weights_;
    std::vector<char> touches_boundary_;
    double rate_ = 0.0;
};

/// Solves K x = b for SPD K (direct LDL^T or IC-preconditioned CG).
Eigen::VectorXd spd_solve(const SparseMatrix& K, const Eigen::VectorXd& b, const SolverOptions& opts);

/// Reusable SPD factorisation for repeated solves.
class SpdSolver {
public:
    SpdSolver(const SparseMatrix& K, const SolverOptions& opts);
    ~SpdSolver();
    SpdSolver(const SpdSolver&) = delete;
    SpdSolver& operator=(const SpdSolver&) = delete;
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

private:
    struct Impl;
    Impl* impl_;
};

/// exp(t L_D) F (each column) via Poisson-weighted powers of the uniformized chain.
Eigen::MatrixXd heat_uniformization(const RestrictedGenerator& gen, double t, const Eigen::MatrixXd& f, double tol);
/// exp(t L_D) F (each column) via a Chebyshev expansion on [0, 2 * rate].
Eigen::MatrixXd heat_chebyshev(const RestrictedGenerator& gen, double t, const Eigen::MatrixXd& f, double tol);

/// e^{-z} I_k(z) for k = 0..K, K chosen so the omitted tail sum is below tail_tol.
std::vector<double> scaled_bessel_i(double z, double tail_tol);

struct LanczosResult {
    std::vector<double> eigenvalues;         // ascending, smallest generalized eigenvalues of K v = lambda M v
    std::vector<Eigen::VectorXd> vectors;    // M-orthonormal
};

/// Lowest `count` eigenpairs of K v = lambda M v (K SPD, M diagonal positive)
/// by Lanczos on M^{1/2} K^{-1} M^{1/2} with full reorthogonalisation.
LanczosResult shift_invert_lanczos(const SparseMatrix& K, const Eigen::VectorXd& mass, int count, double rel_tol,
                                   const SolverOptions& opts);

}  // namespace carpetlab::detail
