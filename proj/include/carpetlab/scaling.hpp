#pragma once

namespace carpetlab {

/// Piecewise-power space-time scaling: r^beta_local on [0,1], r^beta beyond.
///
/// Both exponents must be at least 2. The function is continuous and strictly
/// increasing with psi(1) = 1, and satisfies
///   (R/r)^beta1 <= psi(R)/psi(r) <= (R/r)^beta2   for 0 < r < R,
/// where beta1/beta2 are the smaller/larger exponent.
class ScalingFunction {
public:
    ScalingFunction(double beta_local, double beta);

    double beta_local() const { return beta_local_; }
    double beta() const { return beta_; }
    double beta1() const;
    double beta2() const;

    double operator()(double r) const;
    double inverse(double s) const;

private:
    double beta_local_;
    double beta_;
};

double psi(const ScalingFunction& sf, double r);
double psi_inv(const ScalingFunction& sf, double s);

/// sup_{s>0} (R/s - t/psi(s)), evaluated exactly from the stationary points of
/// the two power branches and the breakpoint s = 1.
double phi(const ScalingFunction& sf, double R, double t);

/// Brute-force counterpart of phi(): log-spaced grid over
/// s in [1e-6 R + eps, 1e6 R + 1] followed by golden-section refinement around
/// the best grid point. Used as a cross-check only.
double phi_grid_search(const ScalingFunction& sf, double R, double t, int points = 2000);

}  // namespace carpetlab
