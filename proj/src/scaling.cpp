#include "carpetlab/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace carpetlab {

ScalingFunction::ScalingFunction(double beta_local, double beta)
    : beta_local_(beta_local), beta_(beta) {
    if (!(beta_local >= 2.0) || !(beta >= 2.0) || !std::isfinite(beta_local) ||
        !std::isfinite(beta)) {
        throw std::invalid_argument("scaling exponents must be finite and >= 2");
    }
}

double ScalingFunction::beta1() const { return std::min(beta_local_, beta_); }
double ScalingFunction::beta2() const { return std::max(beta_local_, beta_); }

double ScalingFunction::operator()(double r) const {
    if (!(r >= 0.0)) throw std::invalid_argument("psi: negative radius");
    return r <= 1.0 ? std::pow(r, beta_local_) : std::pow(r, beta_);
}

double ScalingFunction::inverse(double s) const {
    if (!(s >= 0.0)) throw std::invalid_argument("psi_inv: negative argument");
    return s <= 1.0 ? std::pow(s, 1.0 / beta_local_) : std::pow(s, 1.0 / beta_);
}

double psi(const ScalingFunction& sf, double r) { return sf(r); }
double psi_inv(const ScalingFunction& sf, double s) { return sf.inverse(s); }

namespace {

double objective(const ScalingFunction& sf, double R, double t, double s) {
    return R / s - t / sf(s);
}

// Stationary point of R/s - t s^{-b}: s* = (b t / R)^{1/(b-1)}, value (R/s*)(1 - 1/b).
double branch_stationary(double R, double t, double b) {
    return std::pow(b * t / R, 1.0 / (b - 1.0));
}

}  // namespace

double phi(const ScalingFunction& sf, double R, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("phi: t must be positive");
    if (!(R >= 0.0)) throw std::invalid_argument("phi: R must be nonnegative");
    if (R == 0.0) return 0.0;

    double best = 0.0;  // limit s -> infinity
    best = std::max(best, R - t);  // breakpoint s = 1

    const double s_local = branch_stationary(R, t, sf.beta_local());
    if (s_local <= 1.0) {
        best = std::max(best, (R / s_local) * (1.0 - 1.0 / sf.beta_local()));
    }
    const double s_global = branch_stationary(R, t, sf.beta());
    if (s_global > 1.0) {
        best = std::max(best, (R / s_global) * (1.0 - 1.0 / sf.beta()));
    }
    return best;
}

double phi_grid_search(const ScalingFunction& sf, double R, double t, int points) {
    if (!(t > 0.0)) throw std::invalid_argument("phi: t must be positive");
    if (!(R >= 0.0)) throw std::invalid_argument("phi: R must be nonnegative");
    if (points < 3) throw std::invalid_argument("phi_grid_search: need >= 3 points");
    if (R == 0.0) return 0.0;

    const double eps = 1e-12;
    const double lo = std::log(1e-6 * R + eps);
    const double hi = std::log(1e6 * R + 1.0);
    const double step = (hi - lo) / (points - 1);

    int best_i = 0;
    double best = -INFINITY;
    for (int i = 0; i < points; ++i) {
        const double v = objective(sf, R, t, std::exp(lo + i * step));
        if (v > best) {
            best = v;
            best_i = i;
        }
    }

    // Golden-section on log s within the neighbouring grid cells.
    double a = lo + std::max(0, best_i - 1) * step;
    double b = lo + std::min(points - 1, best_i + 1) * step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = objective(sf, R, t, std::exp(c));
    double fd = objective(sf, R, t, std::exp(d));
    for (int it = 0; it < 200 && (b - a) > 1e-15; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(sf, R, t, std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(sf, R, t, std::exp(d));
        }
    }
    best = std::max({best, fc, fd, objective(sf, R, t, 1.0)});
    return std::max(best, 0.0);
}

}  // namespace carpetlab
