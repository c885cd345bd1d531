#include "carpetlab/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace carpetlab {

FitReport linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit: length mismatch");
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2) throw std::invalid_argument("fit: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw std::invalid_argument("fit: non-finite sample");
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 1e-300)) throw std::invalid_argument("fit: abscissae are all equal");

    FitReport rep;
    rep.exponent = sxy / sxx;
    rep.intercept = my - rep.exponent * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (rep.intercept + rep.exponent * x[i]);
        rep.residuals.push_back(r);
        ss_res += r * r;
        rep.grid.emplace_back(x[i], y[i]);
    }
    rep.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
    return rep;
}

FitReport loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit: length mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive samples");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    auto rep = linear_fit(lx, ly);
    for (std::size_t i = 0; i < x.size(); ++i) rep.grid[i] = {x[i], y[i]};
    return rep;
}

}  // namespace carpetlab
