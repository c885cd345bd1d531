#pragma once

#include <utility>
#include <vector>

namespace carpetlab {

/// Least-squares line through (log x, log y) or (x, y) samples.
struct FitReport {
    double exponent = 0.0;   // slope
    double intercept = 0.0;
    double r_squared = 0.0;  // in [0,1]; 1 when the ordinates are exactly collinear
    std::vector<std::pair<double, double>> grid;  // raw (abscissa, ordinate)
    std::vector<double> residuals;                // in the fitted (possibly log) space
};

/// Ordinary least squares of y on x; requires >= 2 distinct abscissae.
FitReport linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of log y against log x; all values must be positive.
FitReport loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace carpetlab
