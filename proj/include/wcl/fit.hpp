#ifndef WCL_FIT_HPP
#define WCL_FIT_HPP

// Ordinary least squares y = slope*x + intercept, shared by the dimension
// estimator and the exponent fits.

#include <vector>

namespace wcl {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;  // sqrt(mean squared residual)
    double slope_stderr = 0.0;  // 0 when there are no spare degrees of freedom
};

// Requires at least 2 points and a nonconstant x; throws std::invalid_argument.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace wcl

#endif
