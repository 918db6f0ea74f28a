#pragma once

#include <functional>

namespace lincore {

struct MinimizeResult {
    double argmin = 0.0;
    double value = 0.0;
    /// True when the objective keeps decreasing toward an infinite edge and
    /// the returned value is the (numerically converged) asymptotic infimum.
    bool asymptotic = false;
    int evaluations = 0;
};

struct MinimizeOptions {
    double x_tolerance = 1e-11;
    double width_cap = 1e6;
    double asymptotic_decrease = 1e-12;
};

/// Global minimum of a convex 1-D function.
///
/// The bracket [lo, hi] is doubled outward until the derivative is <= 0 at
/// lo and >= 0 at hi, then golden-section search narrows it. If the value
/// decrease over one doubling drops below options.asymptotic_decrease the
/// infimum is taken as not attained and the edge value is returned.
MinimizeResult minimize_convex(const std::function<double(double)>& f,
                               const std::function<double(double)>& df, double lo, double hi,
                               const MinimizeOptions& options = {});

/// Minimum of a convex function restricted to [lo, hi] (no bracket growth).
MinimizeResult minimize_on_interval(const std::function<double(double)>& f, double lo, double hi,
                                    const MinimizeOptions& options = {});

}  // namespace lincore
