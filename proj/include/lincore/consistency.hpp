#pragma once

// Binary calibration machinery: the estimation-error transformation T, the
// restricted-interval pair optimizer, and the biased-coin rate experiment.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lincore/minimize.hpp"
#include "lincore/scalar_losses.hpp"

namespace lincore {

/// A decreasing convex margin loss phi(u): either a linear-core surrogate or
/// a plain base evaluated as phi(u) = Phi(-u) (the "logistic" and
/// "exponential" baselines).
class MarginLoss {
public:
    static MarginLoss linear_core(const LinearCoreSpec& spec) { return MarginLoss(spec); }
    static MarginLoss plain(const BaseLoss& base) { return MarginLoss(base); }

    double value(double u) const;
    double derivative(double u) const;
    std::string name() const;
    bool is_linear_core() const { return spec_.has_value(); }
    const std::optional<LinearCoreSpec>& spec() const { return spec_; }
    /// Half-width used to seed minimizer brackets (tau for LC, 1 otherwise).
    double scale() const { return spec_ ? spec_->tau() : 1.0; }

private:
    explicit MarginLoss(const LinearCoreSpec& spec) : spec_(spec), base_(spec.base()) {}
    explicit MarginLoss(const BaseLoss& base) : base_(base) {}

    std::optional<LinearCoreSpec> spec_;
    BaseLoss base_;
};

struct RatePoint {
    double delta = 0.0;
    double excess_surrogate = 0.0;
    double excess_target = 0.0;
    std::string loss_name;
};

/// g(u) = (1-t)/2 phi(-u) + (1+t)/2 phi(u). Zero-weight terms are skipped.
double conditional_objective(const MarginLoss& loss, double t, double u);

/// inf_u g(u) for the conditional objective, via minimize_convex.
MinimizeResult conditional_infimum(const MarginLoss& loss, double t);

/// T(t) = phi(0) - inf_u g(u).
double transformation_T(const MarginLoss& loss, double t);

struct PairInfimum {
    double value = 0.0;
    double minimizer = 0.0;
};

/// Closed form of inf over u in [-1, 1] of a*phi(-u) + b*phi(u) for a unit
/// core (symmetric or one-sided, they coincide there):
/// (a+b) Phi(0)/Phi'(0) + 2 min{a,b}; u* = -1 when a > b, +1 otherwise.
PairInfimum restricted_pair_infimum(const BaseLoss& base, double a, double b);

/// inf over u in R of a*phi(u) + b*phi(-u). Used for pairwise best-in-class
/// conditional errors in the multi-class and structured oracles.
double pair_infimum(const LinearCoreSpec& spec, double a, double b);

std::vector<RatePoint> biased_coin_curve(const MarginLoss& loss, std::span<const double> deltas);

/// Least-squares slope of log(excess_target) against log(excess_surrogate).
double fit_loglog_slope(std::span<const RatePoint> points);

/// n log-spaced values between lo and hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);

struct TauSweepRow {
    double tau = 0.0;
    double slope = 0.0;
    /// min over the t grid of T(t) - t/tau.
    double min_gap_t_over_tau = 0.0;
    /// min over the t grid of T(t) - tau*t (the bound the linear core gives).
    double min_gap_tau_t = 0.0;
    double t_at_zero = 0.0;
};

std::vector<TauSweepRow> tau_sweep(const BaseLoss& base, std::span<const double> taus,
                                   std::span<const double> deltas, int bound_grid_points = 200,
                                   CoreSide side = CoreSide::Symmetric);

}  // namespace lincore
