#include "lincore/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lincore/errors.hpp"

namespace lincore {

double MarginLoss::value(double u) const {
    if (spec_) {
        return lc_value(*spec_, u);
    }
    return base_.value(-u);
}

double MarginLoss::derivative(double u) const {
    if (spec_) {
        return lc_derivative(*spec_, u);
    }
    return -base_.derivative(-u);
}

std::string MarginLoss::name() const { return spec_ ? spec_->name() : base_.name(); }

namespace {

void check_t(double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        std::ostringstream os;
        os << "t must lie in [0, 1], got " << t;
        throw DomainError(os.str());
    }
}

double objective_derivative(const MarginLoss& loss, double t, double u) {
    const double wl = 0.5 * (1.0 - t);
    const double wr = 0.5 * (1.0 + t);
    double d = 0.0;
    if (wl > 0.0) {
        d -= wl * loss.derivative(-u);
    }
    if (wr > 0.0) {
        d += wr * loss.derivative(u);
    }
    return d;
}

}  // namespace

double conditional_objective(const MarginLoss& loss, double t, double u) {
    check_t(t);
    const double wl = 0.5 * (1.0 - t);
    const double wr = 0.5 * (1.0 + t);
    double g = 0.0;
    if (wl > 0.0) {
        g += wl * loss.value(-u);
    }
    if (wr > 0.0) {
        g += wr * loss.value(u);
    }
    return g;
}

MinimizeResult conditional_infimum(const MarginLoss& loss, double t) {
    check_t(t);
    const double w = 2.0 * loss.scale() + 8.0;
    return minimize_convex([&](double u) { return conditional_objective(loss, t, u); },
                           [&](double u) { return objective_derivative(loss, t, u); }, -w, w);
}

double transformation_T(const MarginLoss& loss, double t) {
    const MinimizeResult r = conditional_infimum(loss, t);
    return loss.value(0.0) - r.value;
}

PairInfimum restricted_pair_infimum(const BaseLoss& base, double a, double b) {
    if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("restricted_pair_infimum: weights must be finite and non-negative");
    }
    if (a + b <= 0.0) {
        throw DomainError("restricted_pair_infimum: weights must not both be zero");
    }
    PairInfimum r;
    r.value = (a + b) * base.core_offset() + 2.0 * std::min(a, b);
    r.minimizer = a > b ? -1.0 : 1.0;
    return r;
}

double pair_infimum(const LinearCoreSpec& spec, double a, double b) {
    if (!(a >= 0.0) || !(b >= 0.0)) {
        throw DomainError("pair_infimum: weights must be non-negative");
    }
    if (a == 0.0 && b == 0.0) {
        return 0.0;
    }
    auto f = [&](double u) {
        double v = 0.0;
        if (a > 0.0) v += a * lc_value(spec, u);
        if (b > 0.0) v += b * lc_value(spec, -u);
        return v;
    };
    auto df = [&](double u) {
        double d = 0.0;
        if (a > 0.0) d += a * lc_derivative(spec, u);
        if (b > 0.0) d -= b * lc_derivative(spec, -u);
        return d;
    };
    const double w = 2.0 * spec.tau() + 8.0;
    return minimize_convex(f, df, -w, w).value;
}

std::vector<RatePoint> biased_coin_curve(const MarginLoss& loss, std::span<const double> deltas) {
    std::vector<RatePoint> out;
    out.reserve(deltas.size());
    for (double delta : deltas) {
        if (!(delta > 0.0 && delta < 0.5)) {
            std::ostringstream os;
            os << "biased coin margin delta must lie in (0, 1/2), got " << delta;
            throw DomainError(os.str());
        }
        // eta = 1/2 + delta: the sign-wrong classifier pays 2*delta excess
        // 0-1 error, and the tight transformation gives its minimal surrogate
        // excess.
        RatePoint p;
        p.delta = delta;
        p.excess_target = 2.0 * delta;
        p.excess_surrogate = transformation_T(loss, 2.0 * delta);
        p.loss_name = loss.name();
        out.push_back(std::move(p));
    }
    return out;
}

double fit_loglog_slope(std::span<const RatePoint> points) {
    if (points.size() < 5) {
        throw DomainError("fit_loglog_slope: need at least 5 points");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(points.size());
    for (const RatePoint& p : points) {
        if (!(p.excess_surrogate > 0.0) || !(p.excess_target > 0.0)) {
            throw DomainError("fit_loglog_slope: excesses must be positive");
        }
        const double x = std::log(p.excess_surrogate);
        const double y = std::log(p.excess_target);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) {
        throw DomainError("fit_loglog_slope: degenerate abscissae");
    }
    return (n * sxy - sx * sy) / denom;
}

std::vector<double> logspace(double lo, double hi, int n) {
    if (n < 2 || !(lo > 0.0) || !(hi > lo)) {
        throw DomainError("logspace: need n >= 2 and 0 < lo < hi");
    }
    std::vector<double> v(static_cast<std::size_t>(n));
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
    }
    return v;
}

std::vector<TauSweepRow> tau_sweep(const BaseLoss& base, std::span<const double> taus,
                                   std::span<const double> deltas, int bound_grid_points,
                                   CoreSide side) {
    std::vector<TauSweepRow> rows;
    for (double tau : taus) {
        const MarginLoss loss = MarginLoss::linear_core(LinearCoreSpec(base, side, tau));
        TauSweepRow row;
        row.tau = tau;
        const auto curve = biased_coin_curve(loss, deltas);
        row.slope = fit_loglog_slope(curve);
        row.min_gap_t_over_tau = INFINITY;
        row.min_gap_tau_t = INFINITY;
        for (int i = 0; i < bound_grid_points; ++i) {
            const double t = bound_grid_points > 1 ? static_cast<double>(i) / (bound_grid_points - 1) : 0.0;
            const double T = transformation_T(loss, t);
            row.min_gap_t_over_tau = std::min(row.min_gap_t_over_tau, T - t / tau);
            row.min_gap_tau_t = std::min(row.min_gap_tau_t, T - tau * t);
            if (i == 0) {
                row.t_at_zero = T;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace lincore
