#include "lincore/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lincore/errors.hpp"

namespace lincore {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // 1/golden ratio

struct Counter {
    const std::function<double(double)>& f;
    int n = 0;
    double best_x = 0.0;
    double best_f = INFINITY;

    double operator()(double x) {
        const double v = f(x);
        ++n;
        if (v < best_f) {
            best_f = v;
            best_x = x;
        }
        return v;
    }
};

MinimizeResult golden(Counter& eval, double a, double b, const MinimizeOptions& options) {
    eval(a);
    eval(b);
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = eval(c);
    double fd = eval(d);
    for (int it = 0; it < 400; ++it) {
        const double scale = std::max(1.0, std::abs(0.5 * (a + b)));
        if (b - a <= options.x_tolerance * scale) {
            break;
        }
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = eval(d);
        }
    }
    eval(0.5 * (a + b));
    MinimizeResult r;
    r.argmin = eval.best_x;
    r.value = eval.best_f;
    r.evaluations = eval.n;
    return r;
}

}  // namespace

MinimizeResult minimize_convex(const std::function<double(double)>& f,
                               const std::function<double(double)>& df, double lo, double hi,
                               const MinimizeOptions& options) {
    if (!(lo < hi)) {
        throw DomainError("minimize_convex: empty initial bracket");
    }
    Counter eval{f};

    // Grow left edge while the function is still decreasing to the left.
    double f_lo = eval(lo);
    while (df(lo) > 0.0) {
        const double next = lo - (hi - lo);
        const double f_next = eval(next);
        if (f_lo - f_next < options.asymptotic_decrease) {
            MinimizeResult r{next, std::min(f_next, f_lo), true, eval.n};
            return r;
        }
        lo = next;
        f_lo = f_next;
        if (hi - lo > options.width_cap) {
            std::ostringstream os;
            os << "minimize_convex: bracket width exceeded " << options.width_cap << " at lo=" << lo
               << " (f=" << f_lo << ", df=" << df(lo) << ")";
            throw NumericError(os.str());
        }
    }
    double f_hi = eval(hi);
    while (df(hi) < 0.0) {
        const double next = hi + (hi - lo);
        const double f_next = eval(next);
        if (f_hi - f_next < options.asymptotic_decrease) {
            MinimizeResult r{next, std::min(f_next, f_hi), true, eval.n};
            return r;
        }
        hi = next;
        f_hi = f_next;
        if (hi - lo > options.width_cap) {
            std::ostringstream os;
            os << "minimize_convex: bracket width exceeded " << options.width_cap << " at hi=" << hi
               << " (f=" << f_hi << ", df=" << df(hi) << ")";
            throw NumericError(os.str());
        }
    }
    return golden(eval, lo, hi, options);
}

MinimizeResult minimize_on_interval(const std::function<double(double)>& f, double lo, double hi,
                                    const MinimizeOptions& options) {
    if (!(lo <= hi)) {
        throw DomainError("minimize_on_interval: lo > hi");
    }
    Counter eval{f};
    if (lo == hi) {
        return MinimizeResult{lo, eval(lo), false, eval.n};
    }
    return golden(eval, lo, hi, options);
}

}  // namespace lincore
