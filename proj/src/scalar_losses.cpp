#include "lincore/scalar_losses.hpp"

#include <cmath>
#include <sstream>

#include "lincore/errors.hpp"

namespace lincore {

namespace {

void require_finite(double u, const char* what) {
    if (!std::isfinite(u)) {
        throw DomainError(std::string(what) + ": non-finite argument");
    }
}

double checked_exp(double z) {
    if (z > BaseLoss::kExpLimit) {
        std::ostringstream os;
        os << "exponential base overflow at argument " << z;
        throw OverflowError(os.str());
    }
    return std::exp(z);
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Exponential tails grow like e^{|u|} on the symmetric left branch; the
// limit is applied to |u| so callers see the failure at the input boundary.
void check_exp_input(const LinearCoreSpec& spec, double u) {
    if (spec.base().kind() == BaseKind::Exponential && std::abs(u) > BaseLoss::kExpLimit) {
        std::ostringstream os;
        os << "exponential linear-core input |u| > " << BaseLoss::kExpLimit << " (u = " << u << ")";
        throw OverflowError(os.str());
    }
}

enum class Branch { Left, Core, Right };

Branch branch_at(const LinearCoreSpec& spec, double u) {
    const double tau = spec.tau();
    if (u > tau) {
        return Branch::Right;
    }
    if (u < -tau && spec.side() == CoreSide::Symmetric) {
        return Branch::Left;
    }
    return Branch::Core;
}

}  // namespace

BaseLoss BaseLoss::quartic_linear(double a, double k) {
    if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(k)) {
        throw DomainError("quartic-linear base requires finite a > 0 and finite K");
    }
    return BaseLoss(BaseKind::QuarticLinear, a, k);
}

std::string BaseLoss::name() const {
    switch (kind_) {
        case BaseKind::Logistic: return "logistic";
        case BaseKind::Exponential: return "exponential";
        case BaseKind::QuarticLinear: return "quartic";
    }
    return "unknown";
}

double BaseLoss::value(double u) const {
    require_finite(u, "base value");
    switch (kind_) {
        case BaseKind::Logistic:
            // log(1 + e^u) without overflow
            return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
        case BaseKind::Exponential:
            return checked_exp(u);
        case BaseKind::QuarticLinear: {
            const double u2 = u * u;
            return a_ * u + u2 * u2 / 12.0 + k_;
        }
    }
    return 0.0;
}

double BaseLoss::derivative(double u) const {
    require_finite(u, "base derivative");
    switch (kind_) {
        case BaseKind::Logistic: return sigmoid(u);
        case BaseKind::Exponential: return checked_exp(u);
        case BaseKind::QuarticLinear: return a_ + u * u * u / 3.0;
    }
    return 0.0;
}

double BaseLoss::second_derivative(double u) const {
    require_finite(u, "base second derivative");
    switch (kind_) {
        case BaseKind::Logistic: {
            const double s = sigmoid(u);
            return s * (1.0 - s);
        }
        case BaseKind::Exponential: return checked_exp(u);
        case BaseKind::QuarticLinear: return u * u;
    }
    return 0.0;
}

LinearCoreSpec::LinearCoreSpec(BaseLoss base, CoreSide side, double tau)
    : base_(base), side_(side), tau_(tau) {
    if (!std::isfinite(tau) || tau < kMinTau) {
        std::ostringstream os;
        os << "linear-core half-width tau must be finite and >= " << kMinTau << ", got " << tau;
        throw DomainError(os.str());
    }
}

std::string LinearCoreSpec::name() const {
    std::ostringstream os;
    os << "lc-" << base_.name() << (side_ == CoreSide::OneSided ? "-onesided" : "");
    if (tau_ != 1.0) {
        os << "-tau" << tau_;
    }
    return os.str();
}

double base_value(const BaseLoss& base, double u) { return base.value(u); }
double base_derivative(const BaseLoss& base, double u) { return base.derivative(u); }
double base_second_derivative(const BaseLoss& base, double u) { return base.second_derivative(u); }

double lc_value(const LinearCoreSpec& spec, double u) {
    require_finite(u, "lc_value");
    check_exp_input(spec, u);
    const BaseLoss& base = spec.base();
    const double tau = spec.tau();
    switch (branch_at(spec, u)) {
        case Branch::Core: return -u + tau + base.core_offset();
        case Branch::Right: return base.value(tau - u) / base.derivative(0.0);
        case Branch::Left: return base.value(-tau - u) / base.derivative(0.0) + 2.0 * tau;
    }
    return 0.0;
}

double lc_derivative(const LinearCoreSpec& spec, double u) {
    require_finite(u, "lc_derivative");
    check_exp_input(spec, u);
    const BaseLoss& base = spec.base();
    const double tau = spec.tau();
    switch (branch_at(spec, u)) {
        case Branch::Core: return -1.0;
        case Branch::Right: return -base.derivative(tau - u) / base.derivative(0.0);
        case Branch::Left: return -base.derivative(-tau - u) / base.derivative(0.0);
    }
    return 0.0;
}

double lc_branch_second_derivative(const LinearCoreSpec& spec, double u, SideLimit side) {
    require_finite(u, "lc_branch_second_derivative");
    check_exp_input(spec, u);
    const BaseLoss& base = spec.base();
    const double tau = spec.tau();
    const bool symmetric = spec.side() == CoreSide::Symmetric;

    // The branch owning the open interval just left (or right) of u.
    Branch b = Branch::Core;
    if (side == SideLimit::Left) {
        if (u > tau) {
            b = Branch::Right;
        } else if (u <= -tau && symmetric) {
            b = Branch::Left;
        }
    } else {
        if (u >= tau) {
            b = Branch::Right;
        } else if (u < -tau && symmetric) {
            b = Branch::Left;
        }
    }
    switch (b) {
        case Branch::Core: return 0.0;
        case Branch::Right: return base.second_derivative(tau - u) / base.derivative(0.0);
        case Branch::Left: return base.second_derivative(-tau - u) / base.derivative(0.0);
    }
    return 0.0;
}

}  // namespace lincore
