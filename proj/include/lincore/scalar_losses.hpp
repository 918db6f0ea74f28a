#pragma once

// Base losses Phi and the linear-core surrogates built on them.
//
// A linear-core surrogate is affine with slope -1 on [-tau, tau] and is
// continued on the tails by the base loss rescaled by 1/Phi'(0):
//
//   phi(u) = -u + tau + Phi(0)/Phi'(0)          |u| <= tau
//          = Phi(tau - u) / Phi'(0)              u > tau
//          = Phi(-tau - u) / Phi'(0) + 2 tau     u < -tau   (symmetric)
//
// The one-sided variant keeps the affine piece for every u <= tau.

#include <string>

namespace lincore {

enum class BaseKind { Logistic, Exponential, QuarticLinear };

/// Differentiable convex base Phi with Phi'(0) > 0.
///
/// QuarticLinear is Phi(u) = a*u + u^4/12 + K. The offset K is carried for
/// completeness but cancels from every derivative and from Phi(0)/Phi'(0)
/// differences, so it never changes a minimizer.
class BaseLoss {
public:
    static BaseLoss logistic() { return BaseLoss(BaseKind::Logistic); }
    static BaseLoss exponential() { return BaseLoss(BaseKind::Exponential); }
    static BaseLoss quartic_linear(double a = 1.0, double k = 0.0);

    BaseKind kind() const { return kind_; }
    double slope() const { return a_; }
    double offset() const { return k_; }
    std::string name() const;

    /// Phi(u). Exponential arguments above kExpLimit throw OverflowError.
    double value(double u) const;
    double derivative(double u) const;
    double second_derivative(double u) const;

    /// Phi(0)/Phi'(0), the constant lifting the linear core.
    double core_offset() const { return value(0.0) / derivative(0.0); }

    static constexpr double kExpLimit = 700.0;

private:
    explicit BaseLoss(BaseKind kind, double a = 1.0, double k = 0.0)
        : kind_(kind), a_(a), k_(k) {}

    BaseKind kind_;
    double a_;
    double k_;
};

enum class CoreSide { Symmetric, OneSided };
enum class SideLimit { Left, Right };

/// Concrete linear-core surrogate: base + side + core half-width tau.
class LinearCoreSpec {
public:
    LinearCoreSpec(BaseLoss base, CoreSide side = CoreSide::Symmetric, double tau = 1.0);

    const BaseLoss& base() const { return base_; }
    CoreSide side() const { return side_; }
    double tau() const { return tau_; }
    std::string name() const;

    static constexpr double kMinTau = 1e-12;

private:
    BaseLoss base_;
    CoreSide side_;
    double tau_;
};

double base_value(const BaseLoss& base, double u);
double base_derivative(const BaseLoss& base, double u);
double base_second_derivative(const BaseLoss& base, double u);

double lc_value(const LinearCoreSpec& spec, double u);
double lc_derivative(const LinearCoreSpec& spec, double u);

/// Second derivative of the branch adjacent to u on the requested side.
/// Away from the knots +-tau both sides agree; at a knot the two limits
/// differ by Phi''(0)/Phi'(0) unless Phi''(0) = 0.
double lc_branch_second_derivative(const LinearCoreSpec& spec, double u, SideLimit side);

}  // namespace lincore
