#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lincore/errors.hpp"
#include "lincore/scalar_losses.hpp"

using namespace lincore;

namespace {

std::vector<LinearCoreSpec> all_specs(double tau = 1.0) {
    std::vector<LinearCoreSpec> out;
    for (auto base : {BaseLoss::logistic(), BaseLoss::exponential(), BaseLoss::quartic_linear()}) {
        for (auto side : {CoreSide::Symmetric, CoreSide::OneSided}) {
            out.emplace_back(base, side, tau);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("base losses: closed forms") {
    CHECK(base_value(BaseLoss::logistic(), 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(base_derivative(BaseLoss::logistic(), 0.0) == doctest::Approx(0.5));
    CHECK(base_value(BaseLoss::exponential(), 1.0) == doctest::Approx(std::exp(1.0)));
    CHECK(base_derivative(BaseLoss::exponential(), 0.0) == 1.0);
    CHECK(base_second_derivative(BaseLoss::quartic_linear(), 0.0) == 0.0);
    CHECK(base_derivative(BaseLoss::quartic_linear(2.0, 3.0), 0.0) == 2.0);
    CHECK(base_value(BaseLoss::quartic_linear(1.0, 3.0), 0.0) == 3.0);
}

TEST_CASE("base losses: errors") {
    CHECK_THROWS_AS(base_value(BaseLoss::exponential(), 701.0), OverflowError);
    CHECK_THROWS_AS(base_value(BaseLoss::logistic(), NAN), DomainError);
    CHECK_THROWS_AS(BaseLoss::quartic_linear(0.0), DomainError);
    CHECK_THROWS_AS(LinearCoreSpec(BaseLoss::logistic(), CoreSide::Symmetric, 0.0), DomainError);
    CHECK_THROWS_AS(LinearCoreSpec(BaseLoss::logistic(), CoreSide::Symmetric, 1e-13), DomainError);
    CHECK_THROWS_AS(lc_value(LinearCoreSpec(BaseLoss::logistic()), INFINITY), DomainError);
    CHECK_THROWS_AS(lc_derivative(LinearCoreSpec(BaseLoss::logistic()), NAN), DomainError);
    // left exponential tail e^{-1-u} + 2 overflows past |u| ~ 700
    CHECK_THROWS_AS(lc_value(LinearCoreSpec(BaseLoss::exponential()), -750.0), OverflowError);
}

TEST_CASE("lc_value: branch values") {
    const LinearCoreSpec exp_sym(BaseLoss::exponential());
    CHECK(lc_value(exp_sym, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(lc_value(exp_sym, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lc_value(exp_sym, 1.0 + 1e-12) == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(lc_value(exp_sym, -2.0) == doctest::Approx(std::exp(1.0) + 2.0).epsilon(1e-14));
    CHECK(lc_value(exp_sym, 3.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));

    const LinearCoreSpec log_sym(BaseLoss::logistic());
    CHECK(lc_value(log_sym, 0.0) == doctest::Approx(1.0 + 2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(lc_value(log_sym, 1.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(lc_value(log_sym, -1.0) == doctest::Approx(2.0 + 2.0 * std::log(2.0)).epsilon(1e-14));

    const LinearCoreSpec log_one(BaseLoss::logistic(), CoreSide::OneSided);
    CHECK(lc_value(log_one, -5.0) == doctest::Approx(5.0 + 1.0 + 2.0 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("lc_derivative: core slope and knots") {
    const LinearCoreSpec exp_sym(BaseLoss::exponential());
    CHECK(lc_derivative(exp_sym, 0.0) == -1.0);
    CHECK(lc_derivative(exp_sym, 1.0) == -1.0);
    CHECK(lc_derivative(exp_sym, std::nextafter(1.0, 2.0)) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(lc_derivative(exp_sym, std::nextafter(-1.0, -2.0)) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(lc_derivative(LinearCoreSpec(BaseLoss::logistic(), CoreSide::OneSided), -5.0) == -1.0);
    CHECK(lc_derivative(LinearCoreSpec(BaseLoss::logistic(), CoreSide::OneSided), -1e6) == -1.0);
}

TEST_CASE("lc_branch_second_derivative: C2 only for the quartic base") {
    const LinearCoreSpec quartic(BaseLoss::quartic_linear());
    CHECK(lc_branch_second_derivative(quartic, 1.0, SideLimit::Left) == 0.0);
    CHECK(lc_branch_second_derivative(quartic, 1.0, SideLimit::Right) == 0.0);
    CHECK(lc_branch_second_derivative(quartic, -1.0, SideLimit::Left) == 0.0);
    CHECK(lc_branch_second_derivative(quartic, -1.0, SideLimit::Right) == 0.0);

    const LinearCoreSpec expo(BaseLoss::exponential());
    CHECK(lc_branch_second_derivative(expo, 1.0, SideLimit::Left) == 0.0);
    CHECK(lc_branch_second_derivative(expo, 1.0, SideLimit::Right) == doctest::Approx(1.0).epsilon(1e-15));

    const LinearCoreSpec logi(BaseLoss::logistic());
    CHECK(lc_branch_second_derivative(logi, 0.0, SideLimit::Left) == 0.0);
    CHECK(lc_branch_second_derivative(logi, 0.0, SideLimit::Right) == 0.0);

    // Mismatch at each knot is Phi''(0)/Phi'(0): 1/2 for logistic, 1 for exponential.
    for (double tau : {0.5, 1.0, 2.0}) {
        for (auto [base, gap] : {std::pair{BaseLoss::logistic(), 0.5}, std::pair{BaseLoss::exponential(), 1.0}}) {
            const LinearCoreSpec s(base, CoreSide::Symmetric, tau);
            CHECK(std::abs(lc_branch_second_derivative(s, tau, SideLimit::Right) -
                           lc_branch_second_derivative(s, tau, SideLimit::Left) - gap) < 1e-12);
            CHECK(std::abs(lc_branch_second_derivative(s, -tau, SideLimit::Left) -
                           lc_branch_second_derivative(s, -tau, SideLimit::Right) - gap) < 1e-12);
            const LinearCoreSpec o(base, CoreSide::OneSided, tau);
            CHECK(lc_branch_second_derivative(o, -tau, SideLimit::Left) == 0.0);
        }
    }
}

TEST_CASE("C1: finite differences match the derivative, knots included") {
    for (double tau : {0.1, 1.0, 3.0}) {
        for (const auto& spec : all_specs(tau)) {
            std::vector<double> grid{tau, -tau};
            for (int i = 0; i < 998; ++i) grid.push_back(-2.0 * tau - 3.0 + (4.0 * tau + 6.0) * i / 997.0);
            const double h = 1e-6;
            for (double u : grid) {
                const double fd = (lc_value(spec, u + h) - lc_value(spec, u - h)) / (2.0 * h);
                CHECK(std::abs(fd - lc_derivative(spec, u)) < 1e-4);
            }
        }
    }
}

TEST_CASE("derivative of the derivative away from knots") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unif(-5.0, 5.0);
    for (const auto& spec : all_specs()) {
        for (int i = 0; i < 500; ++i) {
            const double u = unif(gen);
            if (std::abs(std::abs(u) - 1.0) < 1e-3) continue;
            const double h = 1e-5;
            const double fd = (lc_derivative(spec, u + h) - lc_derivative(spec, u - h)) / (2.0 * h);
            CHECK(std::abs(fd - lc_branch_second_derivative(spec, u, SideLimit::Left)) < 1e-3);
            CHECK(lc_branch_second_derivative(spec, u, SideLimit::Left) ==
                  lc_branch_second_derivative(spec, u, SideLimit::Right));
        }
    }
}

TEST_CASE("convexity and monotone derivative") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(-8.0, 8.0);
    for (const auto& spec : all_specs()) {
        int bad = 0;
        for (int i = 0; i < 100000; ++i) {
            double a = unif(gen), b = unif(gen), c = unif(gen);
            if (a > b) std::swap(a, b);
            if (b > c) std::swap(b, c);
            if (a > b) std::swap(a, b);
            if (c - a < 1e-9) continue;
            const double lam = (c - b) / (c - a);
            const double interp = lam * lc_value(spec, a) + (1.0 - lam) * lc_value(spec, c);
            bad += lc_value(spec, b) > interp + 1e-12 * (1.0 + std::abs(interp)) ? 1 : 0;
        }
        CHECK(bad == 0);
        double prev = -INFINITY;
        for (int i = 0; i <= 2000; ++i) {
            const double d = lc_derivative(spec, -10.0 + 20.0 * i / 2000.0);
            CHECK(d >= prev);
            prev = d;
        }
    }
}

TEST_CASE("one-sided and symmetric agree except on the left tail") {
    for (auto base : {BaseLoss::logistic(), BaseLoss::exponential(), BaseLoss::quartic_linear()}) {
        const LinearCoreSpec s(base, CoreSide::Symmetric, 1.5);
        const LinearCoreSpec o(base, CoreSide::OneSided, 1.5);
        for (double u = -1.5; u <= 8.0; u += 0.01) {
            CHECK(lc_value(s, u) == lc_value(o, u));
            CHECK(lc_derivative(s, u) == lc_derivative(o, u));
        }
        CHECK(lc_value(s, -3.0) != lc_value(o, -3.0));
    }
}

TEST_CASE("names") {
    CHECK(LinearCoreSpec(BaseLoss::logistic()).name() == "lc-logistic");
    CHECK(LinearCoreSpec(BaseLoss::exponential(), CoreSide::OneSided).name() == "lc-exponential-onesided");
    CHECK(BaseLoss::quartic_linear().name() == "quartic");
}
