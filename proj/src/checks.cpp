#include "lincore/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lincore/consistency.hpp"
#include "lincore/experiments.hpp"
#include "lincore/inference.hpp"
#include "lincore/kernels.hpp"
#include "lincore/multiclass.hpp"
#include "lincore/rng.hpp"
#include "lincore/structured.hpp"
#include "lincore/trainers.hpp"

namespace lincore {

namespace fs = std::filesystem;

void CheckResult::expect(bool ok, const std::string& what) {
    ++evaluated;
    if (!ok) {
        ++failed;
        pass = false;
        if (failed <= 5) notes.push_back("FAILED " + what);
    }
}

std::string CheckResult::summary() const {
    std::ostringstream os;
    os << evaluated << " checks, " << failed << " failed";
    for (const std::string& n : notes) os << "; " << n;
    return os.str();
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

template <class Fn>
CheckResult timed(int id, const std::string& name, Fn&& body) {
    CheckResult r;
    r.id = id;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.notes.push_back(std::string("exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<LinearCoreSpec> all_specs(double tau = 1.0) {
    std::vector<LinearCoreSpec> out;
    for (const BaseLoss& base : {BaseLoss::logistic(), BaseLoss::exponential(), BaseLoss::quartic_linear()}) {
        for (CoreSide side : {CoreSide::Symmetric, CoreSide::OneSided}) out.emplace_back(base, side, tau);
    }
    return out;
}

double exp_lc_T(double t) { return 1.0 + t - std::sqrt(std::max(0.0, 1.0 - t * t)); }

ChainModel random_model(Rng& rng, std::size_t Y, std::size_t d, double scale) {
    std::vector<double> w(Y * d + Y * Y);
    for (double& v : w) v = scale * rng.normal();
    return ChainModel(Y, d, std::move(w));
}

FeatureSeq random_x(Rng& rng, std::size_t L, std::size_t d) {
    std::vector<double> x(L * d);
    for (double& v : x) v = rng.normal();
    return FeatureSeq(L, d, std::move(x));
}

LabelSeq random_y(Rng& rng, std::size_t L, std::size_t Y) {
    LabelSeq y(L);
    for (Label& v : y) v = rng.below(Y);
    return y;
}

// Odometer enumeration (last position fastest), independent of the library.
template <class Fn>
void for_each_sequence(std::size_t Y, std::size_t L, Fn&& fn) {
    LabelSeq y(L, 0);
    while (true) {
        fn(y);
        std::size_t j = L;
        while (j > 0) {
            --j;
            if (++y[j] < Y) break;
            y[j] = 0;
            if (j == 0) return;
        }
    }
}

double score_by_hand(const ChainModel& m, const FeatureSeq& x, const LabelSeq& y) {
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const auto row = x.row(j);
        const auto w = m.unary(y[j]);
        for (std::size_t i = 0; i < x.dim(); ++i) s += w[i] * row[i];
        if (j > 0) s += m.transition(y[j - 1], y[j]);
    }
    return s;
}

template <class F>
std::vector<double> fd_gradient(std::vector<double> point, F f, double h = 1e-6) {
    std::vector<double> g(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double v = point[i];
        point[i] = v + h;
        const double up = f(point);
        point[i] = v - h;
        const double dn = f(point);
        point[i] = v;
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

// 1 -------------------------------------------------------------------------

CheckResult check_rate_slopes() {
    return timed(1, "rate slopes", [](CheckResult& r) {
        const auto start = std::chrono::steady_clock::now();
        const RatesResult rates = run_rates(RatesConfig{});
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& [name, slope] : rates.slopes) {
            const bool lc = name.rfind("lc_", 0) == 0;
            const double lo = lc ? 0.95 : 0.45, hi = lc ? 1.05 : 0.55;
            r.expect(slope >= lo && slope <= hi, name + " slope " + fmt(slope));
            r.note(name + "=" + fmt(slope));
        }
        r.expect(rates.points.size() == 100, "row count");
        r.expect(secs < 10.0, "runtime " + fmt(secs) + " s");
    });
}

// 2 -------------------------------------------------------------------------

CheckResult check_transformation_bounds(Mode mode) {
    return timed(2, "transformation bounds", [mode](CheckResult& r) {
        std::vector<double> ts(200);
        for (int i = 0; i < 200; ++i) ts[static_cast<std::size_t>(i)] = i / 199.0;
        for (const LinearCoreSpec& spec : all_specs()) {
            const auto T = transformation_grid(MarginLoss::linear_core(spec), ts, Exec::Parallel);
            r.expect(T[0] <= 1e-9, spec.name() + " T(0) = " + fmt(T[0]));
            for (std::size_t i = 0; i < ts.size(); ++i) {
                r.expect(T[i] >= ts[i] - 1e-8, spec.name() + " T(" + fmt(ts[i]) + ") = " + fmt(T[i]));
            }
        }
        for (double tau : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            for (CoreSide side : {CoreSide::Symmetric, CoreSide::OneSided}) {
                const LinearCoreSpec spec(BaseLoss::logistic(), side, tau);
                const auto T = transformation_grid(MarginLoss::linear_core(spec), ts, Exec::Parallel);
                double worst = INFINITY;
                for (std::size_t i = 0; i < ts.size(); ++i) {
                    const double bound = mode == Mode::Stated ? ts[i] / tau : tau * ts[i];
                    worst = std::min(worst, T[i] - bound);
                    r.expect(T[i] >= bound - 1e-8, spec.name() + " T(" + fmt(ts[i]) + ") = " + fmt(T[i]) +
                                                       " below " + fmt(bound));
                }
                if (side == CoreSide::Symmetric) {
                    r.note("tau " + fmt(tau) + " min(T - " + (mode == Mode::Stated ? "t/tau" : "tau t") +
                           ") = " + fmt(worst));
                }
            }
        }
        const auto T = transformation_grid(MarginLoss::linear_core(LinearCoreSpec(BaseLoss::exponential())), ts,
                                           Exec::Parallel);
        double worst = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double err = std::abs(T[i] - exp_lc_T(ts[i]));
            worst = std::max(worst, err);
            r.expect(err < 1e-8, "exponential oracle at t = " + fmt(ts[i]));
        }
        r.note("exponential oracle max error " + fmt(worst));
    });
}

// 3 -------------------------------------------------------------------------

CheckResult check_tau_stability(Mode mode) {
    return timed(3, "tau stability", [mode](CheckResult& r) {
        const StabilityResult s = run_stability(StabilityConfig{});
        for (const TauSweepRow& row : s.sweep) {
            r.note("tau " + fmt(row.tau) + " slope " + fmt(row.slope));
            if (mode == Mode::Valid && row.tau < 0.5) continue;
            r.expect(row.slope >= 0.95 && row.slope <= 1.05, "tau " + fmt(row.tau) + " slope " + fmt(row.slope));
        }
        bool found = false;
        for (const TauSweepRow& row : s.vanishing) {
            if (row.tau == 1e-5) {
                found = true;
                r.note("tau 1e-05 slope " + fmt(row.slope));
                r.expect(row.slope >= 0.45 && row.slope <= 0.6, "tau 1e-5 slope " + fmt(row.slope));
            }
        }
        r.expect(found, "tau 1e-5 present in the vanishing sweep");
    });
}

// 4 -------------------------------------------------------------------------

CheckResult check_smoothness() {
    return timed(4, "smoothness", [](CheckResult& r) {
        double worst_fd = 0.0;
        for (const LinearCoreSpec& spec : all_specs()) {
            const double tau = spec.tau();
            std::vector<double> grid{tau, -tau};
            for (int i = 0; i < 998; ++i) grid.push_back(-2.0 * tau - 3.0 + (4.0 * tau + 6.0) * i / 997.0);
            const double h = 1e-6;
            std::size_t bad = 0;
            for (double u : grid) {
                const double fd = (lc_value(spec, u + h) - lc_value(spec, u - h)) / (2.0 * h);
                const double err = std::abs(fd - lc_derivative(spec, u));
                worst_fd = std::max(worst_fd, err);
                bad += err >= 1e-4;
            }
            r.expect(bad == 0, spec.name() + " C1 mismatches: " + std::to_string(bad));

            const BaseLoss& base = spec.base();
            const double gap = base.second_derivative(0.0) / base.derivative(0.0);
            const double right = lc_branch_second_derivative(spec, tau, SideLimit::Right) -
                                 lc_branch_second_derivative(spec, tau, SideLimit::Left);
            const double left = lc_branch_second_derivative(spec, -tau, SideLimit::Left) -
                                lc_branch_second_derivative(spec, -tau, SideLimit::Right);
            if (base.kind() == BaseKind::QuarticLinear) {
                r.expect(right == 0.0, spec.name() + " C2 mismatch at +tau " + fmt(right));
                r.expect(left == 0.0, spec.name() + " C2 mismatch at -tau " + fmt(left));
            } else {
                r.expect(std::abs(right - gap) < 1e-8, spec.name() + " knot jump " + fmt(right) + " vs " + fmt(gap));
                if (spec.side() == CoreSide::Symmetric) {
                    r.expect(std::abs(left - gap) < 1e-8, spec.name() + " knot jump " + fmt(left) + " vs " + fmt(gap));
                } else {
                    r.expect(left == 0.0, spec.name() + " one-sided has no left knot");
                }
            }

            Rng rng(4, 0, static_cast<std::uint64_t>(base.kind()) * 2 + (spec.side() == CoreSide::OneSided));
            std::size_t nonconvex = 0;
            for (int i = 0; i < 100000; ++i) {
                const double a = -8.0 + 16.0 * rng.uniform();
                const double b = -8.0 + 16.0 * rng.uniform();
                const double lam = rng.uniform();
                const double rhs = lam * lc_value(spec, a) + (1.0 - lam) * lc_value(spec, b);
                nonconvex += lc_value(spec, lam * a + (1.0 - lam) * b) > rhs + 1e-12 * (1.0 + std::abs(rhs));
            }
            r.expect(nonconvex == 0, spec.name() + " convexity violations: " + std::to_string(nonconvex));
        }
        r.note("max C1 error " + fmt(worst_fd));
    });
}

// 5 -------------------------------------------------------------------------

CheckResult check_closed_form() {
    return timed(5, "restricted pair closed form", [](CheckResult& r) {
        double worst = 0.0;
        for (const BaseLoss& base : {BaseLoss::logistic(), BaseLoss::exponential()}) {
            const LinearCoreSpec spec(base);
            Rng rng(5, static_cast<std::uint64_t>(base.kind()));
            for (int i = 0; i < 1000; ++i) {
                const double a = rng.uniform(), b = rng.uniform();
                const auto num = minimize_on_interval(
                    [&](double u) { return a * lc_value(spec, -u) + b * lc_value(spec, u); }, -1.0, 1.0);
                const double err = std::abs(num.value - restricted_pair_infimum(base, a, b).value);
                worst = std::max(worst, err);
                r.expect(err < 1e-9, base.name() + " a=" + fmt(a) + " b=" + fmt(b) + " err " + fmt(err));
            }
        }
        r.note("max error " + fmt(worst));
    });
}

// 6, 7 ----------------------------------------------------------------------

namespace {

void regret_check(CheckResult& r, bool structured, std::size_t draws, std::size_t n_lo, std::size_t n_hi) {
    double worst = -INFINITY;
    for (CoreSide side : {CoreSide::Symmetric, CoreSide::OneSided}) {
        const LinearCoreSpec spec(BaseLoss::logistic(), side);
        for (std::size_t n = n_lo; n <= n_hi; ++n) {
            const auto sample = random_regret_draws(draws, n, structured, 3.0, structured ? 7 : 6);
            const auto regrets = regret_sweep(spec, sample, Exec::Parallel);
            for (std::size_t i = 0; i < regrets.size(); ++i) {
                const ConditionalRegrets& c = regrets[i];
                worst = std::max(worst, c.regret_target - c.regret_surrogate);
                const bool ok = c.regret_target <= c.regret_surrogate + 1e-8;
                r.expect(ok, ok ? std::string() : spec.name() + " n=" + std::to_string(n) + " draw " + std::to_string(i));
            }
        }
    }
    r.note("max(regret_target - regret_surrogate) = " + fmt(worst));
}

}  // namespace

CheckResult check_multiclass_consistency(std::size_t draws_per_size) {
    return timed(6, "multi-class pointwise consistency", [&](CheckResult& r) {
        const auto start = std::chrono::steady_clock::now();
        regret_check(r, false, draws_per_size, 2, 5);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        r.expect(secs < 60.0, "runtime " + fmt(secs) + " s");
    });
}

CheckResult check_structured_consistency(std::size_t draws_per_size) {
    return timed(7, "structured pointwise consistency",
                 [&](CheckResult& r) { regret_check(r, true, draws_per_size, 3, 6); });
}

// 8 -------------------------------------------------------------------------

CheckResult check_inference_oracles(std::size_t instances) {
    return timed(8, "exact inference oracles", [&](CheckResult& r) {
        double worst = 0.0;
        for (std::size_t i = 0; i < instances; ++i) {
            Rng rng(8, 0, i);
            const std::size_t Y = 2 + rng.below(5);
            std::size_t lmax = 1;
            while (static_cast<double>(std::pow(Y, lmax + 1)) <= 4096.0) ++lmax;
            const std::size_t L = 1 + rng.below(lmax);
            const std::size_t d = 1 + rng.below(4);
            const ChainModel m = random_model(rng, Y, d, 1.0);
            const FeatureSeq x = random_x(rng, L, d);
            const LabelSeq y = random_y(rng, L, Y);

            LabelSeq best, best_aug;
            double bv = -INFINITY, av = -INFINITY, mx = -INFINITY;
            std::vector<double> scores;
            for_each_sequence(Y, L, [&](const LabelSeq& s) {
                const double v = score_by_hand(m, x, s);
                scores.push_back(v);
                if (v > bv) {
                    bv = v;
                    best = s;
                }
                std::size_t diff = 0;
                for (std::size_t j = 0; j < L; ++j) diff += s[j] != y[j];
                const double a = v + static_cast<double>(diff) / static_cast<double>(L);
                if (a > av) {
                    av = a;
                    best_aug = s;
                }
                mx = std::max(mx, v);
            });
            double z = 0.0;
            for (double v : scores) z += std::exp(v - mx);
            const double logz = mx + std::log(z);

            const Decoded dv = viterbi(m, x);
            const Decoded da = loss_augmented_viterbi(m, x, y);
            const double lp = forward_backward(m, x).log_partition;
            const std::string tag = " (Y=" + std::to_string(Y) + ", L=" + std::to_string(L) + ")";
            r.expect(dv.labels == best, "viterbi sequence" + tag);
            r.expect(std::abs(dv.score - bv) < 1e-8, "viterbi score" + tag);
            r.expect(da.labels == best_aug, "loss-augmented sequence" + tag);
            r.expect(std::abs(da.score - av) < 1e-8, "loss-augmented score" + tag);
            r.expect(std::abs(lp - logz) < 1e-8, "log partition" + tag);
            worst = std::max({worst, std::abs(dv.score - bv), std::abs(da.score - av), std::abs(lp - logz)});
        }
        r.note("max abs error " + fmt(worst));
    });
}

// 9 -------------------------------------------------------------------------

CheckResult check_gradients(std::size_t instances) {
    return timed(9, "gradient checks", [&](CheckResult& r) {
        const double tol = 1e-5;
        double worst_mc = 0.0, worst_ce = 0.0, worst_gce = 0.0, worst_crf = 0.0, worst_st = 0.0;
        const auto specs = all_specs();
        for (std::size_t i = 0; i < instances; ++i) {
            Rng rng(9, 0, i);
            const std::size_t n = 2 + rng.below(5);
            std::vector<double> s(n);
            for (double& v : s) v = 2.0 * rng.normal();
            const Label y = rng.below(n);
            const LinearCoreSpec& spec = specs[i % specs.size()];

            const auto g_mc = mc_sum_loss_gradient(spec, ScoreTable(s), y);
            const auto f_mc = fd_gradient(s, [&](const std::vector<double>& v) { return mc_sum_loss(spec, ScoreTable(v), y); });
            worst_mc = std::max(worst_mc, max_abs_diff(g_mc, f_mc));
            r.expect(max_abs_diff(g_mc, f_mc) < tol, "mc_sum_loss instance " + std::to_string(i));

            const auto g_ce = ce_gradient(ScoreTable(s), y);
            const auto f_ce = fd_gradient(s, [&](const std::vector<double>& v) { return ce_loss(ScoreTable(v), y); });
            worst_ce = std::max(worst_ce, max_abs_diff(g_ce, f_ce));
            r.expect(max_abs_diff(g_ce, f_ce) < tol, "ce instance " + std::to_string(i));

            const double q = 0.05 + 0.95 * rng.uniform();
            const auto g_gce = gce_gradient(ScoreTable(s), y, q);
            const auto f_gce = fd_gradient(s, [&](const std::vector<double>& v) { return gce_loss(ScoreTable(v), y, q); });
            worst_gce = std::max(worst_gce, max_abs_diff(g_gce, f_gce));
            r.expect(max_abs_diff(g_gce, f_gce) < tol, "gce instance " + std::to_string(i));

            const std::size_t Y = 2 + rng.below(2), L = 1 + rng.below(3), d = 1 + rng.below(3);
            const ChainModel m = random_model(rng, Y, d, 0.7);
            const FeatureSeq x = random_x(rng, L, d);
            const LabelSeq ys = random_y(rng, L, Y);
            const std::vector<double> w(m.weights().begin(), m.weights().end());
            auto with = [&](const std::vector<double>& v) { return ChainModel(Y, d, v); };

            const auto g_crf = crf_nll_and_gradient(m, x, ys).gradient;
            const auto f_crf = fd_gradient(w, [&](const std::vector<double>& v) { return crf_nll_and_gradient(with(v), x, ys).loss; });
            worst_crf = std::max(worst_crf, max_abs_diff(g_crf, f_crf));
            r.expect(max_abs_diff(g_crf, f_crf) < tol, "crf instance " + std::to_string(i));

            const InnerSupport support = i % 2 ? InnerSupport::Full : InnerSupport::Neighbors;
            const auto g_st = structured_sum_loss_gradient_exact(spec, m, x, ys, support);
            const auto f_st = fd_gradient(
                w, [&](const std::vector<double>& v) { return structured_sum_loss_exact(spec, with(v), x, ys, support); });
            worst_st = std::max(worst_st, max_abs_diff(g_st, f_st));
            r.expect(max_abs_diff(g_st, f_st) < tol, "structured instance " + std::to_string(i));
        }
        r.note("max errors: mc " + fmt(worst_mc) + ", ce " + fmt(worst_ce) + ", gce " + fmt(worst_gce) + ", crf " +
               fmt(worst_crf) + ", structured " + fmt(worst_st));
    });
}

// 10 ------------------------------------------------------------------------

CheckResult check_unbiasedness() {
    return timed(10, "pair estimator unbiasedness", [](CheckResult& r) {
        const std::vector<std::pair<std::size_t, std::size_t>> shapes{{2, 1}, {2, 3}, {2, 6}, {3, 2}, {3, 3},
                                                                      {4, 2}, {4, 3}, {8, 2}, {5, 2}, {6, 2}};
        double worst = 0.0, largest = 0.0;
        std::size_t case_id = 0;
        for (const auto& [Y, L] : shapes) {
            for (CoreSide side : {CoreSide::Symmetric, CoreSide::OneSided}) {
                for (OuterProposal outer : {OuterProposal::Corruption, OuterProposal::Similarity}) {
                    Rng rng(10, 0, case_id++);
                    const LinearCoreSpec spec(rng.bernoulli(0.5) ? BaseLoss::logistic() : BaseLoss::exponential(), side);
                    // moderate weights keep |g| where an absolute 1e-10 is above double resolution
                    const ChainModel m = random_model(rng, Y, 3, 0.3);
                    const FeatureSeq x = random_x(rng, L, 3);
                    const LabelSeq y = random_y(rng, L, Y);
                    const PairProposal p{0.3, InnerProposal::UniformFull, outer};
                    const auto e = lc_pair_estimator_expectation(m, x, y, spec, p);
                    const auto g = structured_sum_loss_gradient_exact(spec, m, x, y, InnerSupport::Full);
                    const double err = max_abs_diff(e, g);
                    worst = std::max(worst, err);
                    for (double v : g) largest = std::max(largest, std::abs(v));
                    r.expect(err < 1e-10, "Y=" + std::to_string(Y) + " L=" + std::to_string(L) + " error " + fmt(err));
                }
            }
        }
        r.note("max abs error " + fmt(worst) + ", max |gradient| " + fmt(largest));
    });
}

// 11 ------------------------------------------------------------------------

CheckResult check_variance_bound(std::size_t trials) {
    return timed(11, "k-sample variance bound", [&](CheckResult& r) {
        const LinearCoreSpec spec(BaseLoss::logistic(), CoreSide::OneSided);
        const std::vector<std::pair<std::size_t, std::size_t>> shapes{{3, 3}, {2, 4}, {4, 2}};
        for (std::size_t c = 0; c < shapes.size(); ++c) {
            const auto [Y, L] = shapes[c];
            Rng rng(11, 0, c);
            const ChainModel m = random_model(rng, Y, 2, 0.5);
            const FeatureSeq x = random_x(rng, L, 2);
            const LabelSeq y = random_y(rng, L, Y);
            const double R = feature_radius_exact(m, x);
            const auto exact = lc_ksample_expectation(m, x, y, spec);
            std::vector<double> var;
            for (std::size_t K : {1u, 4u, 16u, 64u}) {
                const double v = empirical_gradient_variance(
                    [&](Rng& g) { return lc_ksample_gradient_estimate(m, x, y, spec, K, g); }, trials, 100 + c, exact);
                r.expect(v <= 4.0 * R * R / static_cast<double>(K),
                         "K=" + std::to_string(K) + " variance " + fmt(v) + " > " + fmt(4.0 * R * R / K));
                var.push_back(v);
            }
            const double ratio = var[1] / (var[0] / 4.0);
            r.expect(ratio >= 0.8 && ratio <= 1.2, "var(4)/(var(1)/4) = " + fmt(ratio));
            r.note("case " + std::to_string(c) + ": 4R^2 = " + fmt(4 * R * R) + ", var(K=1) = " + fmt(var[0]) +
                   ", ratio " + fmt(ratio));
        }
    });
}

// 12 ------------------------------------------------------------------------

CheckResult check_scaling() {
    return timed(12, "scaling", [](CheckResult& r) {
        const auto start = std::chrono::steady_clock::now();
        const auto rows = run_scaling(ScalingConfig{});
        const double ssvm = scaling_ratio(rows, "ssvm", 100, 400);
        const double lc = scaling_ratio(rows, "lincore", 100, 400);
        const double speedup = scaling_time(rows, "ssvm", 400) / scaling_time(rows, "lincore", 400);
        r.expect(ssvm >= 4.0, "ssvm ratio " + fmt(ssvm));
        r.expect(lc <= 2.0, "lincore ratio " + fmt(lc));
        r.expect(speedup >= 5.0, "speedup " + fmt(speedup));
        r.note("ssvm 400/100 = " + fmt(ssvm) + ", lincore 400/100 = " + fmt(lc) + ", speedup at 400 = " + fmt(speedup));
        for (const ScalingRow& row : rows) {
            if (row.cv_flag) r.note("jitter flag: " + row.method + " Y=" + std::to_string(row.Y) + " cv " + fmt(row.cv));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        r.expect(secs < 900.0, "runtime " + fmt(secs) + " s");
    });
}

// 13 ------------------------------------------------------------------------

CheckResult check_training() {
    return timed(13, "training efficacy", [](CheckResult& r) {
        const HmmSpec hs;
        const HmmDataset data = generate_hmm_data(hs);
        TrainConfig cfg;
        cfg.history_interval = 100;
        const TrainResult lc = sgd_train(data.train, data.test, hs.Y, cfg);
        cfg.objective = Objective::Ssvm;
        const TrainResult sv = sgd_train(data.train, data.test, hs.Y, cfg);
        const double lc_err = lc.history.back().test_error, sv_err = sv.history.back().test_error;
        const double lc_osc = terminal_objective_oscillation(lc.history);
        const double sv_osc = terminal_objective_oscillation(sv.history);
        r.expect(lc.history.back().iteration <= 20000, "iteration budget");
        r.expect(lc_err <= 0.05, "lincore test error " + fmt(lc_err));
        r.expect(sv_err <= 0.05, "ssvm test error " + fmt(sv_err));
        r.expect(sv_osc > lc_osc, "oscillation ssvm " + fmt(sv_osc) + " <= lincore " + fmt(lc_osc));
        r.note("test error lincore " + fmt(lc_err) + ", ssvm " + fmt(sv_err) + "; relative oscillation lincore " +
               fmt(lc_osc) + ", ssvm " + fmt(sv_osc));
    });
}

// 14 ------------------------------------------------------------------------

CheckResult check_noise(Mode mode, std::size_t seeds) {
    return timed(14, "noise robustness", [&](CheckResult& r) {
        std::size_t wins3 = 0, wins4 = 0;
        double sat_lo = INFINITY, sat_hi = -INFINITY, spread_lo = INFINITY;
        for (std::size_t s = 1; s <= seeds; ++s) {
            NoiseConfig c;
            c.seed = s;
            const NoiseResult n = run_noise(c);
            wins3 += noise_accuracy(n, "lc", 0.3) >= noise_accuracy(n, "ce", 0.3);
            wins4 += noise_accuracy(n, "lc", 0.4) >= noise_accuracy(n, "ce", 0.4);
            sat_lo = std::min(sat_lo, n.lc_noisy_saturated_fraction);
            sat_hi = std::max(sat_hi, n.lc_noisy_saturated_fraction);
            spread_lo = std::min(spread_lo, n.ce_noisy_spread);
            if (mode == Mode::Stated) {
                r.expect(n.lc_noisy_saturated_fraction >= 0.9,
                         "seed " + std::to_string(s) + " saturated fraction " + fmt(n.lc_noisy_saturated_fraction));
            }
            r.expect(n.ce_noisy_spread >= 0.2, "seed " + std::to_string(s) + " ce spread " + fmt(n.ce_noisy_spread));
        }
        r.expect(2 * wins3 > seeds, "lc >= ce at rho 0.3 in " + std::to_string(wins3) + " seeds");
        r.expect(2 * wins4 > seeds, "lc >= ce at rho 0.4 in " + std::to_string(wins4) + " seeds");
        r.note("lc >= ce seeds: rho 0.3 " + std::to_string(wins3) + "/" + std::to_string(seeds) + ", rho 0.4 " +
               std::to_string(wins4) + "/" + std::to_string(seeds));
        r.note("noisy saturated fraction " + fmt(sat_lo) + ".." + fmt(sat_hi) + ", min ce spread " + fmt(spread_lo));
    });
}

// 15 ------------------------------------------------------------------------

std::string drop_csv_columns(const std::string& csv, const std::vector<std::string>& columns) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    std::vector<bool> keep;
    bool header = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (header) {
            for (const std::string& c : cells) {
                keep.push_back(std::find(columns.begin(), columns.end(), c) == columns.end());
            }
            header = false;
        }
        bool first = true;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i < keep.size() && !keep[i]) continue;
            out << (first ? "" : ",") << cells[i];
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

CheckResult check_determinism(const fs::path& scratch) {
    return timed(15, "determinism", [&](CheckResult& r) {
        const fs::path dirs[2] = {scratch / "run_a", scratch / "run_b"};
        for (const fs::path& dir : dirs) {
            fs::remove_all(dir);
            fs::create_directories(dir);
            write_rates(run_rates(RatesConfig{}), dir);
            write_stability(run_stability(StabilityConfig{}), dir);
            write_noise(run_noise(NoiseConfig{}), dir);
            write_history(run_train_seq(TrainSeqConfig{}).history, dir / "history.csv");
            write_scaling(run_scaling(ScalingConfig{}), dir);
        }
        const std::vector<std::pair<std::string, std::vector<std::string>>> files{
            {"rates.csv", {}},
            {"stability.csv", {}},
            {"noise.csv", {}},
            {"grad_hist.csv", {}},
            {"history.csv", {"seconds"}},
            {"scaling.csv", {"seconds_per_batch", "cv_flag"}},
        };
        for (const auto& [name, timing] : files) {
            const std::string a = drop_csv_columns(slurp(dirs[0] / name), timing);
            const std::string b = drop_csv_columns(slurp(dirs[1] / name), timing);
            r.expect(!a.empty() && a == b, name + " differs between runs");
        }
        r.expect(slurp(dirs[0] / "slopes.json") == slurp(dirs[1] / "slopes.json"), "slopes.json differs");
    });
}

CheckResult run_criterion(int id, const fs::path& scratch) {
    switch (id) {
        case 1: return check_rate_slopes();
        case 2: return check_transformation_bounds(Mode::Stated);
        case 3: return check_tau_stability(Mode::Stated);
        case 4: return check_smoothness();
        case 5: return check_closed_form();
        case 6: return check_multiclass_consistency();
        case 7: return check_structured_consistency();
        case 8: return check_inference_oracles();
        case 9: return check_gradients();
        case 10: return check_unbiasedness();
        case 11: return check_variance_bound();
        case 12: return check_scaling();
        case 13: return check_training();
        case 14: return check_noise(Mode::Stated);
        case 15: return check_determinism(scratch);
        default: throw DomainError("criterion id must be in 1.." + std::to_string(kCriteria));
    }
}

}  // namespace lincore
