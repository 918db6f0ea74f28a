#include <doctest.h>

#include <cmath>
#include <random>

#include "lincore/consistency.hpp"
#include "lincore/errors.hpp"
#include "lincore/inference.hpp"
#include "lincore/multiclass.hpp"
#include "test_util.hpp"

using namespace lincore;
using namespace testutil;

namespace {

// First sequence (lexicographic) attaining the maximum of f.
template <typename F>
std::pair<LabelSeq, double> brute_argmax(std::size_t Y, std::size_t L, F f) {
    LabelSeq best;
    double bv = -INFINITY;
    for (const auto& y : all_sequences(Y, L)) {
        const double v = f(y);
        if (v > bv) {
            bv = v;
            best = y;
        }
    }
    return {best, bv};
}

double brute_log_partition(const ChainModel& m, const FeatureSeq& x) {
    std::vector<double> s;
    for (const auto& y : all_sequences(m.num_labels(), x.length())) s.push_back(score_by_hand(m, x, y));
    return log_sum_exp(s);
}

}  // namespace

TEST_CASE("viterbi: trivial cases") {
    std::mt19937_64 gen(1);
    const auto m = random_model(gen, 4, 3);
    const auto x = random_x(gen, 1, 3);
    const auto u = unary_scores(m, x);
    const auto d = viterbi(m, x);
    CHECK(d.labels[0] == argmax_lowest(u));
    CHECK(d.score == doctest::Approx(u[d.labels[0]]));
    const auto z = viterbi(ChainModel(3, 2), random_x(gen, 5, 2));
    CHECK(z.labels == LabelSeq(5, 0));
    CHECK_THROWS_AS(viterbi(m, FeatureSeq(0, 3)), DomainError);
}

TEST_CASE("viterbi and loss-augmented viterbi agree with enumeration") {
    std::mt19937_64 gen(2);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t Y = 2 + rep % 3, L = 1 + rep % 4;
        const auto m = random_model(gen, Y, 3);
        const auto x = random_x(gen, L, 3);
        const auto y = random_y(gen, L, Y);
        const auto [bs, bv] = brute_argmax(Y, L, [&](const LabelSeq& s) { return score_by_hand(m, x, s); });
        const auto d = viterbi(m, x);
        CHECK(d.labels == bs);
        CHECK(std::abs(d.score - bv) < 1e-10);
        const auto [as, av] =
            brute_argmax(Y, L, [&](const LabelSeq& s) { return score_by_hand(m, x, s) + hamming_loss(s, y); });
        const auto a = loss_augmented_viterbi(m, x, y);
        CHECK(a.labels == as);
        CHECK(std::abs(a.score - av) < 1e-10);
        CHECK(a.score >= d.score - 1e-12);
    }
}

TEST_CASE("loss-augmented viterbi: zero model and a strongly favored truth") {
    std::mt19937_64 gen(3);
    const auto x = random_x(gen, 3, 2);
    const auto a = loss_augmented_viterbi(ChainModel(3, 2), x, {0, 1, 0});
    CHECK(a.labels == LabelSeq{1, 0, 1});
    CHECK(a.score == doctest::Approx(1.0));
    // unary margin 0.1 < 1/L = 0.5: the truth is not returned
    ChainModel m(2, 1);
    m.unary(0)[0] = 0.1;
    const FeatureSeq ones(2, 1, {1.0, 1.0});
    CHECK(viterbi(m, ones).labels == LabelSeq{0, 0});
    CHECK(loss_augmented_viterbi(m, ones, {0, 0}).labels == LabelSeq{1, 1});
}

TEST_CASE("forward-backward") {
    std::mt19937_64 gen(4);
    // L = 1: softmax of the unary scores
    const auto m1 = random_model(gen, 4, 2);
    const auto x1 = random_x(gen, 1, 2);
    const auto fb1 = forward_backward(m1, x1);
    const auto u = unary_scores(m1, x1);
    const auto sm = softmax(u);
    CHECK(fb1.log_partition == doctest::Approx(log_sum_exp(u)));
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(fb1.unary_at(0, k) - sm[k]) < 1e-12);

    const auto fz = forward_backward(ChainModel(3, 2), random_x(gen, 4, 2));
    for (double p : fz.unary) CHECK(std::abs(p - 1.0 / 3.0) < 1e-12);

    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t Y = 2 + rep % 3, L = 1 + rep % 4;
        const auto m = random_model(gen, Y, 2);
        const auto x = random_x(gen, L, 2);
        const auto fb = forward_backward(m, x);
        CHECK(std::abs(fb.log_partition - brute_log_partition(m, x)) < 1e-8);
        CHECK(std::abs(log_partition(m, x) - fb.log_partition) < 1e-12);
        CHECK(fb.log_partition >= viterbi(m, x).score);
        for (std::size_t j = 0; j < L; ++j) {
            double s = 0.0;
            for (Label k = 0; k < Y; ++k) s += fb.unary_at(j, k);
            CHECK(std::abs(s - 1.0) < 1e-8);
        }
        for (std::size_t j = 0; j + 1 < L; ++j) {
            double s = 0.0;
            for (Label a = 0; a < Y; ++a) {
                for (Label b = 0; b < Y; ++b) s += fb.transition_at(j, a, b);
            }
            CHECK(std::abs(s - 1.0) < 1e-8);
            for (Label b = 0; b < Y; ++b) {
                double col = 0.0;
                for (Label a = 0; a < Y; ++a) col += fb.transition_at(j, a, b);
                CHECK(std::abs(col - fb.unary_at(j + 1, b)) < 1e-6);
            }
        }
    }
}

TEST_CASE("forward-backward is stable for large potentials") {
    std::mt19937_64 gen(5);
    const auto m = random_model(gen, 50, 4, 200.0);
    const auto fb = forward_backward(m, random_x(gen, 6, 4));
    CHECK(std::isfinite(fb.log_partition));
    for (double p : fb.unary) CHECK(std::isfinite(p));
}

TEST_CASE("crf nll and gradient") {
    std::mt19937_64 gen(6);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t Y = 2 + rep % 3, L = 1 + rep % 3;
        const auto m = random_model(gen, Y, 2);
        const auto x = random_x(gen, L, 2);
        const auto y = random_y(gen, L, Y);
        const auto r = crf_nll_and_gradient(m, x, y);
        CHECK(std::abs(r.loss - (brute_log_partition(m, x) - score_by_hand(m, x, y))) < 1e-8);
        const auto fd = weight_fd(m, [&](const ChainModel& mm) { return crf_nll_and_gradient(mm, x, y).loss; });
        for (std::size_t i = 0; i < fd.size(); ++i) CHECK(std::abs(fd[i] - r.gradient[i]) < 1e-5);
    }
    // overwhelming score on the truth
    ChainModel m(2, 1);
    m.unary(1)[0] = 100.0;
    CHECK(crf_nll_and_gradient(m, FeatureSeq(3, 1, {1.0, 1.0, 1.0}), {1, 1, 1}).loss < 1e-40);
}

TEST_CASE("crf gradient vanishes at the single-example fit") {
    std::mt19937_64 gen(7);
    const auto x = random_x(gen, 2, 2);
    const LabelSeq y{0, 1};
    ChainModel m(2, 2);
    // Exact MLE does not exist for a single example (nll -> 0 only at infinity);
    // regularize by fitting against the marginals of a fixed model instead.
    const auto target = random_model(gen, 2, 2, 0.5);
    const auto fb = forward_backward(target, x);
    std::vector<double> expected_f(m.num_weights(), 0.0);
    for (const auto& s : all_sequences(2, 2)) {
        const double p = std::exp(score_by_hand(target, x, s) - fb.log_partition);
        const auto f = joint_feature(target, x, s);
        for (std::size_t i = 0; i < f.size(); ++i) expected_f[i] += p * f[i];
    }
    // gradient of log Z(w) - w.E_target[f] is E_w[f] - E_target[f]; zero at w = target
    auto grad = [&](const ChainModel& w) {
        auto g = crf_nll_and_gradient(w, x, y).gradient;
        const auto fy = joint_feature(w, x, y);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += fy[i] - expected_f[i];
        return g;
    };
    for (int it = 0; it < 20000; ++it) {
        const auto g = grad(m);
        for (std::size_t i = 0; i < g.size(); ++i) m.weights()[i] -= 0.5 * g[i];
    }
    double n = 0.0;
    for (double v : grad(m)) n += v * v;
    CHECK(std::sqrt(n) < 1e-6);
}

TEST_CASE("ssvm loss and subgradient") {
    std::mt19937_64 gen(8);
    const auto x = random_x(gen, 3, 2);
    const auto zero = ssvm_loss_and_subgradient(ChainModel(3, 2), x, {0, 1, 2});
    CHECK(zero.loss == doctest::Approx(1.0));

    ChainModel sep(2, 1);
    sep.unary(0)[0] = 10.0;
    const auto s = ssvm_loss_and_subgradient(sep, FeatureSeq(2, 1, {1.0, 1.0}), {0, 0});
    CHECK(s.loss == 0.0);
    for (double v : s.gradient) CHECK(v == 0.0);

    // exact margin equality: unary margin 1/L per position -> hinge 0, zero subgradient
    ChainModel edge(2, 1);
    edge.unary(0)[0] = 0.5;
    const auto e = ssvm_loss_and_subgradient(edge, FeatureSeq(2, 1, {1.0, 1.0}), {0, 0});
    CHECK(e.loss == 0.0);
    for (double v : e.gradient) CHECK(v == 0.0);

    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t Y = 2 + rep % 3, L = 1 + rep % 4;
        const auto m = random_model(gen, Y, 2);
        const auto xx = random_x(gen, L, 2);
        const auto y = random_y(gen, L, Y);
        const double hy = score_by_hand(m, xx, y);
        double best = 0.0;
        for (const auto& s2 : all_sequences(Y, L)) {
            best = std::max(best, hamming_loss(s2, y) + score_by_hand(m, xx, s2) - hy);
        }
        const auto r = ssvm_loss_and_subgradient(m, xx, y);
        CHECK(std::abs(r.loss - best) < 1e-10);
        if (r.loss > 0.0) {
            const auto yhat = loss_augmented_viterbi(m, xx, y).labels;
            const auto fh = joint_feature(m, xx, yhat), fy = joint_feature(m, xx, y);
            for (std::size_t i = 0; i < fh.size(); ++i) CHECK(std::abs(r.gradient[i] - (fh[i] - fy[i])) < 1e-12);
        }
    }
}
