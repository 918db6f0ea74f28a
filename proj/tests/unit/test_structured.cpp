#include <doctest.h>

#include <cmath>
#include <random>

#include "lincore/errors.hpp"
#include "lincore/multiclass.hpp"
#include "lincore/structured.hpp"
#include "test_util.hpp"

using namespace lincore;
using namespace testutil;

TEST_CASE("hamming loss") {
    CHECK(hamming_loss({1, 2}, {1, 3}) == 0.5);
    CHECK(hamming_loss({1, 2, 0}, {1, 2, 0}) == 0.0);
    CHECK(hamming_loss({0, 0}, {1, 1}) == 1.0);
    CHECK_THROWS_AS(hamming_loss({0}, {0, 1}), DomainError);
}

TEST_CASE("sequence score and joint feature") {
    std::mt19937_64 gen(1);
    const ChainModel zero(3, 2);
    const auto x = random_x(gen, 3, 2);
    CHECK(sequence_score(zero, x, {0, 1, 2}) == 0.0);

    const auto m = random_model(gen, 2, 3);
    const auto x1 = random_x(gen, 1, 3);
    double u = 0.0;
    for (int i = 0; i < 3; ++i) u += m.unary(1)[i] * x1.row(0)[i];
    CHECK(sequence_score(m, x1, {1}) == doctest::Approx(u).epsilon(1e-15));

    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t Y = 2 + rep % 3, L = 1 + rep % 4, d = 1 + rep % 3;
        const auto mm = random_model(gen, Y, d);
        const auto xx = random_x(gen, L, d);
        const auto y = random_y(gen, L, Y);
        const auto f = joint_feature(mm, xx, y);
        double dot = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) dot += f[i] * mm.weights()[i];
        CHECK(std::abs(sequence_score(mm, xx, y) - dot) < 1e-12);
        CHECK(std::abs(sequence_score(mm, xx, y) - score_by_hand(mm, xx, y)) < 1e-12);
    }
    CHECK_THROWS_AS(sequence_score(m, x1, {2}), DomainError);
    CHECK_THROWS_AS(sequence_score(m, x1, {0, 1}), DomainError);
}

TEST_CASE("enumeration") {
    const auto s = enumerate_sequences(3, 2);
    CHECK(s.size() == 9);
    CHECK(s[5] == LabelSeq{1, 2});
    CHECK(s == all_sequences(3, 2));
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(sequence_index(s[i], 3) == i);
    CHECK_THROWS_AS(enumeration_size(5, 6), UnsupportedError);
    CHECK(enumeration_size(4, 6) == 4096);
}

TEST_CASE("feature radius") {
    std::mt19937_64 gen(2);
    const auto m = random_model(gen, 3, 2);
    const auto x = random_x(gen, 4, 2);
    const double r = feature_radius_exact(m, x);
    CHECK(r <= feature_radius_bound(x) + 1e-12);
    for (const auto& y : all_sequences(3, 4)) {
        const auto f = joint_feature(m, x, y);
        double n = 0.0;
        for (double v : f) n += v * v;
        CHECK(std::sqrt(n) <= r + 1e-12);
    }
}

TEST_CASE("loss matrix") {
    CHECK_THROWS_AS(LossMatrix(2, {0.5, 1.0, 1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(LossMatrix(2, {0.0, 1.5, 1.0, 0.0}), DomainError);
    const auto h = LossMatrix::hamming(2, 2);
    CHECK(h(0, 3) == 1.0);
    CHECK(h(1, 3) == 0.5);
    CHECK(h.similarity(1, 3) == 0.5);
}

TEST_CASE("structured sum loss: small cases") {
    std::mt19937_64 gen(3);
    const LinearCoreSpec spec(BaseLoss::logistic());
    const ChainModel zero(2, 2);
    const auto x = random_x(gen, 1, 2);
    CHECK(structured_sum_loss_exact(spec, zero, x, LabelSeq{1}) == doctest::Approx(lc_value(spec, 0.0)));
    const std::vector<double> none(2, 0.0);
    CHECK(structured_sum_loss_exact(spec, zero, x, none) == 0.0);
    const auto g = structured_sum_loss_gradient_exact(spec, random_model(gen, 2, 2), x, none);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("structured sum loss: independent double loop") {
    std::mt19937_64 gen(4);
    for (auto side : {CoreSide::Symmetric, CoreSide::OneSided}) {
        const LinearCoreSpec spec(BaseLoss::exponential(), side);
        for (int rep = 0; rep < 20; ++rep) {
            const auto m = random_model(gen, 2, 3);
            const auto x = random_x(gen, 2, 3);
            const auto y = random_y(gen, 2, 2);
            const auto seqs = all_sequences(2, 2);
            double full = 0.0, nb = 0.0;
            for (const auto& a : seqs) {
                const double w = 1.0 - hamming_loss(a, y);
                for (const auto& b : seqs) {
                    if (a == b) continue;
                    const double t = w * lc_value(spec, score_by_hand(m, x, a) - score_by_hand(m, x, b));
                    full += t;
                    if (hamming_loss(a, b) * 2 == 1.0) nb += t;
                }
            }
            CHECK(std::abs(structured_sum_loss_exact(spec, m, x, y) - full) < 1e-10 * (1.0 + full));
            CHECK(std::abs(structured_sum_loss_exact(spec, m, x, y, InnerSupport::Neighbors) - nb) < 1e-10 * (1.0 + nb));
        }
    }
}

TEST_CASE("structured sum loss: gradient vs finite differences") {
    std::mt19937_64 gen(5);
    for (int rep = 0; rep < 20; ++rep) {
        const LinearCoreSpec spec(rep % 2 ? BaseLoss::logistic() : BaseLoss::exponential(),
                                  rep % 3 ? CoreSide::Symmetric : CoreSide::OneSided);
        const std::size_t Y = 2 + rep % 2, L = 2 + rep % 2;
        const auto m = random_model(gen, Y, 2, 0.7);
        const auto x = random_x(gen, L, 2);
        const auto y = random_y(gen, L, Y);
        for (auto support : {InnerSupport::Full, InnerSupport::Neighbors}) {
            const auto g = structured_sum_loss_gradient_exact(spec, m, x, y, support);
            const auto fd = weight_fd(m, [&](const ChainModel& mm) { return structured_sum_loss_exact(spec, mm, x, y, support); });
            for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g[i] - fd[i]) < 1e-5);
        }
    }
}

TEST_CASE("structured sum loss: convex along weight segments") {
    std::mt19937_64 gen(6);
    const LinearCoreSpec spec(BaseLoss::logistic());
    const auto x = random_x(gen, 3, 2);
    const auto y = random_y(gen, 3, 2);
    for (int rep = 0; rep < 50; ++rep) {
        const auto a = random_model(gen, 2, 2), b = random_model(gen, 2, 2);
        std::vector<double> mid(a.num_weights());
        for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (a.weights()[i] + b.weights()[i]);
        const double fm = structured_sum_loss_exact(spec, ChainModel(2, 2, mid), x, y);
        const double avg = 0.5 * (structured_sum_loss_exact(spec, a, x, y) + structured_sum_loss_exact(spec, b, x, y));
        CHECK(fm <= avg + 1e-12 * (1.0 + avg));
    }
}

TEST_CASE("structured regrets") {
    const LinearCoreSpec spec(BaseLoss::logistic());
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> ex(1.0);
    for (int rep = 0; rep < 400; ++rep) {
        const std::size_t n = 3 + rep % 4;
        std::vector<double> p(n), s(n), l(n * n, 0.0);
        double tot = 0.0;
        for (auto& v : p) tot += (v = ex(gen));
        for (auto& v : p) v /= tot;
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) acc += p[k];
        p[n - 1] = 1.0 - acc;
        for (auto& v : s) v = 2.0 * (unif(gen) - 0.5) * 3.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b) l[a * n + b] = unif(gen);
        const CategoricalDistribution pd(p);
        const auto r = structured_conditional_regrets(spec, pd, ScoreTable(s), LossMatrix(n, l));
        CHECK(r.regret_target <= r.regret_surrogate + 1e-8);
        CHECK(r.regret_target >= 0.0);

        // 0-1 loss reduces to the multi-class oracle
        const auto a = structured_conditional_regrets(spec, pd, ScoreTable(s), LossMatrix::zero_one(n));
        const auto b = mc_conditional_regrets(spec, pd, ScoreTable(s));
        CHECK(std::abs(a.regret_target - b.regret_target) < 1e-10);
        CHECK(std::abs(a.regret_surrogate - b.regret_surrogate) < 1e-10);
    }
    // argmax at the risk minimizer
    const CategoricalDistribution p({0.2, 0.5, 0.3});
    CHECK(structured_conditional_regrets(spec, p, ScoreTable({0.0, 1.0, 0.5}), LossMatrix::zero_one(3)).regret_target == 0.0);
}

TEST_CASE("pairwise sum") {
    std::vector<double> v(1000, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}
