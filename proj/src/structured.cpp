#include "lincore/structured.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lincore/consistency.hpp"
#include "lincore/errors.hpp"

namespace lincore {

FeatureSeq::FeatureSeq(std::size_t length, std::size_t dim)
    : length_(length), dim_(dim), data_(length * dim, 0.0) {}

FeatureSeq::FeatureSeq(std::size_t length, std::size_t dim, std::vector<double> data)
    : length_(length), dim_(dim), data_(std::move(data)) {
    if (data_.size() != length * dim) {
        throw DomainError("FeatureSeq: data size does not match length*dim");
    }
}

double SparseVector::dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& [i, v] : entries) {
        s += dense[i] * v;
    }
    return s;
}

void SparseVector::axpy_into(double alpha, std::span<double> dense) const {
    for (const auto& [i, v] : entries) {
        dense[i] += alpha * v;
    }
}

std::vector<double> SparseVector::to_dense(std::size_t size) const {
    std::vector<double> d(size, 0.0);
    axpy_into(1.0, d);
    return d;
}

ChainModel::ChainModel(std::size_t num_labels, std::size_t dim)
    : labels_(num_labels), dim_(dim), weights_(num_labels * dim + num_labels * num_labels, 0.0) {
    if (num_labels < 2 || dim < 1) {
        throw DomainError("ChainModel: need at least two labels and one feature");
    }
}

ChainModel::ChainModel(std::size_t num_labels, std::size_t dim, std::vector<double> weights)
    : labels_(num_labels), dim_(dim), weights_(std::move(weights)) {
    if (num_labels < 2 || dim < 1) {
        throw DomainError("ChainModel: need at least two labels and one feature");
    }
    if (weights_.size() != num_labels * dim + num_labels * num_labels) {
        throw DomainError("ChainModel: weight vector has the wrong size");
    }
}

namespace {

void check_instance(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y) {
    if (x.dim() != model.dim()) {
        throw DomainError("feature dimension does not match model");
    }
    if (y.size() != x.length()) {
        throw DomainError("label and feature sequences differ in length");
    }
    for (Label k : y) {
        if (k >= model.num_labels()) {
            std::ostringstream os;
            os << "label " << k << " out of range for " << model.num_labels() << " labels";
            throw DomainError(os.str());
        }
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

}  // namespace

std::vector<double> unary_scores(const ChainModel& model, const FeatureSeq& x) {
    if (x.dim() != model.dim()) {
        throw DomainError("feature dimension does not match model");
    }
    const std::size_t Y = model.num_labels();
    std::vector<double> u(x.length() * Y);
    for (std::size_t j = 0; j < x.length(); ++j) {
        const auto xj = x.row(j);
        for (Label k = 0; k < Y; ++k) {
            u[j * Y + k] = dot(model.unary(k), xj);
        }
    }
    return u;
}

double sequence_score(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y) {
    check_instance(model, x, y);
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        s += dot(model.unary(y[j]), x.row(j));
        if (j > 0) {
            s += model.transition(y[j - 1], y[j]);
        }
    }
    return s;
}

SparseVector joint_feature_sparse(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y) {
    check_instance(model, x, y);
    SparseVector f;
    f.entries.reserve(y.size() * (x.dim() + 1));
    for (std::size_t j = 0; j < y.size(); ++j) {
        const auto xj = x.row(j);
        for (std::size_t i = 0; i < xj.size(); ++i) {
            f.add(model.unary_index(y[j], i), xj[i]);
        }
        if (j > 0) {
            f.add(model.transition_index(y[j - 1], y[j]), 1.0);
        }
    }
    return f;
}

std::vector<double> joint_feature(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y) {
    return joint_feature_sparse(model, x, y).to_dense(model.num_weights());
}

double hamming_loss(const LabelSeq& a, const LabelSeq& b) {
    if (a.size() != b.size()) {
        throw DomainError("hamming_loss: sequences differ in length");
    }
    if (a.empty()) {
        throw DomainError("hamming_loss: empty sequences");
    }
    std::size_t diff = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        diff += a[j] != b[j] ? 1 : 0;
    }
    return static_cast<double>(diff) / static_cast<double>(a.size());
}

std::size_t enumeration_size(std::size_t labels, std::size_t length, std::size_t limit) {
    std::size_t n = 1;
    for (std::size_t j = 0; j < length; ++j) {
        n *= labels;
        if (n > limit) {
            std::ostringstream os;
            os << "enumeration of " << labels << "^" << length << " sequences exceeds the limit " << limit;
            throw UnsupportedError(os.str());
        }
    }
    return n;
}

std::vector<LabelSeq> enumerate_sequences(std::size_t labels, std::size_t length, std::size_t limit) {
    const std::size_t n = enumeration_size(labels, length, limit);
    std::vector<LabelSeq> out(n, LabelSeq(length));
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t r = idx;
        for (std::size_t j = length; j-- > 0;) {
            out[idx][j] = r % labels;
            r /= labels;
        }
    }
    return out;
}

std::size_t sequence_index(const LabelSeq& y, std::size_t labels) {
    std::size_t idx = 0;
    for (Label k : y) {
        idx = idx * labels + k;
    }
    return idx;
}

double feature_radius_exact(const ChainModel& model, const FeatureSeq& x) {
    double r2 = 0.0;
    for (const LabelSeq& y : enumerate_sequences(model.num_labels(), x.length())) {
        const auto f = joint_feature(model, x, y);
        r2 = std::max(r2, dot(f, f));
    }
    return std::sqrt(r2);
}

double feature_radius_bound(const FeatureSeq& x) {
    double unary = 0.0;
    for (std::size_t j = 0; j < x.length(); ++j) {
        const auto r = x.row(j);
        unary += std::sqrt(dot(r, r));
    }
    const double trans = x.length() > 0 ? static_cast<double>(x.length() - 1) : 0.0;
    return std::sqrt(unary * unary + trans * trans);
}

LossMatrix::LossMatrix(std::size_t n, std::vector<double> entries) : n_(n), data_(std::move(entries)) {
    if (data_.size() != n * n) {
        throw DomainError("LossMatrix: entry count does not match n*n");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = data_[i * n + j];
            if (i == j && v != 0.0) {
                throw DomainError("LossMatrix: diagonal must be zero");
            }
            if (!(v >= 0.0 && v <= 1.0)) {
                std::ostringstream os;
                os << "LossMatrix: entry (" << i << "," << j << ") = " << v << " outside [0, 1]";
                throw DomainError(os.str());
            }
        }
    }
}

LossMatrix LossMatrix::zero_one(std::size_t n) {
    std::vector<double> e(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        e[i * n + i] = 0.0;
    }
    return LossMatrix(n, std::move(e));
}

LossMatrix LossMatrix::hamming(std::size_t labels, std::size_t length) {
    const auto seqs = enumerate_sequences(labels, length);
    const std::size_t n = seqs.size();
    std::vector<double> e(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            e[i * n + j] = hamming_loss(seqs[i], seqs[j]);
        }
    }
    return LossMatrix(n, std::move(e));
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> hamming_similarity(std::size_t labels, const LabelSeq& y) {
    const auto seqs = enumerate_sequences(labels, y.size());
    std::vector<double> s(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        s[i] = 1.0 - hamming_loss(seqs[i], y);
    }
    return s;
}

namespace {

struct Enumerated {
    std::vector<LabelSeq> seqs;
    std::vector<double> scores;
    std::vector<std::size_t> place;  // labels^(L-1-j)
};

Enumerated enumerate_scores(const ChainModel& model, const FeatureSeq& x) {
    Enumerated e;
    e.seqs = enumerate_sequences(model.num_labels(), x.length());
    e.scores.resize(e.seqs.size());
    for (std::size_t i = 0; i < e.seqs.size(); ++i) {
        e.scores[i] = sequence_score(model, x, e.seqs[i]);
    }
    e.place.assign(x.length(), 1);
    for (std::size_t j = x.length(); j-- > 1;) {
        e.place[j - 1] = e.place[j] * model.num_labels();
    }
    return e;
}

// Calls fn(other_index) for every y'' in the inner support of y'.
template <typename Fn>
void for_each_inner(const Enumerated& e, std::size_t labels, std::size_t idx, InnerSupport support, Fn&& fn) {
    if (support == InnerSupport::Full) {
        for (std::size_t k = 0; k < e.seqs.size(); ++k) {
            if (k != idx) fn(k);
        }
        return;
    }
    const LabelSeq& y = e.seqs[idx];
    for (std::size_t j = 0; j < y.size(); ++j) {
        const std::size_t base = idx - y[j] * e.place[j];
        for (Label c = 0; c < labels; ++c) {
            if (c != y[j]) fn(base + c * e.place[j]);
        }
    }
}

void check_similarity(const Enumerated& e, std::span<const double> similarity) {
    if (similarity.size() != e.seqs.size()) {
        throw DomainError("similarity weights must cover every enumerated sequence");
    }
}

}  // namespace

double structured_sum_loss_exact(const LinearCoreSpec& spec, const ChainModel& model, const FeatureSeq& x,
                                 std::span<const double> similarity, InnerSupport support) {
    const Enumerated e = enumerate_scores(model, x);
    check_similarity(e, similarity);
    std::vector<double> outer(e.seqs.size(), 0.0);
    std::vector<double> inner;
    for (std::size_t a = 0; a < e.seqs.size(); ++a) {
        if (similarity[a] == 0.0) continue;
        inner.clear();
        for_each_inner(e, model.num_labels(), a, support,
                       [&](std::size_t b) { inner.push_back(lc_value(spec, e.scores[a] - e.scores[b])); });
        outer[a] = similarity[a] * pairwise_sum(inner);
    }
    return pairwise_sum(outer);
}

double structured_sum_loss_exact(const LinearCoreSpec& spec, const ChainModel& model, const FeatureSeq& x,
                                 const LabelSeq& y, InnerSupport support) {
    if (y.size() != x.length()) {
        throw DomainError("label and feature sequences differ in length");
    }
    return structured_sum_loss_exact(spec, model, x, hamming_similarity(model.num_labels(), y), support);
}

std::vector<double> structured_sum_loss_gradient_exact(const LinearCoreSpec& spec, const ChainModel& model,
                                                       const FeatureSeq& x, std::span<const double> similarity,
                                                       InnerSupport support) {
    const Enumerated e = enumerate_scores(model, x);
    check_similarity(e, similarity);
    // d/dw sum lbar(a) phi(h_a - h_b) = sum lbar(a) phi'(m) (f_a - f_b):
    // collect a scalar coefficient per sequence, then expand features once.
    std::vector<double> coef(e.seqs.size(), 0.0);
    for (std::size_t a = 0; a < e.seqs.size(); ++a) {
        if (similarity[a] == 0.0) continue;
        for_each_inner(e, model.num_labels(), a, support, [&](std::size_t b) {
            const double d = similarity[a] * lc_derivative(spec, e.scores[a] - e.scores[b]);
            coef[a] += d;
            coef[b] -= d;
        });
    }
    std::vector<double> grad(model.num_weights(), 0.0);
    for (std::size_t a = 0; a < e.seqs.size(); ++a) {
        if (coef[a] != 0.0) {
            joint_feature_sparse(model, x, e.seqs[a]).axpy_into(coef[a], grad);
        }
    }
    return grad;
}

std::vector<double> structured_sum_loss_gradient_exact(const LinearCoreSpec& spec, const ChainModel& model,
                                                       const FeatureSeq& x, const LabelSeq& y,
                                                       InnerSupport support) {
    if (y.size() != x.length()) {
        throw DomainError("label and feature sequences differ in length");
    }
    return structured_sum_loss_gradient_exact(spec, model, x, hamming_similarity(model.num_labels(), y), support);
}

ConditionalRegrets structured_conditional_regrets(const LinearCoreSpec& spec, const CategoricalDistribution& p,
                                                  const ScoreTable& scores, const LossMatrix& loss) {
    const std::size_t n = scores.size();
    if (n > kMaxRegretLabels) {
        std::ostringstream os;
        os << "structured_conditional_regrets: |Y| = " << n << " exceeds brute-force limit " << kMaxRegretLabels;
        throw UnsupportedError(os.str());
    }
    if (p.size() != n || loss.size() != n) {
        throw DomainError("structured_conditional_regrets: size mismatch");
    }
    std::vector<double> risk(n, 0.0);
    std::vector<double> weight(n, 0.0);  // W(y') = sum_y p_y lbar(y', y)
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t y = 0; y < n; ++y) {
            risk[a] += p[y] * loss(a, y);
            weight[a] += p[y] * loss.similarity(a, y);
        }
    }
    ConditionalRegrets r;
    r.regret_target = risk[scores.argmax()] - *std::min_element(risk.begin(), risk.end());

    double conditional = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        if (weight[a] == 0.0) continue;
        for (std::size_t b = 0; b < n; ++b) {
            if (b != a) conditional += weight[a] * lc_value(spec, scores[a] - scores[b]);
        }
    }
    double best = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            best += pair_infimum(spec, weight[a], weight[b]);
        }
    }
    r.regret_surrogate = conditional - best;
    return r;
}

}  // namespace lincore
