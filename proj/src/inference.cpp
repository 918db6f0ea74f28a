#include "lincore/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lincore/errors.hpp"

namespace lincore {

namespace {

void check_nonempty(const FeatureSeq& x) {
    if (x.length() == 0) {
        throw DomainError("inference on an empty sequence");
    }
}

double lse(const double* v, std::size_t n) {
    double m = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
    if (m == -INFINITY) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

// alpha[j*Y + k] = log sum over prefixes ending in k at position j.
std::vector<double> forward(const ChainModel& model, const std::vector<double>& U, std::size_t L) {
    const std::size_t Y = model.num_labels();
    std::vector<double> alpha(L * Y);
    std::copy(U.begin(), U.begin() + static_cast<std::ptrdiff_t>(Y), alpha.begin());
    std::vector<double> tmp(Y);
    for (std::size_t j = 1; j < L; ++j) {
        const double* prev = &alpha[(j - 1) * Y];
        for (Label k = 0; k < Y; ++k) {
            for (Label from = 0; from < Y; ++from) {
                tmp[from] = prev[from] + model.transition(from, k);
            }
            alpha[j * Y + k] = U[j * Y + k] + lse(tmp.data(), Y);
        }
    }
    return alpha;
}

std::vector<double> backward(const ChainModel& model, const std::vector<double>& U, std::size_t L) {
    const std::size_t Y = model.num_labels();
    std::vector<double> beta(L * Y, 0.0);
    std::vector<double> tmp(Y);
    for (std::size_t j = L - 1; j-- > 0;) {
        const double* next = &beta[(j + 1) * Y];
        const double* un = &U[(j + 1) * Y];
        for (Label k = 0; k < Y; ++k) {
            for (Label to = 0; to < Y; ++to) {
                tmp[to] = model.transition(k, to) + un[to] + next[to];
            }
            beta[j * Y + k] = lse(tmp.data(), Y);
        }
    }
    return beta;
}

}  // namespace

Decoded viterbi_potentials(const ChainModel& model, std::span<const double> U, std::size_t L) {
    if (L == 0) {
        throw DomainError("inference on an empty sequence");
    }
    const std::size_t Y = model.num_labels();
    if (U.size() != L * Y) {
        throw DomainError("viterbi: potential table has the wrong size");
    }
    std::vector<double> delta(U.begin(), U.begin() + static_cast<std::ptrdiff_t>(Y));
    std::vector<double> next(Y);
    std::vector<Label> back((L > 0 ? L - 1 : 0) * Y);
    for (std::size_t j = 1; j < L; ++j) {
        for (Label k = 0; k < Y; ++k) {
            Label best = 0;
            double bv = delta[0] + model.transition(0, k);
            for (Label from = 1; from < Y; ++from) {
                const double v = delta[from] + model.transition(from, k);
                if (v > bv) {
                    bv = v;
                    best = from;
                }
            }
            next[k] = bv + U[j * Y + k];
            back[(j - 1) * Y + k] = best;
        }
        delta.swap(next);
    }
    Decoded out;
    out.labels.resize(L);
    Label last = argmax_lowest(delta);
    out.score = delta[last];
    out.labels[L - 1] = last;
    for (std::size_t j = L - 1; j > 0; --j) {
        last = back[(j - 1) * Y + last];
        out.labels[j - 1] = last;
    }
    return out;
}

Decoded viterbi(const ChainModel& model, const FeatureSeq& x) {
    check_nonempty(x);
    return viterbi_potentials(model, unary_scores(model, x), x.length());
}

Decoded loss_augmented_viterbi(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y_true) {
    check_nonempty(x);
    if (y_true.size() != x.length()) {
        throw DomainError("label and feature sequences differ in length");
    }
    const std::size_t Y = model.num_labels();
    const double bonus = 1.0 / static_cast<double>(x.length());
    std::vector<double> U = unary_scores(model, x);
    for (std::size_t j = 0; j < x.length(); ++j) {
        if (y_true[j] >= Y) {
            throw DomainError("label out of range");
        }
        for (Label k = 0; k < Y; ++k) {
            if (k != y_true[j]) U[j * Y + k] += bonus;
        }
    }
    return viterbi_potentials(model, U, x.length());
}

double log_partition(const ChainModel& model, const FeatureSeq& x) {
    check_nonempty(x);
    const std::size_t Y = model.num_labels();
    const auto U = unary_scores(model, x);
    const auto alpha = forward(model, U, x.length());
    return lse(&alpha[(x.length() - 1) * Y], Y);
}

Marginals forward_backward(const ChainModel& model, const FeatureSeq& x) {
    check_nonempty(x);
    const std::size_t Y = model.num_labels();
    const std::size_t L = x.length();
    const auto U = unary_scores(model, x);
    const auto alpha = forward(model, U, L);
    const auto beta = backward(model, U, L);

    Marginals m;
    m.length = L;
    m.labels = Y;
    m.log_partition = lse(&alpha[(L - 1) * Y], Y);
    m.unary.resize(L * Y);
    for (std::size_t i = 0; i < L * Y; ++i) {
        m.unary[i] = std::exp(alpha[i] + beta[i] - m.log_partition);
    }
    m.transition.resize((L - 1) * Y * Y);
    for (std::size_t j = 0; j + 1 < L; ++j) {
        for (Label a = 0; a < Y; ++a) {
            for (Label b = 0; b < Y; ++b) {
                m.transition[(j * Y + a) * Y + b] = std::exp(alpha[j * Y + a] + model.transition(a, b) +
                                                             U[(j + 1) * Y + b] + beta[(j + 1) * Y + b] -
                                                             m.log_partition);
            }
        }
    }
    return m;
}

LossGradient crf_nll_and_gradient(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y) {
    check_nonempty(x);
    const std::size_t Y = model.num_labels();
    const std::size_t L = x.length();
    const std::size_t d = model.dim();
    const auto U = unary_scores(model, x);
    const auto alpha = forward(model, U, L);
    const auto beta = backward(model, U, L);
    const double logz = lse(&alpha[(L - 1) * Y], Y);

    LossGradient out;
    out.loss = logz - sequence_score(model, x, y);
    out.gradient.assign(model.num_weights(), 0.0);
    auto& g = out.gradient;
    for (std::size_t j = 0; j < L; ++j) {
        const auto xj = x.row(j);
        for (Label k = 0; k < Y; ++k) {
            const double p = std::exp(alpha[j * Y + k] + beta[j * Y + k] - logz);
            double* w = &g[model.unary_index(k, 0)];
            for (std::size_t i = 0; i < d; ++i) w[i] += p * xj[i];
        }
    }
    for (std::size_t j = 0; j + 1 < L; ++j) {
        for (Label a = 0; a < Y; ++a) {
            const double base = alpha[j * Y + a] - logz;
            for (Label b = 0; b < Y; ++b) {
                g[model.transition_index(a, b)] +=
                    std::exp(base + model.transition(a, b) + U[(j + 1) * Y + b] + beta[(j + 1) * Y + b]);
            }
        }
    }
    joint_feature_sparse(model, x, y).axpy_into(-1.0, g);
    return out;
}

SparseLossGradient ssvm_loss_and_sparse_subgradient(const ChainModel& model, const FeatureSeq& x,
                                                    const LabelSeq& y) {
    const Decoded hat = loss_augmented_viterbi(model, x, y);
    SparseLossGradient out;
    out.loss = std::max(0.0, hat.score - sequence_score(model, x, y));
    if (out.loss > 0.0) {
        out.gradient = joint_feature_sparse(model, x, hat.labels);
        for (const auto& [i, v] : joint_feature_sparse(model, x, y).entries) {
            out.gradient.add(i, -v);
        }
    }
    return out;
}

LossGradient ssvm_loss_and_subgradient(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y) {
    const auto s = ssvm_loss_and_sparse_subgradient(model, x, y);
    return {s.loss, s.gradient.to_dense(model.num_weights())};
}

}  // namespace lincore
