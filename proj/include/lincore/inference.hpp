#pragma once

// Exact chain inference: Viterbi, loss-augmented Viterbi, forward-backward,
// and the CRF / structured-hinge objectives built on them. All O(L Y^2).

#include <vector>

#include "lincore/structured.hpp"

namespace lincore {

struct Decoded {
    LabelSeq labels;
    double score = 0.0;
};

struct Marginals {
    std::size_t length = 0;
    std::size_t labels = 0;
    std::vector<double> unary;       // [j*Y + k]
    std::vector<double> transition;  // [(j*Y + from)*Y + to], j < L-1
    double log_partition = 0.0;

    double unary_at(std::size_t j, Label k) const { return unary[j * labels + k]; }
    double transition_at(std::size_t j, Label from, Label to) const {
        return transition[(j * labels + from) * labels + to];
    }
};

/// Highest-scoring sequence. Ties go to the lower label at every step.
Decoded viterbi(const ChainModel& model, const FeatureSeq& x);

/// argmax_{y'} score(y') + hamming(y', y_true); score field holds the
/// augmented value.
Decoded loss_augmented_viterbi(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y_true);

/// Viterbi over precomputed unary potentials U[j*Y + k].
Decoded viterbi_potentials(const ChainModel& model, std::span<const double> unary, std::size_t length);

Marginals forward_backward(const ChainModel& model, const FeatureSeq& x);

/// log sum_y exp(score(y)), forward pass only.
double log_partition(const ChainModel& model, const FeatureSeq& x);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

/// NLL log Z - score(y) and its gradient E[f] - f(y). Expected transition
/// counts are accumulated directly, without storing per-position slabs.
LossGradient crf_nll_and_gradient(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y);

/// Structured hinge max_{y'} [hamming(y', y) + score(y') - score(y)] and a
/// subgradient f(y_hat) - f(y). At exact equality (loss 0) the subgradient is
/// zero.
LossGradient ssvm_loss_and_subgradient(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y);

/// Same as ssvm_loss_and_subgradient but the subgradient is sparse.
struct SparseLossGradient {
    double loss = 0.0;
    SparseVector gradient;
};
SparseLossGradient ssvm_loss_and_sparse_subgradient(const ChainModel& model, const FeatureSeq& x,
                                                    const LabelSeq& y);

}  // namespace lincore
