#pragma once

// Linear-chain sequence scoring, joint feature maps, and the exact structured
// sum loss over an enumerable label set.
//
// Flat weight / feature layout (shared by every trainer):
//   [0, Y*d)            unary block, label-major: index = label*d + feature
//   [Y*d, Y*d + Y*Y)    transition block, row-major: index = Y*d + from*Y + to

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lincore/multiclass.hpp"
#include "lincore/scalar_losses.hpp"

namespace lincore {

using LabelSeq = std::vector<Label>;

/// Input sequence x_1..x_L of d-dimensional feature vectors (row-major).
class FeatureSeq {
public:
    FeatureSeq() = default;
    FeatureSeq(std::size_t length, std::size_t dim);
    FeatureSeq(std::size_t length, std::size_t dim, std::vector<double> data);

    std::size_t length() const { return length_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> row(std::size_t j) const { return {data_.data() + j * dim_, dim_}; }
    std::span<double> row(std::size_t j) { return {data_.data() + j * dim_, dim_}; }
    std::span<const double> data() const { return data_; }

private:
    std::size_t length_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

struct SequenceExample {
    FeatureSeq x;
    LabelSeq y;
};

/// Sparse vector with possibly repeated indices; value at i is the sum.
struct SparseVector {
    std::vector<std::pair<std::size_t, double>> entries;

    void add(std::size_t index, double value) { entries.emplace_back(index, value); }
    double dot(std::span<const double> dense) const;
    /// dense += alpha * this
    void axpy_into(double alpha, std::span<double> dense) const;
    std::vector<double> to_dense(std::size_t size) const;
};

class ChainModel {
public:
    ChainModel(std::size_t num_labels, std::size_t dim);
    ChainModel(std::size_t num_labels, std::size_t dim, std::vector<double> weights);

    std::size_t num_labels() const { return labels_; }
    std::size_t dim() const { return dim_; }
    std::size_t num_weights() const { return weights_.size(); }

    std::span<const double> weights() const { return weights_; }
    std::span<double> weights() { return weights_; }

    std::span<const double> unary(Label k) const { return {weights_.data() + k * dim_, dim_}; }
    std::span<double> unary(Label k) { return {weights_.data() + k * dim_, dim_}; }
    double transition(Label from, Label to) const { return weights_[transition_index(from, to)]; }
    double& transition(Label from, Label to) { return weights_[transition_index(from, to)]; }

    std::size_t unary_index(Label k, std::size_t feature) const { return k * dim_ + feature; }
    std::size_t transition_index(Label from, Label to) const {
        return labels_ * dim_ + from * labels_ + to;
    }

private:
    std::size_t labels_;
    std::size_t dim_;
    std::vector<double> weights_;
};

/// Unary potentials U[j*Y + k] = unary[k] . x_j.
std::vector<double> unary_scores(const ChainModel& model, const FeatureSeq& x);

double sequence_score(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y);
std::vector<double> joint_feature(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y);
SparseVector joint_feature_sparse(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y);

/// Fraction of positions where the sequences differ.
double hamming_loss(const LabelSeq& a, const LabelSeq& b);

/// Throws UnsupportedError when labels^length exceeds the limit.
std::size_t enumeration_size(std::size_t labels, std::size_t length,
                             std::size_t limit = 4096);
/// All label sequences in lexicographic order (position 0 most significant).
std::vector<LabelSeq> enumerate_sequences(std::size_t labels, std::size_t length,
                                          std::size_t limit = 4096);
/// Lexicographic rank of y among all labels^length sequences.
std::size_t sequence_index(const LabelSeq& y, std::size_t labels);

/// max over all label sequences of ||joint_feature(x, y)||_2 (enumeration).
double feature_radius_exact(const ChainModel& model, const FeatureSeq& x);
/// Closed-form bound sqrt((sum_j ||x_j||)^2 + (L-1)^2), valid for every y.
double feature_radius_bound(const FeatureSeq& x);

/// Target loss ell(y', y) over a finite label set, entries in [0, 1],
/// zero diagonal. Stored row-major with row = predicted y'.
class LossMatrix {
public:
    LossMatrix(std::size_t n, std::vector<double> entries);

    static LossMatrix zero_one(std::size_t n);
    static LossMatrix hamming(std::size_t labels, std::size_t length);

    std::size_t size() const { return n_; }
    double operator()(std::size_t predicted, std::size_t truth) const { return data_[predicted * n_ + truth]; }
    double similarity(std::size_t predicted, std::size_t truth) const { return 1.0 - (*this)(predicted, truth); }

private:
    std::size_t n_;
    std::vector<double> data_;
};

/// Which y'' the inner sum of the structured loss ranges over.
enum class InnerSupport {
    Full,       // every y'' != y'
    Neighbors,  // sequences differing from y' at exactly one position
};

/// Exact structured sum loss
///   sum_{y'} lbar(y', y) sum_{y'' != y'} phi(h(y') - h(y''))
/// with lbar = 1 - Hamming. Requires labels^L <= 4096.
double structured_sum_loss_exact(const LinearCoreSpec& spec, const ChainModel& model, const FeatureSeq& x,
                                 const LabelSeq& y, InnerSupport support = InnerSupport::Full);

/// Same loss with caller-supplied similarity weights over the enumeration.
double structured_sum_loss_exact(const LinearCoreSpec& spec, const ChainModel& model, const FeatureSeq& x,
                                 std::span<const double> similarity, InnerSupport support = InnerSupport::Full);

std::vector<double> structured_sum_loss_gradient_exact(const LinearCoreSpec& spec, const ChainModel& model,
                                                       const FeatureSeq& x, const LabelSeq& y,
                                                       InnerSupport support = InnerSupport::Full);

std::vector<double> structured_sum_loss_gradient_exact(const LinearCoreSpec& spec, const ChainModel& model,
                                                       const FeatureSeq& x, std::span<const double> similarity,
                                                       InnerSupport support = InnerSupport::Full);

/// Hamming similarity 1 - hamming(y', y) for every enumerated y'.
std::vector<double> hamming_similarity(std::size_t labels, const LabelSeq& y);

/// Structured conditional regrets for |Y| <= 8 outcomes: target regret under
/// ell, surrogate regret against the W-weighted sum of pairwise infima where
/// W(y') = sum_y p_y lbar(y', y).
ConditionalRegrets structured_conditional_regrets(const LinearCoreSpec& spec, const CategoricalDistribution& p,
                                                  const ScoreTable& scores, const LossMatrix& loss);

/// Deterministic pairwise (tree) summation.
double pairwise_sum(std::span<const double> values);

}  // namespace lincore
