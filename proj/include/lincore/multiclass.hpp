#pragma once

// Multi-class sum losses over a finite label set, the cross-entropy and
// generalized cross-entropy baselines, and brute-force conditional regrets.
//
// phi is decreasing, so the sum loss is written sum_{y' != y} phi(m_{y,y'})
// with m_{y,y'} = h(y) - h(y'); it plays the role of Phi(-m) for an
// increasing base. The y' = y term is excluded (including it would only add
// the constant phi(0)).

#include <cstddef>
#include <span>
#include <vector>

#include "lincore/scalar_losses.hpp"

namespace lincore {

using Label = std::size_t;

/// Finite score assignment h(x, .) over n >= 2 labels.
class ScoreTable {
public:
    explicit ScoreTable(std::vector<double> scores);

    std::size_t size() const { return scores_.size(); }
    double operator[](std::size_t i) const { return scores_[i]; }
    std::span<const double> values() const { return scores_; }
    /// Highest-scoring label; ties go to the lowest index.
    Label argmax() const;

private:
    std::vector<double> scores_;
};

class CategoricalDistribution {
public:
    explicit CategoricalDistribution(std::vector<double> probs);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> values() const { return probs_; }

private:
    std::vector<double> probs_;
};

/// Lowest index attaining the maximum.
Label argmax_lowest(std::span<const double> v);

double mc_sum_loss(const LinearCoreSpec& spec, const ScoreTable& scores, Label y);
std::vector<double> mc_sum_loss_gradient(const LinearCoreSpec& spec, const ScoreTable& scores, Label y);

/// Per-pair derivative magnitudes |phi'(m_{y,y'})| for y' != y.
std::vector<double> mc_pair_gradient_magnitudes(const LinearCoreSpec& spec, const ScoreTable& scores,
                                                Label y);

struct ConditionalRegrets {
    double regret_target = 0.0;
    double regret_surrogate = 0.0;
};

/// Brute-force conditional regrets for n <= kMaxRegretLabels.
/// regret_target is the 0-1 regret max_y p_y - p_{argmax h}; the surrogate
/// best-in-class error is the sum over unordered pairs of the pairwise
/// infima over u in R.
ConditionalRegrets mc_conditional_regrets(const LinearCoreSpec& spec, const CategoricalDistribution& p,
                                          const ScoreTable& scores);

inline constexpr std::size_t kMaxRegretLabels = 8;

/// Softmax probabilities, max-shifted.
std::vector<double> softmax(std::span<const double> scores);
double log_sum_exp(std::span<const double> v);

double ce_loss(const ScoreTable& scores, Label y);
std::vector<double> ce_gradient(const ScoreTable& scores, Label y);

/// Generalized cross-entropy (1 - p_y^q)/q with q in (0, 1].
double gce_loss(const ScoreTable& scores, Label y, double q);
std::vector<double> gce_gradient(const ScoreTable& scores, Label y, double q);

}  // namespace lincore
