#pragma once

// Stochastic gradient estimators for the structured linear-core loss and the
// SGD driver shared by the SSVM, CRF and linear-core objectives.
//
// Pair estimator. Draw y' ~ D1(.|y) and y'' ~ D2(.|y'), then
//   g = w1 * w2 * phi'(m) * (f(y') - f(y'')),  m = h(y') - h(y''),
//   w1 = lbar(y', y) / D1(y'),  w2 = 1 / D2(y''),
// which is unbiased for the gradient of
//   sum_{y'} lbar(y', y) sum_{y'' in supp D2(.|y')} phi(h(y') - h(y'')).
// With the neighbor inner proposal that support is the Hamming-1 ball, so
// the target is the neighbor-restricted sum loss, not the full one.
//
// Trainers optimize the normalized objective (divided by
// Z = sum_{y'} lbar(y', y) * |supp D2| = Y^(L-1) * |supp D2|) so step sizes
// do not depend on Y or L.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lincore/rng.hpp"
#include "lincore/structured.hpp"

namespace lincore {

enum class InnerProposal {
    Neighbor,     // one uniformly chosen position moved to a different label
    UniformFull,  // uniform over all sequences other than y'
};

enum class OuterProposal {
    Corruption,  // keep each position with prob 1 - rho, else a uniform other label
    Similarity,  // copy one random position of y, draw the rest uniformly: D1 = lbar / Y^(L-1)
};

struct PairProposal {
    double corruption_rate = 0.3;
    InnerProposal inner = InnerProposal::Neighbor;
    OuterProposal outer = OuterProposal::Corruption;
};

void validate(const PairProposal& proposal);

double outer_probability(const PairProposal& proposal, std::size_t labels, const LabelSeq& y_outer,
                         const LabelSeq& y);
/// Zero when y_inner is outside the support (including y_inner == y_outer).
double inner_probability(const PairProposal& proposal, std::size_t labels, const LabelSeq& y_outer,
                         const LabelSeq& y_inner);
LabelSeq sample_outer(const PairProposal& proposal, std::size_t labels, const LabelSeq& y, Rng& rng);
LabelSeq sample_inner(const PairProposal& proposal, std::size_t labels, const LabelSeq& y_outer, Rng& rng);
/// |supp D2(.|y')| as a double.
double inner_support_size(const PairProposal& proposal, std::size_t labels, std::size_t length);

struct GradEstimate {
    SparseVector gradient;
    double w1 = 0.0;
    double w2 = 0.0;
    double derivative = 0.0;  // phi'(m)
    /// w1 * w2 / Z, computed in log space so it stays finite at large L.
    double normalized_weight = 0.0;
    LabelSeq y_outer;
    LabelSeq y_inner;

    std::vector<double> dense(std::size_t size) const { return gradient.to_dense(size); }
};

GradEstimate lc_pair_gradient_estimate(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y,
                                       const LinearCoreSpec& spec, const PairProposal& proposal, Rng& rng);

/// Exact expectation of lc_pair_gradient_estimate by enumerating the sample
/// space (requires labels^L <= 4096).
std::vector<double> lc_pair_estimator_expectation(const ChainModel& model, const FeatureSeq& x,
                                                  const LabelSeq& y, const LinearCoreSpec& spec,
                                                  const PairProposal& proposal);

/// (1/K) sum_k phi'(h(y*) - h(y_k)) (f(y*) - f(y_k)), y_k uniform over all
/// sequences. Unbiased for the gradient of E_{y_k}[phi(h(y*) - h(y_k))].
SparseVector lc_ksample_gradient_sparse(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y_true,
                                        const LinearCoreSpec& spec, std::size_t K, Rng& rng);
std::vector<double> lc_ksample_gradient_estimate(const ChainModel& model, const FeatureSeq& x,
                                                 const LabelSeq& y_true, const LinearCoreSpec& spec,
                                                 std::size_t K, Rng& rng);
/// Exact gradient of the uniform-expectation loss (enumeration).
std::vector<double> lc_ksample_expectation(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y_true,
                                           const LinearCoreSpec& spec);
/// E_{y_k uniform}[phi(h(y*) - h(y_k))] (enumeration).
double lc_ksample_objective_exact(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y_true,
                                  const LinearCoreSpec& spec);

using GradientEstimator = std::function<std::vector<double>(Rng&)>;

/// Mean squared L2 deviation of `trials` estimates from `reference` (or from
/// their empirical mean when reference is empty). Trial i draws from
/// Rng(seed, 0, i). Requires trials >= 1000.
double empirical_gradient_variance(const GradientEstimator& estimator, std::size_t trials, std::uint64_t seed,
                                   std::span<const double> reference = {});

enum class Objective { Ssvm, Crf, Lincore, LincoreKSample };

std::string to_string(Objective objective);
Objective parse_objective(const std::string& name);

struct TrainConfig {
    double eta = 0.01;
    std::size_t iterations = 20000;
    std::size_t batch = 1;
    std::uint64_t seed = 1;
    Objective objective = Objective::Lincore;
    /// Wide one-sided core: per-pair steps stay bounded while margins grow.
    LinearCoreSpec spec{BaseLoss::logistic(), CoreSide::OneSided, 10.0};
    PairProposal proposal{0.3, InnerProposal::Neighbor, OuterProposal::Similarity};
    std::size_t K = 1;
    std::size_t history_interval = 500;
    /// Monte-Carlo draws per example for the objective when the label
    /// space cannot be enumerated.
    std::size_t objective_samples = 64;
};

void validate(const TrainConfig& config);

struct HistoryRow {
    std::size_t iteration = 0;
    double objective = 0.0;
    double test_error = 0.0;
    double seconds = 0.0;  // cumulative update time, evaluation excluded
};

struct TrainResult {
    ChainModel model;
    std::vector<HistoryRow> history;
};

/// One SGD step on a mini-batch: w -= eta * mean gradient. Example b of the
/// batch draws from Rng(seed, iteration, b).
void sgd_batch_update(ChainModel& model, std::span<const SequenceExample* const> batch, const TrainConfig& config,
                      std::uint64_t iteration);

/// Mean training objective of the configured loss (exact when the label space
/// is enumerable, otherwise a fixed-seed Monte-Carlo estimate).
double training_objective(const ChainModel& model, std::span<const SequenceExample> data,
                          const TrainConfig& config);

/// Objective of one example; `index` keys its Monte-Carlo stream.
double example_training_objective(const ChainModel& model, const SequenceExample& example,
                                  const TrainConfig& config, std::size_t index);

/// True when labels^length <= 4096.
bool enumerable(std::size_t labels, std::size_t length);

/// Mean per-position Hamming error of Viterbi decoding.
double hamming_error(const ChainModel& model, std::span<const SequenceExample> data);

/// SGD from the zero model. Example b at iteration t is index
/// Rng(seed, t, b).below(n). Throws NumericError if the objective exceeds
/// 1e12 or becomes non-finite.
TrainResult sgd_train(std::span<const SequenceExample> train, std::span<const SequenceExample> test,
                      std::size_t num_labels, const TrainConfig& config);

/// Standard deviation of the objective over the last `fraction` of history.
double terminal_objective_std(std::span<const HistoryRow> history, double fraction = 0.1);
/// Same spread divided by the mean objective over that window, so objectives
/// on different scales compare. Zero spread gives 0; zero mean otherwise inf.
double terminal_objective_oscillation(std::span<const HistoryRow> history, double fraction = 0.1);

}  // namespace lincore
