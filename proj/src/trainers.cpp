#include "lincore/trainers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "lincore/errors.hpp"
#include "lincore/inference.hpp"
#include "lincore/kernels.hpp"

namespace lincore {

void validate(const PairProposal& proposal) {
    if (!(proposal.corruption_rate > 0.0 && proposal.corruption_rate < 1.0)) {
        std::ostringstream os;
        os << "corruption rate must lie in (0, 1), got " << proposal.corruption_rate;
        throw DomainError(os.str());
    }
}

bool enumerable(std::size_t labels, std::size_t length) {
    std::size_t n = 1;
    for (std::size_t j = 0; j < length; ++j) {
        n *= labels;
        if (n > 4096) return false;
    }
    return true;
}

namespace {

std::size_t mismatches(const LabelSeq& a, const LabelSeq& b) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < a.size(); ++j) c += a[j] != b[j] ? 1 : 0;
    return c;
}

double similarity(const LabelSeq& a, const LabelSeq& b) {
    return 1.0 - static_cast<double>(mismatches(a, b)) / static_cast<double>(a.size());
}

double log_outer_probability(const PairProposal& proposal, std::size_t labels, const LabelSeq& y_outer,
                             const LabelSeq& y) {
    const double L = static_cast<double>(y.size());
    if (proposal.outer == OuterProposal::Similarity) {
        const double s = similarity(y_outer, y);
        return s > 0.0 ? std::log(s) - (L - 1.0) * std::log(static_cast<double>(labels)) : -INFINITY;
    }
    const double rho = proposal.corruption_rate;
    const double keep = std::log1p(-rho);
    const double move = std::log(rho / static_cast<double>(labels - 1));
    const double k = static_cast<double>(mismatches(y_outer, y));
    return (L - k) * keep + k * move;
}

Label other_label(std::size_t labels, Label avoid, Rng& rng) {
    const Label r = rng.below(labels - 1);
    return r >= avoid ? r + 1 : r;
}

void check_example(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y) {
    if (x.length() == 0 || y.size() != x.length()) {
        throw DomainError("example must be non-empty with matching label length");
    }
    if (x.dim() != model.dim()) {
        throw DomainError("feature dimension does not match model");
    }
    for (Label k : y) {
        if (k >= model.num_labels()) throw DomainError("label out of range");
    }
}

SparseVector feature_difference(const ChainModel& model, const FeatureSeq& x, const LabelSeq& a,
                                const LabelSeq& b) {
    SparseVector d = joint_feature_sparse(model, x, a);
    for (const auto& [i, v] : joint_feature_sparse(model, x, b).entries) d.add(i, -v);
    return d;
}

// Fills weights, derivative and the raw gradient for a fixed (y', y'').
// With normalized set the gradient is scaled by w1 w2 / Z instead of w1 w2.
void fill_pair(GradEstimate& est, const ChainModel& model, const FeatureSeq& x, const LabelSeq& y,
               const LinearCoreSpec& spec, const PairProposal& proposal, bool normalized = false) {
    const std::size_t Y = model.num_labels();
    const double sim = similarity(est.y_outer, y);
    const double log_d1 = log_outer_probability(proposal, Y, est.y_outer, y);
    const double d2 = inner_probability(proposal, Y, est.y_outer, est.y_inner);
    if (!(d2 > 0.0) || !std::isfinite(d2)) {
        throw NumericError("pair estimator: inner proposal probability is zero or non-finite");
    }
    est.w2 = 1.0 / d2;
    const double m = sequence_score(model, x, est.y_outer) - sequence_score(model, x, est.y_inner);
    est.derivative = lc_derivative(spec, m);
    est.gradient.entries.clear();
    if (sim == 0.0) {
        est.w1 = 0.0;
        est.normalized_weight = 0.0;
        return;
    }
    const double d1 = std::exp(log_d1);
    if (!(d1 > 0.0) || !std::isfinite(d1)) {
        throw NumericError("pair estimator: outer proposal probability underflowed or is zero");
    }
    est.w1 = sim / d1;
    est.normalized_weight =
        std::exp(std::log(sim) - log_d1 - (static_cast<double>(y.size()) - 1.0) * std::log(static_cast<double>(Y)));
    est.gradient = feature_difference(model, x, est.y_outer, est.y_inner);
    const double coef = (normalized ? est.normalized_weight : est.w1 * est.w2) * est.derivative;
    for (auto& e : est.gradient.entries) e.second *= coef;
}

}  // namespace

double outer_probability(const PairProposal& proposal, std::size_t labels, const LabelSeq& y_outer,
                         const LabelSeq& y) {
    validate(proposal);
    if (y_outer.size() != y.size()) throw DomainError("sequence lengths differ");
    return std::exp(log_outer_probability(proposal, labels, y_outer, y));
}

double inner_support_size(const PairProposal& proposal, std::size_t labels, std::size_t length) {
    if (proposal.inner == InnerProposal::Neighbor) {
        return static_cast<double>(length) * static_cast<double>(labels - 1);
    }
    return std::pow(static_cast<double>(labels), static_cast<double>(length)) - 1.0;
}

double inner_probability(const PairProposal& proposal, std::size_t labels, const LabelSeq& y_outer,
                         const LabelSeq& y_inner) {
    if (y_outer.size() != y_inner.size()) throw DomainError("sequence lengths differ");
    const std::size_t k = mismatches(y_outer, y_inner);
    if (k == 0) return 0.0;
    if (proposal.inner == InnerProposal::Neighbor && k != 1) return 0.0;
    return 1.0 / inner_support_size(proposal, labels, y_outer.size());
}

LabelSeq sample_outer(const PairProposal& proposal, std::size_t labels, const LabelSeq& y, Rng& rng) {
    LabelSeq out(y.size());
    if (proposal.outer == OuterProposal::Similarity) {
        const std::size_t keep = rng.below(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) {
            out[j] = j == keep ? y[j] : rng.below(labels);
        }
        return out;
    }
    for (std::size_t j = 0; j < y.size(); ++j) {
        out[j] = rng.bernoulli(proposal.corruption_rate) ? other_label(labels, y[j], rng) : y[j];
    }
    return out;
}

LabelSeq sample_inner(const PairProposal& proposal, std::size_t labels, const LabelSeq& y_outer, Rng& rng) {
    LabelSeq out = y_outer;
    if (proposal.inner == InnerProposal::Neighbor) {
        const std::size_t j = rng.below(y_outer.size());
        out[j] = other_label(labels, y_outer[j], rng);
        return out;
    }
    do {
        for (auto& k : out) k = rng.below(labels);
    } while (out == y_outer);
    return out;
}

GradEstimate lc_pair_gradient_estimate(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y,
                                       const LinearCoreSpec& spec, const PairProposal& proposal, Rng& rng) {
    validate(proposal);
    check_example(model, x, y);
    GradEstimate est;
    est.y_outer = sample_outer(proposal, model.num_labels(), y, rng);
    est.y_inner = sample_inner(proposal, model.num_labels(), est.y_outer, rng);
    fill_pair(est, model, x, y, spec, proposal);
    return est;
}

std::vector<double> lc_pair_estimator_expectation(const ChainModel& model, const FeatureSeq& x,
                                                  const LabelSeq& y, const LinearCoreSpec& spec,
                                                  const PairProposal& proposal) {
    validate(proposal);
    check_example(model, x, y);
    const std::size_t Y = model.num_labels();
    const auto seqs = enumerate_sequences(Y, x.length());
    // Neumaier-compensated accumulation: thousands of mixed-sign terms
    std::vector<double> sum(model.num_weights(), 0.0), comp(model.num_weights(), 0.0);
    GradEstimate est;
    for (const LabelSeq& a : seqs) {
        const double d1 = outer_probability(proposal, Y, a, y);
        if (d1 == 0.0) continue;
        for (const LabelSeq& b : seqs) {
            const double d2 = inner_probability(proposal, Y, a, b);
            if (d2 == 0.0) continue;
            est.y_outer = a;
            est.y_inner = b;
            fill_pair(est, model, x, y, spec, proposal);
            for (const auto& [i, v] : est.gradient.entries) {
                const double term = d1 * d2 * v;
                const double t = sum[i] + term;
                comp[i] += std::abs(sum[i]) >= std::abs(term) ? (sum[i] - t) + term : (term - t) + sum[i];
                sum[i] = t;
            }
        }
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += comp[i];
    return sum;
}

SparseVector lc_ksample_gradient_sparse(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y_true,
                                        const LinearCoreSpec& spec, std::size_t K, Rng& rng) {
    if (K < 1) throw DomainError("K must be at least 1");
    check_example(model, x, y_true);
    const double h_true = sequence_score(model, x, y_true);
    const SparseVector f_true = joint_feature_sparse(model, x, y_true);
    SparseVector g;
    LabelSeq yk(y_true.size());
    const double inv_k = 1.0 / static_cast<double>(K);
    for (std::size_t k = 0; k < K; ++k) {
        for (auto& v : yk) v = rng.below(model.num_labels());
        if (yk == y_true) continue;
        const double c = inv_k * lc_derivative(spec, h_true - sequence_score(model, x, yk));
        for (const auto& [i, v] : f_true.entries) g.add(i, c * v);
        for (const auto& [i, v] : joint_feature_sparse(model, x, yk).entries) g.add(i, -c * v);
    }
    return g;
}

std::vector<double> lc_ksample_gradient_estimate(const ChainModel& model, const FeatureSeq& x,
                                                 const LabelSeq& y_true, const LinearCoreSpec& spec,
                                                 std::size_t K, Rng& rng) {
    return lc_ksample_gradient_sparse(model, x, y_true, spec, K, rng).to_dense(model.num_weights());
}

std::vector<double> lc_ksample_expectation(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y_true,
                                           const LinearCoreSpec& spec) {
    check_example(model, x, y_true);
    const auto seqs = enumerate_sequences(model.num_labels(), x.length());
    const double h_true = sequence_score(model, x, y_true);
    const SparseVector f_true = joint_feature_sparse(model, x, y_true);
    const double p = 1.0 / static_cast<double>(seqs.size());
    std::vector<double> g(model.num_weights(), 0.0);
    for (const LabelSeq& yk : seqs) {
        if (yk == y_true) continue;
        const double c = p * lc_derivative(spec, h_true - sequence_score(model, x, yk));
        f_true.axpy_into(c, g);
        joint_feature_sparse(model, x, yk).axpy_into(-c, g);
    }
    return g;
}

double lc_ksample_objective_exact(const ChainModel& model, const FeatureSeq& x, const LabelSeq& y_true,
                                  const LinearCoreSpec& spec) {
    check_example(model, x, y_true);
    const auto seqs = enumerate_sequences(model.num_labels(), x.length());
    const double h_true = sequence_score(model, x, y_true);
    std::vector<double> v(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        v[i] = lc_value(spec, h_true - sequence_score(model, x, seqs[i]));
    }
    return pairwise_sum(v) / static_cast<double>(seqs.size());
}

double empirical_gradient_variance(const GradientEstimator& estimator, std::size_t trials, std::uint64_t seed,
                                   std::span<const double> reference) {
    if (trials < 1000) {
        throw DomainError("empirical_gradient_variance: need at least 1000 trials");
    }
    std::vector<std::vector<double>> draws;
    draws.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(seed, 0, t);
        draws.push_back(estimator(rng));
    }
    const std::size_t n = draws.front().size();
    std::vector<double> center(reference.begin(), reference.end());
    if (center.empty()) {
        center.assign(n, 0.0);
        for (const auto& g : draws) {
            for (std::size_t i = 0; i < n; ++i) center[i] += g[i];
        }
        for (double& c : center) c /= static_cast<double>(trials);
    }
    if (center.size() != n) {
        throw DomainError("empirical_gradient_variance: reference has the wrong size");
    }
    std::vector<double> sq(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = draws[t][i] - center[i];
            s += d * d;
        }
        sq[t] = s;
    }
    return pairwise_sum(sq) / static_cast<double>(trials);
}

std::string to_string(Objective objective) {
    switch (objective) {
        case Objective::Ssvm: return "ssvm";
        case Objective::Crf: return "crf";
        case Objective::Lincore: return "lincore";
        case Objective::LincoreKSample: return "lincore_ksample";
    }
    return "unknown";
}

Objective parse_objective(const std::string& name) {
    if (name == "ssvm") return Objective::Ssvm;
    if (name == "crf") return Objective::Crf;
    if (name == "lincore") return Objective::Lincore;
    if (name == "lincore_ksample") return Objective::LincoreKSample;
    throw DomainError("unknown objective '" + name + "' (expected ssvm, crf, lincore, lincore_ksample)");
}

void validate(const TrainConfig& config) {
    if (!(config.eta >= 0.0) || !std::isfinite(config.eta)) {
        throw DomainError("step size must be finite and non-negative");
    }
    if (config.batch < 1) throw DomainError("batch size must be at least 1");
    if (config.K < 1) throw DomainError("K must be at least 1");
    if (config.history_interval < 1) throw DomainError("history interval must be at least 1");
    if (config.objective_samples < 1) throw DomainError("objective_samples must be at least 1");
    validate(config.proposal);
}

void sgd_batch_update(ChainModel& model, std::span<const SequenceExample* const> batch, const TrainConfig& config,
                      std::uint64_t iteration) {
    const double step = config.eta / static_cast<double>(batch.size());
    auto w = model.weights();
    if (config.objective == Objective::Crf) {
        std::vector<double> g(model.num_weights(), 0.0);
        for (const SequenceExample* ex : batch) {
            const auto r = crf_nll_and_gradient(model, ex->x, ex->y);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += r.gradient[i];
        }
        for (std::size_t i = 0; i < g.size(); ++i) w[i] -= step * g[i];
        return;
    }
    // Sparse objectives: every gradient is taken at the pre-step weights.
    SparseVector g;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const SequenceExample& ex = *batch[b];
        Rng rng(config.seed, iteration, b);
        switch (config.objective) {
            case Objective::Ssvm: {
                const auto r = ssvm_loss_and_sparse_subgradient(model, ex.x, ex.y);
                g.entries.insert(g.entries.end(), r.gradient.entries.begin(), r.gradient.entries.end());
                break;
            }
            case Objective::Lincore: {
                GradEstimate est;
                est.y_outer = sample_outer(config.proposal, model.num_labels(), ex.y, rng);
                est.y_inner = sample_inner(config.proposal, model.num_labels(), est.y_outer, rng);
                fill_pair(est, model, ex.x, ex.y, config.spec, config.proposal, true);
                g.entries.insert(g.entries.end(), est.gradient.entries.begin(), est.gradient.entries.end());
                break;
            }
            case Objective::LincoreKSample: {
                const SparseVector s = lc_ksample_gradient_sparse(model, ex.x, ex.y, config.spec, config.K, rng);
                g.entries.insert(g.entries.end(), s.entries.begin(), s.entries.end());
                break;
            }
            case Objective::Crf:
                break;
        }
    }
    g.axpy_into(-step, w);
}

namespace {

constexpr std::uint64_t kObjectiveStream = 0x6f626a6563746976ULL;

}  // namespace

double example_training_objective(const ChainModel& model, const SequenceExample& ex, const TrainConfig& config,
                         std::size_t index) {
    const std::size_t Y = model.num_labels();
    const std::size_t L = ex.x.length();
    switch (config.objective) {
        case Objective::Ssvm:
            return ssvm_loss_and_sparse_subgradient(model, ex.x, ex.y).loss;
        case Objective::Crf:
            return log_partition(model, ex.x) - sequence_score(model, ex.x, ex.y);
        case Objective::Lincore: {
            if (enumerable(Y, L)) {
                const InnerSupport support = config.proposal.inner == InnerProposal::Neighbor
                                                 ? InnerSupport::Neighbors
                                                 : InnerSupport::Full;
                const double z = std::pow(static_cast<double>(Y), static_cast<double>(L - 1)) *
                                 inner_support_size(config.proposal, Y, L);
                return structured_sum_loss_exact(config.spec, model, ex.x, ex.y, support) / z;
            }
            std::vector<double> v(config.objective_samples);
            for (std::size_t s = 0; s < v.size(); ++s) {
                Rng rng(config.seed ^ kObjectiveStream, index, s);
                GradEstimate est;
                est.y_outer = sample_outer(config.proposal, Y, ex.y, rng);
                est.y_inner = sample_inner(config.proposal, Y, est.y_outer, rng);
                const double sim = similarity(est.y_outer, ex.y);
                if (sim == 0.0) {
                    v[s] = 0.0;
                    continue;
                }
                const double w = std::exp(std::log(sim) - log_outer_probability(config.proposal, Y, est.y_outer, ex.y) -
                                          static_cast<double>(L - 1) * std::log(static_cast<double>(Y)));
                v[s] = w * lc_value(config.spec, sequence_score(model, ex.x, est.y_outer) -
                                                     sequence_score(model, ex.x, est.y_inner));
            }
            return pairwise_sum(v) / static_cast<double>(v.size());
        }
        case Objective::LincoreKSample: {
            if (enumerable(Y, L)) {
                return lc_ksample_objective_exact(model, ex.x, ex.y, config.spec);
            }
            const double h = sequence_score(model, ex.x, ex.y);
            std::vector<double> v(config.objective_samples);
            LabelSeq yk(L);
            for (std::size_t s = 0; s < v.size(); ++s) {
                Rng rng(config.seed ^ kObjectiveStream, index, s);
                for (auto& k : yk) k = rng.below(Y);
                v[s] = lc_value(config.spec, h - sequence_score(model, ex.x, yk));
            }
            return pairwise_sum(v) / static_cast<double>(v.size());
        }
    }
    return 0.0;
}

double training_objective(const ChainModel& model, std::span<const SequenceExample> data,
                          const TrainConfig& config) {
    if (data.empty()) throw DomainError("training_objective: empty data");
    std::vector<double> v(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        v[i] = example_training_objective(model, data[i], config, i);
    }
    return pairwise_sum(v) / static_cast<double>(data.size());
}

double hamming_error(const ChainModel& model, std::span<const SequenceExample> data) {
    if (data.empty()) throw DomainError("hamming_error: empty data");
    std::vector<double> v(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        v[i] = hamming_loss(viterbi(model, data[i].x).labels, data[i].y);
    }
    return pairwise_sum(v) / static_cast<double>(data.size());
}

TrainResult sgd_train(std::span<const SequenceExample> train, std::span<const SequenceExample> test,
                      std::size_t num_labels, const TrainConfig& config) {
    validate(config);
    if (train.empty()) throw DomainError("sgd_train: empty training set");
    for (const auto& ex : train) check_example(ChainModel(num_labels, train.front().x.dim()), ex.x, ex.y);

    TrainResult result{ChainModel(num_labels, train.front().x.dim()), {}};
    ChainModel& model = result.model;
    const auto eval_set = test.empty() ? train : test;
    double seconds = 0.0;

    auto record = [&](std::size_t t) {
        HistoryRow row;
        row.iteration = t;
        row.objective = batch_objective(model, train, config, Exec::Parallel);
        row.test_error = batch_hamming_error(model, eval_set, Exec::Parallel);
        row.seconds = seconds;
        if (!std::isfinite(row.objective) || row.objective > 1e12) {
            std::ostringstream os;
            os << "training diverged at iteration " << t << ": objective " << row.objective << " (objective "
               << to_string(config.objective) << ", eta " << config.eta << ")";
            throw NumericError(os.str());
        }
        result.history.push_back(row);
    };

    record(0);
    std::vector<const SequenceExample*> batch(config.batch);
    for (std::size_t t = 1; t <= config.iterations; ++t) {
        const auto start = std::chrono::steady_clock::now();
        for (std::size_t b = 0; b < config.batch; ++b) {
            Rng pick(config.seed, t, b);
            batch[b] = &train[pick.below(train.size())];
        }
        // The pick stream and the estimator stream share (t, b); offset the
        // estimator's iteration key so their draws are independent.
        sgd_batch_update(model, batch, config, t + (std::uint64_t{1} << 40));
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (t % config.history_interval == 0 || t == config.iterations) {
            record(t);
        }
    }
    return result;
}

namespace {

std::pair<double, double> terminal_mean_std(std::span<const HistoryRow> history, double fraction) {
    if (history.size() < 2) throw DomainError("terminal objective: need at least two history rows");
    std::size_t n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(history.size())));
    n = std::clamp<std::size_t>(n, 2, history.size());
    const auto tail = history.subspan(history.size() - n);
    double mean = 0.0;
    for (const auto& r : tail) mean += r.objective;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& r : tail) var += (r.objective - mean) * (r.objective - mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

double terminal_objective_std(std::span<const HistoryRow> history, double fraction) {
    return terminal_mean_std(history, fraction).second;
}

double terminal_objective_oscillation(std::span<const HistoryRow> history, double fraction) {
    const auto [mean, sd] = terminal_mean_std(history, fraction);
    if (sd == 0.0) return 0.0;
    if (mean == 0.0) return INFINITY;
    return sd / std::abs(mean);
}

}  // namespace lincore
