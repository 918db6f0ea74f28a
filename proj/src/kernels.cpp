#include "lincore/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "lincore/inference.hpp"
#include "lincore/rng.hpp"

namespace lincore {

double batch_hamming_error(const ChainModel& model, std::span<const SequenceExample> data, Exec exec) {
    const auto v = map_indices(
        data.size(), [&](std::size_t i) { return hamming_loss(viterbi(model, data[i].x).labels, data[i].y); },
        exec);
    return pairwise_sum(v) / static_cast<double>(data.size());
}

double batch_objective(const ChainModel& model, std::span<const SequenceExample> data, const TrainConfig& config,
                       Exec exec) {
    // training_objective on one example reproduces the per-example value
    // (Monte-Carlo streams are keyed by example index, so pass the offset).
    const auto v = map_indices(
        data.size(), [&](std::size_t i) { return example_training_objective(model, data[i], config, i); }, exec);
    return pairwise_sum(v) / static_cast<double>(data.size());
}

std::vector<double> transformation_grid(const MarginLoss& loss, std::span<const double> ts, Exec exec) {
    return map_indices(ts.size(), [&](std::size_t i) { return transformation_T(loss, ts[i]); }, exec);
}

std::vector<ConditionalRegrets> regret_sweep(const LinearCoreSpec& spec, std::span<const RegretDraw> draws,
                                             Exec exec) {
    return map_indices(
        draws.size(),
        [&](std::size_t i) {
            const RegretDraw& d = draws[i];
            const CategoricalDistribution p(d.p);
            const ScoreTable s(d.scores);
            if (d.loss.empty()) {
                return mc_conditional_regrets(spec, p, s);
            }
            return structured_conditional_regrets(spec, p, s, LossMatrix(d.p.size(), d.loss));
        },
        exec);
}

std::vector<RegretDraw> random_regret_draws(std::size_t count, std::size_t n, bool structured, double score_scale,
                                            std::uint64_t seed) {
    std::vector<RegretDraw> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, n, i);
        RegretDraw& d = out[i];
        d.p.resize(n);
        double total = 0.0;
        for (auto& v : d.p) {
            double u;
            do {
                u = rng.uniform();
            } while (u <= 0.0);
            v = -std::log(u);
            total += v;
        }
        for (auto& v : d.p) v /= total;
        // renormalize so the sum is within rounding of 1
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) s += d.p[k];
        d.p[n - 1] = std::max(0.0, 1.0 - s);
        d.scores.resize(n);
        for (auto& v : d.scores) v = score_scale * rng.normal();
        if (structured) {
            d.loss.assign(n * n, 0.0);
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) {
                    if (a != b) d.loss[a * n + b] = rng.uniform();
                }
            }
        }
    }
    return out;
}

}  // namespace lincore
