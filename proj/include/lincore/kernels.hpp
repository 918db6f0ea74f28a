#pragma once

// OpenMP batch kernels with serial references.
//
// Each kernel evaluates independent items into a per-index buffer and then
// reduces serially in index order, so the parallel and serial paths return
// bitwise-identical results.

#include <cstddef>
#include <span>
#include <vector>

#include "lincore/consistency.hpp"
#include "lincore/multiclass.hpp"
#include "lincore/structured.hpp"
#include "lincore/trainers.hpp"

namespace lincore {

enum class Exec { Serial, Parallel };

/// out[i] = fn(i) for i < n.
template <typename Fn>
auto map_indices(std::size_t n, Fn&& fn, Exec exec) -> std::vector<decltype(fn(std::size_t{}))> {
    std::vector<decltype(fn(std::size_t{}))> out(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
        }
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
        }
    }
    return out;
}

/// Mean per-position Hamming error of Viterbi decoding over a batch.
double batch_hamming_error(const ChainModel& model, std::span<const SequenceExample> data, Exec exec);

/// Mean training objective over a batch (see training_objective).
double batch_objective(const ChainModel& model, std::span<const SequenceExample> data, const TrainConfig& config,
                       Exec exec);

/// T(t) on a grid of t values.
std::vector<double> transformation_grid(const MarginLoss& loss, std::span<const double> ts, Exec exec);

struct RegretDraw {
    std::vector<double> p;
    std::vector<double> scores;
    std::vector<double> loss;  // n x n, empty for the multi-class 0-1 case
};

/// Conditional regrets for every draw; draws with a loss matrix use the
/// structured oracle, the rest the multi-class one.
std::vector<ConditionalRegrets> regret_sweep(const LinearCoreSpec& spec, std::span<const RegretDraw> draws,
                                             Exec exec);

/// Seeded random regret draws: p from a normalized Exp(1) vector, scores
/// N(0, score_scale^2), and when structured a random [0,1] loss matrix with
/// zero diagonal. Draw i uses Rng(seed, n, i).
std::vector<RegretDraw> random_regret_draws(std::size_t count, std::size_t n, bool structured, double score_scale,
                                            std::uint64_t seed);

}  // namespace lincore
