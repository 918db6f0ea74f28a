#pragma once

// Seeded synthetic data: linear-chain HMM sequences and a multi-class
// Gaussian task with instance-dependent label noise.

#include <cstdint>
#include <vector>

#include "lincore/structured.hpp"

namespace lincore {

struct HmmSpec {
    std::size_t L = 4;
    std::size_t Y = 3;
    std::size_t d = 5;
    std::size_t n = 200;
    std::size_t n_test = 200;
    std::uint64_t seed = 1;
    /// Transition logits are N(0, 1) * temperature; 0 gives i.i.d. uniform labels.
    double transition_temperature = 2.0;
    /// Norm of every emission center; features are center + N(0, I).
    double emission_scale = 4.0;
};

void validate(const HmmSpec& spec);

struct HmmDataset {
    std::vector<SequenceExample> train;
    std::vector<SequenceExample> test;
    std::vector<double> transition;  // Y x Y row-stochastic
    std::vector<double> centers;     // Y x d
};

/// Parameters come from stream 0, training sequences from stream 1 and test
/// sequences from stream 2 of the seed. Centers are orthogonal when Y <= d.
HmmDataset generate_hmm_data(const HmmSpec& spec);

struct IdnSpec {
    std::size_t n_train = 4000;
    std::size_t n_test = 2000;
    std::size_t d = 10;
    std::size_t n_classes = 4;
    double noise_rate = 0.3;
    std::uint64_t seed = 1;
    /// Norm of every class center; features are center + N(0, I).
    double separation = 3.0;
};

void validate(const IdnSpec& spec);

struct IdnDataset {
    std::size_t d = 0;
    std::size_t n_classes = 0;
    std::vector<double> x_train;  // n_train x d
    std::vector<Label> y_noisy;
    std::vector<Label> y_clean;
    std::vector<char> flipped;
    std::vector<double> boundary_distance;  // |v.x - theta|
    std::vector<double> flip_probability;
    std::vector<double> x_test;
    std::vector<Label> y_test;
    std::vector<Label> confusion;  // flip target per class: nearest other center
    double flip_scale = 0.0;
    double realized_rate = 0.0;

    std::size_t n_train() const { return y_clean.size(); }
    std::size_t n_test() const { return y_test.size(); }
};

/// Flip probability p_i = 2 sigmoid(-|v.x_i - theta| / s) for a random unit
/// direction v and threshold theta; s is bisected so the mean of p_i equals
/// the noise rate. Flipped labels go to the confusion neighbor of the class.
IdnDataset generate_idn_dataset(const IdnSpec& spec);

}  // namespace lincore
