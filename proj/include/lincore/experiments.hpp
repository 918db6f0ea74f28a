#pragma once

// Experiment drivers behind the command-line tool. Every driver is a pure
// function of its config (wall-clock columns aside); configs round-trip
// through flat JSON objects whose keys are fixed by the defaults.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lincore/consistency.hpp"
#include "lincore/data.hpp"
#include "lincore/errors.hpp"
#include "lincore/trainers.hpp"

namespace lincore {

using Json = nlohmann::json;

/// Raised for malformed or unknown configuration keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// defaults with every key of overrides replaced; unknown keys and type
/// changes throw ConfigError.
Json merge_config(const Json& defaults, const Json& overrides);

// ---- rates ---------------------------------------------------------------

struct RatesConfig {
    double delta_lo = 1e-4;
    double delta_hi = 1e-1;
    int points = 25;
    double tau = 1.0;
    std::uint64_t seed = 0;  // unused by the computation; recorded for the manifest
};

struct RatesResult {
    std::vector<RatePoint> points;
    std::vector<std::pair<std::string, double>> slopes;
};

RatesResult run_rates(const RatesConfig& config);
void write_rates(const RatesResult& result, const std::filesystem::path& dir);

// ---- stability -----------------------------------------------------------

struct StabilityConfig {
    std::vector<double> taus{0.1, 0.5, 1.0, 2.0, 5.0};
    double delta_lo = 1e-4;
    double delta_hi = 1e-1;
    std::vector<double> vanishing_taus{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    double vanishing_delta_lo = 1e-3;
    double vanishing_delta_hi = 1e-1;
    int points = 25;
    int bound_grid_points = 200;
    std::string base = "logistic";
    std::uint64_t seed = 0;
};

struct StabilityResult {
    std::vector<TauSweepRow> sweep;
    std::vector<TauSweepRow> vanishing;
};

StabilityResult run_stability(const StabilityConfig& config);
void write_stability(const StabilityResult& result, const std::filesystem::path& dir);

// ---- scaling -------------------------------------------------------------

struct ScalingConfig {
    std::vector<std::size_t> labels{50, 100, 200, 400};
    std::vector<std::string> methods{"ssvm", "crf", "lincore"};
    std::size_t L = 20;
    std::size_t d = 20;
    std::size_t warmup = 20;
    std::size_t batches = 200;
    std::size_t blocks = 5;  // timed batches are split into blocks for the CV check
    std::size_t batch_size = 1;
    std::size_t pool = 32;  // distinct sequences cycled through
    double eta = 0.01;
    double cv_threshold = 0.25;
    std::uint64_t seed = 1;
};

struct ScalingRow {
    std::string method;
    std::size_t Y = 0;
    double seconds_per_batch = 0.0;  // median
    double cv = 0.0;                 // across block means
    bool cv_flag = false;
};

/// Times single SGD batch updates, one worker thread.
std::vector<ScalingRow> run_scaling(const ScalingConfig& config);
void write_scaling(const std::vector<ScalingRow>& rows, const std::filesystem::path& dir);
/// seconds_per_batch(method, y_hi) / seconds_per_batch(method, y_lo).
double scaling_ratio(const std::vector<ScalingRow>& rows, const std::string& method, std::size_t y_lo,
                     std::size_t y_hi);
double scaling_time(const std::vector<ScalingRow>& rows, const std::string& method, std::size_t Y);

// ---- noise ---------------------------------------------------------------

struct NoiseConfig {
    std::size_t n_train = 4000;
    std::size_t n_test = 2000;
    std::size_t d = 10;
    std::size_t n_classes = 4;
    double separation = 3.0;
    std::vector<double> noise_rates{0.2, 0.3, 0.4};
    std::vector<double> q_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t epochs = 20;
    double eta = 0.01;
    double tau = 1.0;
    std::string base = "logistic";
    double hist_noise_rate = 0.4;
    std::size_t hist_bins = 20;
    std::uint64_t seed = 1;
};

struct NoiseRow {
    std::string loss;  // ce, gce, gce_best, lc
    double q = 0.0;    // GCE exponent, 0 when not applicable
    double noise_rate = 0.0;
    double test_accuracy = 0.0;
};

struct HistRow {
    std::string loss;
    std::string group;  // clean or noisy
    double bin_left = 0.0;
    double bin_right = 0.0;
    std::size_t count = 0;
};

struct NoiseResult {
    std::vector<NoiseRow> rows;
    std::vector<HistRow> histogram;
    /// Noisy-group LC per-pair magnitudes equal to 1 within 1e-9.
    double lc_noisy_saturated_fraction = 0.0;
    /// 10-90 percentile width of the noisy-group CE magnitudes 1 - p_y.
    double ce_noisy_spread = 0.0;
    std::vector<double> realized_rates;
};

NoiseResult run_noise(const NoiseConfig& config);
void write_noise(const NoiseResult& result, const std::filesystem::path& dir);
double noise_accuracy(const NoiseResult& result, const std::string& loss, double noise_rate);

/// Linear multi-class model trained by SGD on a chosen loss; exposed for tests.
struct LinearClassifier {
    std::size_t classes = 0;
    std::size_t dim = 0;
    std::vector<double> weights;  // classes x (dim + 1), last column is the bias

    std::vector<double> scores(const double* x) const;
    Label predict(const double* x) const;
};

enum class NoiseLoss { CrossEntropy, Generalized, LinearCore };

LinearClassifier train_linear_classifier(const IdnDataset& data, NoiseLoss loss, double q,
                                         const LinearCoreSpec& spec, std::size_t epochs, double eta,
                                         std::uint64_t seed);
double clean_test_accuracy(const LinearClassifier& model, const IdnDataset& data);

// ---- train-seq -----------------------------------------------------------

struct TrainSeqConfig {
    HmmSpec data;
    TrainConfig train;
};

TrainResult run_train_seq(const TrainSeqConfig& config);
void write_history(const std::vector<HistoryRow>& history, const std::filesystem::path& path);

// ---- JSON ----------------------------------------------------------------

Json to_json(const RatesConfig& c);
Json to_json(const StabilityConfig& c);
Json to_json(const ScalingConfig& c);
Json to_json(const NoiseConfig& c);
Json to_json(const TrainSeqConfig& c);

RatesConfig rates_config_from(const Json& overrides);
StabilityConfig stability_config_from(const Json& overrides);
ScalingConfig scaling_config_from(const Json& overrides);
NoiseConfig noise_config_from(const Json& overrides);
TrainSeqConfig train_seq_config_from(const Json& overrides);

BaseLoss parse_base(const std::string& name);
CoreSide parse_side(const std::string& name);

/// Shortest decimal that round-trips a double; used for every CSV value.
std::string format_double(double v);

}  // namespace lincore
