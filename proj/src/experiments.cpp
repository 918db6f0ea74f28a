#include "lincore/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "lincore/kernels.hpp"
#include "lincore/rng.hpp"

namespace lincore {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

class CsvFile {
public:
    CsvFile(const fs::path& path, const std::string& header) : path_(path), out_(path) {
        if (!out_) {
            throw Error("cannot open " + path.string() + " for writing");
        }
        out_ << header << '\n';
    }

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(fields), first = false), ...);
        out_ << '\n';
        if (!out_) {
            throw Error("write failed: " + path_.string());
        }
    }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }

    fs::path path_;
    std::ofstream out_;
};

void check_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(what) + " must be positive and finite");
    }
}

void check_delta_range(double lo, double hi, int points, const char* what) {
    check_positive(lo, what);
    if (!(hi > lo) || !(hi < 0.5)) {
        throw ConfigError(std::string(what) + ": need 0 < lo < hi < 1/2");
    }
    if (points < 5) {
        throw ConfigError(std::string(what) + ": need at least 5 points");
    }
}

}  // namespace

BaseLoss parse_base(const std::string& name) {
    if (name == "logistic") return BaseLoss::logistic();
    if (name == "exponential") return BaseLoss::exponential();
    if (name == "quartic") return BaseLoss::quartic_linear();
    throw ConfigError("unknown base loss '" + name + "' (logistic, exponential, quartic)");
}

CoreSide parse_side(const std::string& name) {
    if (name == "symmetric") return CoreSide::Symmetric;
    if (name == "onesided") return CoreSide::OneSided;
    throw ConfigError("unknown core side '" + name + "' (symmetric, onesided)");
}

namespace {

std::string side_name(CoreSide s) { return s == CoreSide::OneSided ? "onesided" : "symmetric"; }

std::string inner_name(InnerProposal p) { return p == InnerProposal::Neighbor ? "neighbor" : "uniform_full"; }

InnerProposal parse_inner(const std::string& s) {
    if (s == "neighbor") return InnerProposal::Neighbor;
    if (s == "uniform_full") return InnerProposal::UniformFull;
    throw ConfigError("unknown inner proposal '" + s + "' (neighbor, uniform_full)");
}

std::string outer_name(OuterProposal p) { return p == OuterProposal::Corruption ? "corruption" : "similarity"; }

OuterProposal parse_outer(const std::string& s) {
    if (s == "corruption") return OuterProposal::Corruption;
    if (s == "similarity") return OuterProposal::Similarity;
    throw ConfigError("unknown outer proposal '" + s + "' (corruption, similarity)");
}

bool same_kind(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) {
        // integers stay integers; a float default accepts any number
        return a.is_number_float() || !b.is_number_float();
    }
    if (a.is_array() && b.is_array()) {
        if (a.empty() || b.empty()) return true;
        for (const Json& e : b) {
            if (!same_kind(a.front(), e)) return false;
        }
        return true;
    }
    return a.type() == b.type();
}

template <class T>
T get(const Json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

Json merge_config(const Json& defaults, const Json& overrides) {
    if (!overrides.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    Json merged = defaults;
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (!defaults.contains(it.key())) {
            throw ConfigError("unknown config key '" + it.key() + "'");
        }
        if (!same_kind(defaults[it.key()], it.value())) {
            throw ConfigError("config key '" + it.key() + "' has the wrong type");
        }
        if (it.value().is_number_integer() && defaults[it.key()].is_number_unsigned() &&
            it.value().get<long long>() < 0) {
            throw ConfigError("config key '" + it.key() + "' must be non-negative");
        }
        merged[it.key()] = it.value();
    }
    return merged;
}

// ---- rates ---------------------------------------------------------------

Json to_json(const RatesConfig& c) {
    return {{"delta_lo", c.delta_lo}, {"delta_hi", c.delta_hi}, {"points", c.points},
            {"tau", c.tau},           {"seed", c.seed}};
}

RatesConfig rates_config_from(const Json& overrides) {
    const Json j = merge_config(to_json(RatesConfig{}), overrides);
    RatesConfig c;
    c.delta_lo = get<double>(j, "delta_lo");
    c.delta_hi = get<double>(j, "delta_hi");
    c.points = get<int>(j, "points");
    c.tau = get<double>(j, "tau");
    c.seed = get<std::uint64_t>(j, "seed");
    return c;
}

RatesResult run_rates(const RatesConfig& config) {
    check_delta_range(config.delta_lo, config.delta_hi, config.points, "rates");
    check_positive(config.tau, "rates tau");
    const std::vector<double> deltas = logspace(config.delta_lo, config.delta_hi, config.points);
    const std::vector<std::pair<std::string, MarginLoss>> losses{
        {"lc_logistic", MarginLoss::linear_core(LinearCoreSpec(BaseLoss::logistic(), CoreSide::Symmetric, config.tau))},
        {"lc_exponential",
         MarginLoss::linear_core(LinearCoreSpec(BaseLoss::exponential(), CoreSide::Symmetric, config.tau))},
        {"logistic", MarginLoss::plain(BaseLoss::logistic())},
        {"exponential", MarginLoss::plain(BaseLoss::exponential())},
    };
    RatesResult result;
    for (const auto& [name, loss] : losses) {
        std::vector<RatePoint> curve = biased_coin_curve(loss, deltas);
        result.slopes.emplace_back(name, fit_loglog_slope(curve));
        for (RatePoint& p : curve) {
            p.loss_name = name;
            result.points.push_back(std::move(p));
        }
    }
    return result;
}

void write_rates(const RatesResult& result, const fs::path& dir) {
    CsvFile csv(dir / "rates.csv", "loss,delta,excess_surrogate,excess_target");
    for (const RatePoint& p : result.points) {
        csv.row(p.loss_name, p.delta, p.excess_surrogate, p.excess_target);
    }
    Json slopes = Json::object();
    for (const auto& [name, slope] : result.slopes) {
        slopes[name] = slope;
    }
    std::ofstream out(dir / "slopes.json");
    out << slopes.dump(2) << '\n';
    if (!out) {
        throw Error("write failed: slopes.json");
    }
}

// ---- stability -----------------------------------------------------------

Json to_json(const StabilityConfig& c) {
    return {{"taus", c.taus},
            {"delta_lo", c.delta_lo},
            {"delta_hi", c.delta_hi},
            {"vanishing_taus", c.vanishing_taus},
            {"vanishing_delta_lo", c.vanishing_delta_lo},
            {"vanishing_delta_hi", c.vanishing_delta_hi},
            {"points", c.points},
            {"bound_grid_points", c.bound_grid_points},
            {"base", c.base},
            {"seed", c.seed}};
}

StabilityConfig stability_config_from(const Json& overrides) {
    const Json j = merge_config(to_json(StabilityConfig{}), overrides);
    StabilityConfig c;
    c.taus = get<std::vector<double>>(j, "taus");
    c.delta_lo = get<double>(j, "delta_lo");
    c.delta_hi = get<double>(j, "delta_hi");
    c.vanishing_taus = get<std::vector<double>>(j, "vanishing_taus");
    c.vanishing_delta_lo = get<double>(j, "vanishing_delta_lo");
    c.vanishing_delta_hi = get<double>(j, "vanishing_delta_hi");
    c.points = get<int>(j, "points");
    c.bound_grid_points = get<int>(j, "bound_grid_points");
    c.base = get<std::string>(j, "base");
    c.seed = get<std::uint64_t>(j, "seed");
    return c;
}

StabilityResult run_stability(const StabilityConfig& config) {
    check_delta_range(config.delta_lo, config.delta_hi, config.points, "stability");
    check_delta_range(config.vanishing_delta_lo, config.vanishing_delta_hi, config.points, "stability vanishing");
    for (double t : config.taus) check_positive(t, "stability tau");
    for (double t : config.vanishing_taus) check_positive(t, "stability vanishing tau");
    if (config.bound_grid_points < 2) {
        throw ConfigError("bound_grid_points must be at least 2");
    }
    const BaseLoss base = parse_base(config.base);
    StabilityResult r;
    const std::vector<double> deltas = logspace(config.delta_lo, config.delta_hi, config.points);
    r.sweep = tau_sweep(base, config.taus, deltas, config.bound_grid_points);
    const std::vector<double> vdeltas = logspace(config.vanishing_delta_lo, config.vanishing_delta_hi, config.points);
    r.vanishing = tau_sweep(base, config.vanishing_taus, vdeltas, config.bound_grid_points);
    return r;
}

void write_stability(const StabilityResult& result, const fs::path& dir) {
    CsvFile csv(dir / "stability.csv", "tau,slope");
    for (const TauSweepRow& row : result.sweep) {
        csv.row(row.tau, row.slope);
    }
    // taus shared with the main sweep are reported once, from the main sweep
    for (const TauSweepRow& row : result.vanishing) {
        const bool seen = std::any_of(result.sweep.begin(), result.sweep.end(),
                                      [&](const TauSweepRow& s) { return s.tau == row.tau; });
        if (!seen) {
            csv.row(row.tau, row.slope);
        }
    }
}

// ---- scaling -------------------------------------------------------------

Json to_json(const ScalingConfig& c) {
    return {{"labels", c.labels},   {"methods", c.methods},       {"L", c.L},
            {"d", c.d},             {"warmup", c.warmup},         {"batches", c.batches},
            {"blocks", c.blocks},   {"batch_size", c.batch_size}, {"pool", c.pool},
            {"eta", c.eta},         {"cv_threshold", c.cv_threshold}, {"seed", c.seed}};
}

ScalingConfig scaling_config_from(const Json& overrides) {
    const Json j = merge_config(to_json(ScalingConfig{}), overrides);
    ScalingConfig c;
    c.labels = get<std::vector<std::size_t>>(j, "labels");
    c.methods = get<std::vector<std::string>>(j, "methods");
    c.L = get<std::size_t>(j, "L");
    c.d = get<std::size_t>(j, "d");
    c.warmup = get<std::size_t>(j, "warmup");
    c.batches = get<std::size_t>(j, "batches");
    c.blocks = get<std::size_t>(j, "blocks");
    c.batch_size = get<std::size_t>(j, "batch_size");
    c.pool = get<std::size_t>(j, "pool");
    c.eta = get<double>(j, "eta");
    c.cv_threshold = get<double>(j, "cv_threshold");
    c.seed = get<std::uint64_t>(j, "seed");
    return c;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

class SingleThread {
public:
    SingleThread() : saved_(omp_get_max_threads()) { omp_set_num_threads(1); }
    ~SingleThread() { omp_set_num_threads(saved_); }
    SingleThread(const SingleThread&) = delete;
    SingleThread& operator=(const SingleThread&) = delete;

private:
    int saved_;
};

}  // namespace

std::vector<ScalingRow> run_scaling(const ScalingConfig& config) {
    if (config.labels.empty() || config.methods.empty()) {
        throw ConfigError("scaling: labels and methods must be non-empty");
    }
    if (config.batches < 1 || config.blocks < 1 || config.blocks > config.batches || config.batch_size < 1 ||
        config.pool < 1) {
        throw ConfigError("scaling: need batches >= blocks >= 1, batch_size >= 1, pool >= 1");
    }
    check_positive(config.eta, "scaling eta");
    std::vector<Objective> objectives;
    for (const std::string& m : config.methods) {
        objectives.push_back(parse_objective(m));
    }

    SingleThread single;
    using Clock = std::chrono::steady_clock;
    std::vector<ScalingRow> rows;
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        for (std::size_t Y : config.labels) {
            HmmSpec hs;
            hs.L = config.L;
            hs.Y = Y;
            hs.d = config.d;
            hs.n = config.pool;
            hs.n_test = 1;
            hs.seed = config.seed;
            const HmmDataset data = generate_hmm_data(hs);

            ChainModel model(Y, config.d);
            Rng init(config.seed, 0x5ca1e, Y);
            for (double& w : model.weights()) {
                w = 0.01 * init.normal();
            }
            TrainConfig tc;
            tc.eta = config.eta;
            tc.batch = config.batch_size;
            tc.seed = config.seed;
            tc.objective = objectives[mi];
            validate(tc);

            std::vector<const SequenceExample*> batch(config.batch_size);
            auto step = [&](std::size_t t) {
                for (std::size_t b = 0; b < config.batch_size; ++b) {
                    batch[b] = &data.train[(t * config.batch_size + b) % data.train.size()];
                }
                sgd_batch_update(model, batch, tc, t);
            };
            for (std::size_t t = 0; t < config.warmup; ++t) {
                step(t);
            }
            std::vector<double> times(config.batches);
            for (std::size_t t = 0; t < config.batches; ++t) {
                const auto start = Clock::now();
                step(config.warmup + t);
                times[t] = std::chrono::duration<double>(Clock::now() - start).count();
            }

            std::vector<double> block_means(config.blocks, 0.0);
            for (std::size_t b = 0; b < config.blocks; ++b) {
                const std::size_t lo = b * config.batches / config.blocks;
                const std::size_t hi = (b + 1) * config.batches / config.blocks;
                block_means[b] = std::accumulate(times.begin() + lo, times.begin() + hi, 0.0) / (hi - lo);
            }
            const double mean = std::accumulate(block_means.begin(), block_means.end(), 0.0) / config.blocks;
            double var = 0.0;
            for (double m : block_means) var += (m - mean) * (m - mean);
            var /= config.blocks;

            ScalingRow row;
            row.method = config.methods[mi];
            row.Y = Y;
            row.seconds_per_batch = median(times);
            row.cv = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
            row.cv_flag = row.cv > config.cv_threshold;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_scaling(const std::vector<ScalingRow>& rows, const fs::path& dir) {
    CsvFile csv(dir / "scaling.csv", "method,Y,seconds_per_batch,cv_flag");
    for (const ScalingRow& r : rows) {
        csv.row(r.method, r.Y, r.seconds_per_batch, r.cv_flag);
    }
}

double scaling_time(const std::vector<ScalingRow>& rows, const std::string& method, std::size_t Y) {
    for (const ScalingRow& r : rows) {
        if (r.method == method && r.Y == Y) return r.seconds_per_batch;
    }
    throw DomainError("no scaling row for " + method + " at Y = " + std::to_string(Y));
}

double scaling_ratio(const std::vector<ScalingRow>& rows, const std::string& method, std::size_t y_lo,
                     std::size_t y_hi) {
    return scaling_time(rows, method, y_hi) / scaling_time(rows, method, y_lo);
}

// ---- noise ---------------------------------------------------------------

Json to_json(const NoiseConfig& c) {
    return {{"n_train", c.n_train},
            {"n_test", c.n_test},
            {"d", c.d},
            {"n_classes", c.n_classes},
            {"separation", c.separation},
            {"noise_rates", c.noise_rates},
            {"q_grid", c.q_grid},
            {"epochs", c.epochs},
            {"eta", c.eta},
            {"tau", c.tau},
            {"base", c.base},
            {"hist_noise_rate", c.hist_noise_rate},
            {"hist_bins", c.hist_bins},
            {"seed", c.seed}};
}

NoiseConfig noise_config_from(const Json& overrides) {
    const Json j = merge_config(to_json(NoiseConfig{}), overrides);
    NoiseConfig c;
    c.n_train = get<std::size_t>(j, "n_train");
    c.n_test = get<std::size_t>(j, "n_test");
    c.d = get<std::size_t>(j, "d");
    c.n_classes = get<std::size_t>(j, "n_classes");
    c.separation = get<double>(j, "separation");
    c.noise_rates = get<std::vector<double>>(j, "noise_rates");
    c.q_grid = get<std::vector<double>>(j, "q_grid");
    c.epochs = get<std::size_t>(j, "epochs");
    c.eta = get<double>(j, "eta");
    c.tau = get<double>(j, "tau");
    c.base = get<std::string>(j, "base");
    c.hist_noise_rate = get<double>(j, "hist_noise_rate");
    c.hist_bins = get<std::size_t>(j, "hist_bins");
    c.seed = get<std::uint64_t>(j, "seed");
    return c;
}

std::vector<double> LinearClassifier::scores(const double* x) const {
    std::vector<double> s(classes);
    for (std::size_t k = 0; k < classes; ++k) {
        const double* w = weights.data() + k * (dim + 1);
        double v = w[dim];
        for (std::size_t i = 0; i < dim; ++i) {
            v += w[i] * x[i];
        }
        s[k] = v;
    }
    return s;
}

Label LinearClassifier::predict(const double* x) const { return argmax_lowest(scores(x)); }

LinearClassifier train_linear_classifier(const IdnDataset& data, NoiseLoss loss, double q,
                                         const LinearCoreSpec& spec, std::size_t epochs, double eta,
                                         std::uint64_t seed) {
    check_positive(eta, "noise eta");
    LinearClassifier model;
    model.classes = data.n_classes;
    model.dim = data.d;
    model.weights.assign(model.classes * (model.dim + 1), 0.0);
    const std::size_t n = data.y_noisy.size();
    std::vector<std::size_t> order(n);
    for (std::size_t e = 0; e < epochs; ++e) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(seed, 0x0e90c5, e);
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[rng.below(i)]);
        }
        for (std::size_t i : order) {
            const double* x = data.x_train.data() + i * data.d;
            const ScoreTable s(model.scores(x));
            const Label y = data.y_noisy[i];
            std::vector<double> g;
            switch (loss) {
                case NoiseLoss::CrossEntropy: g = ce_gradient(s, y); break;
                case NoiseLoss::Generalized: g = gce_gradient(s, y, q); break;
                case NoiseLoss::LinearCore: g = mc_sum_loss_gradient(spec, s, y); break;
            }
            for (std::size_t k = 0; k < model.classes; ++k) {
                if (g[k] == 0.0) continue;
                double* w = model.weights.data() + k * (model.dim + 1);
                const double step = eta * g[k];
                for (std::size_t j = 0; j < model.dim; ++j) {
                    w[j] -= step * x[j];
                }
                w[model.dim] -= step;
            }
        }
    }
    return model;
}

double clean_test_accuracy(const LinearClassifier& model, const IdnDataset& data) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.y_test.size(); ++i) {
        correct += model.predict(data.x_test.data() + i * data.d) == data.y_test[i];
    }
    return static_cast<double>(correct) / static_cast<double>(data.y_test.size());
}

namespace {

std::vector<std::size_t> histogram(const std::vector<double>& values, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
        const double c = std::clamp(v, 0.0, 1.0);
        counts[std::min(bins - 1, static_cast<std::size_t>(c * static_cast<double>(bins)))]++;
    }
    return counts;
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

NoiseResult run_noise(const NoiseConfig& config) {
    if (config.noise_rates.empty()) {
        throw ConfigError("noise: noise_rates must be non-empty");
    }
    for (double q : config.q_grid) {
        if (!(q > 0.0 && q <= 1.0)) throw ConfigError("noise: q values must lie in (0, 1]");
    }
    if (config.hist_bins < 1) {
        throw ConfigError("noise: hist_bins must be positive");
    }
    check_positive(config.tau, "noise tau");
    const LinearCoreSpec spec(parse_base(config.base), CoreSide::OneSided, config.tau);

    struct Job {
        std::size_t rate_index;
        NoiseLoss loss;
        double q;
    };
    std::vector<Job> jobs;
    for (std::size_t r = 0; r < config.noise_rates.size(); ++r) {
        jobs.push_back({r, NoiseLoss::CrossEntropy, 0.0});
        for (double q : config.q_grid) jobs.push_back({r, NoiseLoss::Generalized, q});
        jobs.push_back({r, NoiseLoss::LinearCore, 0.0});
    }

    std::vector<IdnDataset> datasets;
    for (double rho : config.noise_rates) {
        IdnSpec is;
        is.n_train = config.n_train;
        is.n_test = config.n_test;
        is.d = config.d;
        is.n_classes = config.n_classes;
        is.noise_rate = rho;
        is.seed = config.seed;
        is.separation = config.separation;
        datasets.push_back(generate_idn_dataset(is));
    }

    const std::vector<LinearClassifier> models = map_indices(
        jobs.size(),
        [&](std::size_t i) {
            const Job& job = jobs[i];
            return train_linear_classifier(datasets[job.rate_index], job.loss, job.q, spec, config.epochs, config.eta,
                                           config.seed);
        },
        Exec::Parallel);

    NoiseResult result;
    for (const IdnDataset& d : datasets) result.realized_rates.push_back(d.realized_rate);
    for (std::size_t r = 0; r < config.noise_rates.size(); ++r) {
        const double rho = config.noise_rates[r];
        NoiseRow best{"gce_best", 0.0, rho, -1.0};
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].rate_index != r) continue;
            const double acc = clean_test_accuracy(models[i], datasets[r]);
            switch (jobs[i].loss) {
                case NoiseLoss::CrossEntropy: result.rows.push_back({"ce", 0.0, rho, acc}); break;
                case NoiseLoss::Generalized:
                    result.rows.push_back({"gce", jobs[i].q, rho, acc});
                    if (acc > best.test_accuracy) {
                        best.test_accuracy = acc;
                        best.q = jobs[i].q;
                    }
                    break;
                case NoiseLoss::LinearCore: result.rows.push_back({"lc", 0.0, rho, acc}); break;
            }
        }
        if (best.test_accuracy >= 0.0) {
            result.rows.push_back(best);
        }
    }

    // gradient-magnitude diagnostics at the final models for one noise rate
    const auto hist_it = std::find(config.noise_rates.begin(), config.noise_rates.end(), config.hist_noise_rate);
    if (hist_it == config.noise_rates.end()) {
        throw ConfigError("noise: hist_noise_rate must be one of noise_rates");
    }
    const std::size_t hr = static_cast<std::size_t>(hist_it - config.noise_rates.begin());
    const IdnDataset& data = datasets[hr];
    const LinearClassifier* ce_model = nullptr;
    const LinearClassifier* lc_model = nullptr;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].rate_index != hr) continue;
        if (jobs[i].loss == NoiseLoss::CrossEntropy) ce_model = &models[i];
        if (jobs[i].loss == NoiseLoss::LinearCore) lc_model = &models[i];
    }
    std::vector<double> ce_mag[2], lc_mag[2];  // [clean, noisy]
    for (std::size_t i = 0; i < data.y_noisy.size(); ++i) {
        const double* x = data.x_train.data() + i * data.d;
        const int g = data.flipped[i] ? 1 : 0;
        const Label y = data.y_noisy[i];
        const std::vector<double> p = softmax(ce_model->scores(x));
        ce_mag[g].push_back(1.0 - p[y]);
        for (double m : mc_pair_gradient_magnitudes(spec, ScoreTable(lc_model->scores(x)), y)) {
            lc_mag[g].push_back(m);
        }
    }
    const char* groups[2] = {"clean", "noisy"};
    const std::size_t bins = config.hist_bins;
    for (const auto& [name, mags] : {std::pair<const char*, std::vector<double>*>{"ce", ce_mag},
                                     std::pair<const char*, std::vector<double>*>{"lc", lc_mag}}) {
        for (int g = 0; g < 2; ++g) {
            const std::vector<std::size_t> counts = histogram(mags[g], bins);
            for (std::size_t b = 0; b < bins; ++b) {
                result.histogram.push_back({name, groups[g], static_cast<double>(b) / bins,
                                            static_cast<double>(b + 1) / bins, counts[b]});
            }
        }
    }
    const std::vector<double>& lc_noisy = lc_mag[1];
    if (!lc_noisy.empty()) {
        const auto saturated = std::count_if(lc_noisy.begin(), lc_noisy.end(),
                                             [](double m) { return std::abs(m - 1.0) <= 1e-9; });
        result.lc_noisy_saturated_fraction = static_cast<double>(saturated) / static_cast<double>(lc_noisy.size());
    }
    result.ce_noisy_spread = quantile(ce_mag[1], 0.9) - quantile(ce_mag[1], 0.1);
    return result;
}

void write_noise(const NoiseResult& result, const fs::path& dir) {
    {
        CsvFile csv(dir / "noise.csv", "loss,q,noise_rate,test_accuracy");
        for (const NoiseRow& r : result.rows) {
            csv.row(r.loss, r.q > 0.0 ? format_double(r.q) : std::string(), r.noise_rate, r.test_accuracy);
        }
    }
    CsvFile csv(dir / "grad_hist.csv", "loss,group,bin_left,bin_right,count");
    for (const HistRow& h : result.histogram) {
        csv.row(h.loss, h.group, h.bin_left, h.bin_right, h.count);
    }
}

double noise_accuracy(const NoiseResult& result, const std::string& loss, double noise_rate) {
    for (const NoiseRow& r : result.rows) {
        if (r.loss == loss && r.noise_rate == noise_rate) return r.test_accuracy;
    }
    throw DomainError("no noise row for " + loss);
}

// ---- train-seq -----------------------------------------------------------

Json to_json(const TrainSeqConfig& c) {
    const HmmSpec& h = c.data;
    const TrainConfig& t = c.train;
    return {{"L", h.L},
            {"Y", h.Y},
            {"d", h.d},
            {"n", h.n},
            {"n_test", h.n_test},
            {"transition_temperature", h.transition_temperature},
            {"emission_scale", h.emission_scale},
            {"objective", to_string(t.objective)},
            {"eta", t.eta},
            {"iterations", t.iterations},
            {"batch", t.batch},
            {"base", t.spec.base().name()},
            {"side", side_name(t.spec.side())},
            {"tau", t.spec.tau()},
            {"corruption_rate", t.proposal.corruption_rate},
            {"inner", inner_name(t.proposal.inner)},
            {"outer", outer_name(t.proposal.outer)},
            {"K", t.K},
            {"history_interval", t.history_interval},
            {"objective_samples", t.objective_samples},
            {"seed", t.seed}};
}

TrainSeqConfig train_seq_config_from(const Json& overrides) {
    const Json j = merge_config(to_json(TrainSeqConfig{}), overrides);
    TrainSeqConfig c;
    HmmSpec& h = c.data;
    TrainConfig& t = c.train;
    h.L = get<std::size_t>(j, "L");
    h.Y = get<std::size_t>(j, "Y");
    h.d = get<std::size_t>(j, "d");
    h.n = get<std::size_t>(j, "n");
    h.n_test = get<std::size_t>(j, "n_test");
    h.transition_temperature = get<double>(j, "transition_temperature");
    h.emission_scale = get<double>(j, "emission_scale");
    try {
        t.objective = parse_objective(get<std::string>(j, "objective"));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    t.eta = get<double>(j, "eta");
    t.iterations = get<std::size_t>(j, "iterations");
    t.batch = get<std::size_t>(j, "batch");
    const double tau = get<double>(j, "tau");
    check_positive(tau, "tau");
    t.spec = LinearCoreSpec(parse_base(get<std::string>(j, "base")), parse_side(get<std::string>(j, "side")), tau);
    t.proposal.corruption_rate = get<double>(j, "corruption_rate");
    t.proposal.inner = parse_inner(get<std::string>(j, "inner"));
    t.proposal.outer = parse_outer(get<std::string>(j, "outer"));
    t.K = get<std::size_t>(j, "K");
    t.history_interval = get<std::size_t>(j, "history_interval");
    t.objective_samples = get<std::size_t>(j, "objective_samples");
    t.seed = get<std::uint64_t>(j, "seed");
    h.seed = t.seed;
    return c;
}

TrainResult run_train_seq(const TrainSeqConfig& config) {
    const HmmDataset data = generate_hmm_data(config.data);
    return sgd_train(data.train, data.test, config.data.Y, config.train);
}

void write_history(const std::vector<HistoryRow>& history, const fs::path& path) {
    CsvFile csv(path, "iteration,objective,test_error,seconds");
    for (const HistoryRow& r : history) {
        csv.row(r.iteration, r.objective, r.test_error, r.seconds);
    }
}

}  // namespace lincore
