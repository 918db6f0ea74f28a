#include "cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "lincore/checks.hpp"
#include "lincore/experiments.hpp"

namespace lincore::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : Error {
    using Error::Error;
};

struct Options {
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::string config_path;
    // train-seq
    std::optional<std::string> objective;
    std::optional<std::size_t> Y;
    std::optional<std::size_t> L;
};

Json load_overrides(const Options& o) {
    Json j = Json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw UsageError("cannot read config file " + o.config_path);
        try {
            j = Json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError("config file " + o.config_path + " is not valid JSON: " + e.what());
        }
        if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    }
    if (o.seed) j["seed"] = *o.seed;
    return j;
}

Json versions() {
    return {{"lincore", LINCORE_VERSION},
            {"compiler", __VERSION__},
            {"cplusplus", __cplusplus},
            {"openmp", _OPENMP},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION}};
}

void write_manifest(const fs::path& dir, const std::string& command, const Json& config, double seconds,
                    const std::vector<std::string>& outputs, const Json& nondeterministic, const Json& extra = {}) {
    Json m;
    m["command"] = command;
    m["config"] = config;
    m["seed"] = config.contains("seed") ? config["seed"] : Json();
    m["versions"] = versions();
    m["timings"] = {{"wall_seconds", seconds}};
    m["outputs"] = outputs;
    Json nd = nondeterministic;
    nd["manifest.json"] = {"timings", "results.seconds"};
    m["nondeterministic"] = nd;
    if (!extra.is_null()) m["results"] = extra;
    std::ofstream out(dir / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw Error("write failed: manifest.json");
}

int run_selftest(const fs::path& dir, std::ostream& out) {
    const std::vector<std::function<CheckResult()>> checks{
        [] { return check_rate_slopes(); },
        [] { return check_transformation_bounds(Mode::Valid); },
        [] { return check_tau_stability(Mode::Valid); },
        [] { return check_smoothness(); },
        [] { return check_closed_form(); },
        [] { return check_multiclass_consistency(); },
        [] { return check_structured_consistency(); },
        [] { return check_inference_oracles(); },
        [] { return check_gradients(); },
        [] { return check_unbiasedness(); },
        [] { return check_variance_bound(); },
        [] { return check_training(); },
        [] { return check_noise(Mode::Valid); },
        [&] { return check_determinism(dir / "selftest_scratch"); },
    };
    bool ok = true;
    Json results = Json::array();
    for (const auto& check : checks) {
        const CheckResult r = check();
        ok = ok && r.pass;
        out << (r.pass ? "PASS " : "FAIL ") << r.id << ' ' << r.name << ": " << r.summary() << '\n';
        results.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"seconds", r.seconds}});
    }
    fs::remove_all(dir / "selftest_scratch");
    out << (ok ? "selftest passed" : "selftest FAILED") << '\n';
    return ok ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear-core surrogate experiments"};
    app.name("lincore");
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--seed", o.seed, "random seed (overrides the config file)");
    app.add_option("--out-dir", o.out_dir, "output directory")->capture_default_str();
    app.add_option("--config", o.config_path, "JSON file of flat key overrides")->check(CLI::ExistingFile);

    auto* rates = app.add_subcommand("rates", "biased-coin excess curves and log-log slopes");
    auto* stability = app.add_subcommand("stability", "slopes across core widths");
    auto* scaling = app.add_subcommand("scaling", "per-batch update time against the label count");
    auto* train = app.add_subcommand("train-seq", "SGD on synthetic HMM sequences");
    train->add_option("--objective", o.objective, "ssvm, crf, lincore or lincore_ksample");
    train->add_option("--Y", o.Y, "label alphabet size")->check(CLI::PositiveNumber);
    train->add_option("--L", o.L, "sequence length")->check(CLI::PositiveNumber);
    auto* noise = app.add_subcommand("noise", "label-noise robustness of a linear classifier");
    auto* selftest = app.add_subcommand("selftest", "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    try {
        const fs::path dir(o.out_dir);
        fs::create_directories(dir);
        const Json overrides = load_overrides(o);

        if (rates->parsed()) {
            const RatesConfig c = rates_config_from(overrides);
            write_rates(run_rates(c), dir);
            write_manifest(dir, "rates", to_json(c), elapsed(), {"rates.csv", "slopes.json"}, Json::object());
        } else if (stability->parsed()) {
            const StabilityConfig c = stability_config_from(overrides);
            write_stability(run_stability(c), dir);
            write_manifest(dir, "stability", to_json(c), elapsed(), {"stability.csv"}, Json::object());
        } else if (scaling->parsed()) {
            const ScalingConfig c = scaling_config_from(overrides);
            const auto rows = run_scaling(c);
            write_scaling(rows, dir);
            for (const ScalingRow& r : rows) {
                if (r.cv_flag) {
                    err << "warning: timing jitter for " << r.method << " at Y=" << r.Y << " (cv " << r.cv << ")\n";
                }
            }
            write_manifest(dir, "scaling", to_json(c), elapsed(), {"scaling.csv"},
                           {{"scaling.csv", {"seconds_per_batch", "cv_flag"}}});
        } else if (train->parsed()) {
            Json j = overrides;
            if (o.objective) j["objective"] = *o.objective;
            if (o.Y) j["Y"] = *o.Y;
            if (o.L) j["L"] = *o.L;
            const TrainSeqConfig c = train_seq_config_from(j);
            const TrainResult r = run_train_seq(c);
            write_history(r.history, dir / "history.csv");
            out << "final test error " << r.history.back().test_error << '\n';
            write_manifest(dir, "train-seq", to_json(c), elapsed(), {"history.csv"}, {{"history.csv", {"seconds"}}});
        } else if (noise->parsed()) {
            const NoiseConfig c = noise_config_from(overrides);
            const NoiseResult r = run_noise(c);
            write_noise(r, dir);
            const Json diag{{"lc_noisy_saturated_fraction", r.lc_noisy_saturated_fraction},
                            {"ce_noisy_spread", r.ce_noisy_spread},
                            {"realized_noise_rates", r.realized_rates}};
            write_manifest(dir, "noise", to_json(c), elapsed(), {"noise.csv", "grad_hist.csv"}, Json::object(), diag);
        } else if (selftest->parsed()) {
            if (!overrides.empty() && !(overrides.size() == 1 && overrides.contains("seed"))) {
                throw UsageError("selftest takes no configuration");
            }
            const int code = run_selftest(dir, out);
            write_manifest(dir, "selftest", Json::object(), elapsed(), {}, Json::object(),
                           {{"pass", code == 0}});
            return code;
        }
        out << "wrote " << fs::absolute(dir).string() << '\n';
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace lincore::cli
