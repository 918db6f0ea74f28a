#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lincore/experiments.hpp"

using namespace lincore;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lincore_exp_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -2.5, 0.0}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("merge_config rejects unknown keys and type changes") {
    const Json d = to_json(RatesConfig{});
    CHECK_THROWS_AS(merge_config(d, Json{{"nope", 1}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, Json{{"tau", "big"}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, Json{{"points", 2.5}}), ConfigError);
    CHECK_THROWS_AS(merge_config(d, Json::array()), ConfigError);
    CHECK_THROWS_AS(merge_config(d, Json{{"seed", -1}}), ConfigError);
    const Json m = merge_config(d, Json{{"tau", 2}});
    CHECK(m["tau"].get<double>() == 2.0);
}

TEST_CASE("configs round-trip through JSON") {
    CHECK(to_json(rates_config_from(to_json(RatesConfig{}))) == to_json(RatesConfig{}));
    CHECK(to_json(stability_config_from(to_json(StabilityConfig{}))) == to_json(StabilityConfig{}));
    CHECK(to_json(scaling_config_from(to_json(ScalingConfig{}))) == to_json(ScalingConfig{}));
    CHECK(to_json(noise_config_from(to_json(NoiseConfig{}))) == to_json(NoiseConfig{}));
    CHECK(to_json(train_seq_config_from(to_json(TrainSeqConfig{}))) == to_json(TrainSeqConfig{}));

    const TrainSeqConfig c = train_seq_config_from(
        Json{{"objective", "ssvm"}, {"Y", 5}, {"side", "symmetric"}, {"inner", "uniform_full"}, {"seed", 9}});
    CHECK(c.train.objective == Objective::Ssvm);
    CHECK(c.data.Y == 5);
    CHECK(c.data.seed == 9);
    CHECK(c.train.seed == 9);
    CHECK(c.train.spec.side() == CoreSide::Symmetric);
    CHECK(c.train.proposal.inner == InnerProposal::UniformFull);
    CHECK(to_json(c)["objective"] == "ssvm");
    CHECK_THROWS_AS(train_seq_config_from(Json{{"objective", "svm"}}), ConfigError);
    CHECK_THROWS_AS(train_seq_config_from(Json{{"base", "hinge"}}), ConfigError);
}

TEST_CASE("rates: four losses, slopes near 1 and 1/2") {
    const RatesResult r = run_rates(RatesConfig{});
    CHECK(r.points.size() == 100);
    REQUIRE(r.slopes.size() == 4);
    for (const auto& [name, slope] : r.slopes) {
        if (name.rfind("lc_", 0) == 0) {
            CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
        } else {
            CHECK(slope == doctest::Approx(0.5).epsilon(0.1));
        }
    }
    const fs::path dir = fresh_dir("rates");
    write_rates(r, dir);
    const std::string csv = slurp(dir / "rates.csv");
    CHECK(csv.rfind("loss,delta,excess_surrogate,excess_target\n", 0) == 0);
    CHECK(count_lines(csv) == 101);
    const Json slopes = Json::parse(slurp(dir / "slopes.json"));
    CHECK(slopes.size() == 4);
    CHECK(slopes.contains("lc_logistic"));
}

TEST_CASE("rates: invalid ranges are config errors") {
    RatesConfig c;
    c.delta_hi = 0.6;
    CHECK_THROWS_AS(run_rates(c), ConfigError);
    c = RatesConfig{};
    c.points = 3;
    CHECK_THROWS_AS(run_rates(c), ConfigError);
}

TEST_CASE("stability: shared taus are written once") {
    StabilityConfig c;
    c.bound_grid_points = 20;
    const StabilityResult r = run_stability(c);
    CHECK(r.sweep.size() == 5);
    CHECK(r.vanishing.size() == 5);
    const fs::path dir = fresh_dir("stability");
    write_stability(r, dir);
    CHECK(count_lines(slurp(dir / "stability.csv")) == 1 + 5 + 4);
    CHECK(r.vanishing.back().slope > 0.45);
    CHECK(r.vanishing.back().slope < 0.6);
}

TEST_CASE("scaling: small grid produces one row per method and size") {
    ScalingConfig c;
    c.labels = {3, 6};
    c.L = 5;
    c.d = 4;
    c.warmup = 2;
    c.batches = 10;
    c.pool = 4;
    const auto rows = run_scaling(c);
    CHECK(rows.size() == 6);
    for (const auto& r : rows) CHECK(r.seconds_per_batch > 0.0);
    CHECK(scaling_ratio(rows, "crf", 3, 6) > 0.0);
    CHECK_THROWS_AS(scaling_time(rows, "crf", 7), DomainError);
    c.methods = {"perceptron"};
    CHECK_THROWS_AS(run_scaling(c), DomainError);
    c.methods = {"crf"};
    c.blocks = 20;
    CHECK_THROWS_AS(run_scaling(c), ConfigError);
}

TEST_CASE("noise: rows, best-q summary and histograms") {
    NoiseConfig c;
    c.n_train = 600;
    c.n_test = 300;
    c.epochs = 3;
    c.q_grid = {0.5, 1.0};
    const NoiseResult r = run_noise(c);
    // per rate: ce, 2 gce, lc, gce_best
    CHECK(r.rows.size() == 3 * 5);
    CHECK(r.histogram.size() == 2 * 2 * 20);
    std::size_t lc_noisy = 0;
    for (const auto& h : r.histogram) {
        if (h.loss == "lc" && h.group == "noisy") lc_noisy += h.count;
    }
    CHECK(lc_noisy > 0);
    for (const auto& row : r.rows) {
        CHECK(row.test_accuracy >= 0.0);
        CHECK(row.test_accuracy <= 1.0);
    }
    const double best = noise_accuracy(r, "gce_best", 0.2);
    for (const auto& row : r.rows) {
        if (row.loss == "gce" && row.noise_rate == 0.2) CHECK(row.test_accuracy <= best);
    }
    c.hist_noise_rate = 0.25;
    CHECK_THROWS_AS(run_noise(c), ConfigError);
}

TEST_CASE("noise: lc saturates on a rigged model") {
    IdnSpec s;
    s.n_train = 200;
    s.n_test = 50;
    const IdnDataset data = generate_idn_dataset(s);
    const LinearCoreSpec spec(BaseLoss::logistic(), CoreSide::OneSided, 1.0);
    const LinearClassifier m = train_linear_classifier(data, NoiseLoss::LinearCore, 0.0, spec, 0, 0.1, 1);
    // untrained model: every margin is 0, inside the core
    for (std::size_t i = 0; i < 5; ++i) {
        for (double g : mc_pair_gradient_magnitudes(spec, ScoreTable(m.scores(&data.x_train[i * s.d])), 0)) {
            CHECK(g == 1.0);
        }
    }
    CHECK(clean_test_accuracy(m, data) >= 0.0);
}

TEST_CASE("train-seq and history writer") {
    TrainSeqConfig c;
    c.train.iterations = 500;
    c.train.history_interval = 100;
    const TrainResult r = run_train_seq(c);
    CHECK(r.history.size() == 6);
    const fs::path dir = fresh_dir("train");
    write_history(r.history, dir / "history.csv");
    const std::string csv = slurp(dir / "history.csv");
    CHECK(csv.rfind("iteration,objective,test_error,seconds\n", 0) == 0);
    CHECK(count_lines(csv) == 7);
}

TEST_CASE("deterministic outputs across reruns") {
    NoiseConfig c;
    c.n_train = 300;
    c.n_test = 100;
    c.epochs = 2;
    c.q_grid = {0.7};
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    write_noise(run_noise(c), a);
    write_noise(run_noise(c), b);
    CHECK(slurp(a / "noise.csv") == slurp(b / "noise.csv"));
    CHECK(slurp(a / "grad_hist.csv") == slurp(b / "grad_hist.csv"));
}
