// Serial vs OpenMP timings for the batch kernels.

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lincore/data.hpp"
#include "lincore/kernels.hpp"
#include "lincore/rng.hpp"

using namespace lincore;

namespace {

double median_seconds(const std::function<double()>& fn, int reps, double& sink) {
    std::vector<double> t;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        sink += fn();
        t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

void report(const std::string& name, const std::function<double(Exec)>& fn, int reps) {
    double sink = 0.0;
    const double serial = median_seconds([&] { return fn(Exec::Serial); }, reps, sink);
    const double parallel = median_seconds([&] { return fn(Exec::Parallel); }, reps, sink);
    const bool same = fn(Exec::Serial) == fn(Exec::Parallel);
    std::printf("%-22s serial %10.6f s  parallel %10.6f s  speedup %6.2fx  %s\n", name.c_str(), serial, parallel,
                serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel benchmarks"};
    int reps = 5;
    std::size_t n = 2000;
    app.add_option("--reps", reps, "repetitions per timing")->check(CLI::PositiveNumber);
    app.add_option("--n", n, "batch size")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    std::printf("threads: %d\n", omp_get_max_threads());

    HmmSpec hs;
    hs.L = 6;
    hs.Y = 4;
    hs.n = n;
    hs.n_test = 1;
    const HmmDataset data = generate_hmm_data(hs);
    ChainModel model(hs.Y, hs.d);
    Rng rng(7, 0xbe, 0);
    for (double& w : model.weights()) w = rng.normal();
    const std::span<const SequenceExample> train(data.train);

    report("batch_hamming_error", [&](Exec e) { return batch_hamming_error(model, train, e); }, reps);

    TrainConfig cfg;
    report("batch_objective", [&](Exec e) { return batch_objective(model, train, cfg, e); }, reps);

    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i) ts[i] = static_cast<double>(i + 1) / static_cast<double>(n);
    const MarginLoss loss = MarginLoss::linear_core(LinearCoreSpec(BaseLoss::logistic()));
    report("transformation_grid", [&](Exec e) {
        const auto v = transformation_grid(loss, ts, e);
        return v.back();
    }, reps);

    const auto draws = random_regret_draws(n, 6, true, 1.0, 3);
    report("regret_sweep", [&](Exec e) {
        const auto v = regret_sweep(cfg.spec, draws, e);
        double s = 0.0;
        for (const auto& r : v) s += r.regret_surrogate;
        return s;
    }, reps);
    return 0;
}
