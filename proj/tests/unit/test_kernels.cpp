#include <doctest.h>

#include <omp.h>

#include "lincore/data.hpp"
#include "lincore/kernels.hpp"
#include "lincore/trainers.hpp"

using namespace lincore;

TEST_CASE("parallel kernels are bitwise equal to the serial references") {
    omp_set_num_threads(4);
    HmmSpec s;
    s.n = 64;
    const auto d = generate_hmm_data(s);
    TrainConfig cfg;
    cfg.iterations = 300;
    cfg.history_interval = 300;
    const auto model = sgd_train(d.train, d.test, s.Y, cfg).model;
    CHECK(batch_hamming_error(model, d.test, Exec::Serial) == batch_hamming_error(model, d.test, Exec::Parallel));
    CHECK(batch_hamming_error(model, d.test, Exec::Serial) == hamming_error(model, d.test));
    for (auto obj : {Objective::Ssvm, Objective::Crf, Objective::Lincore, Objective::LincoreKSample}) {
        cfg.objective = obj;
        const double a = batch_objective(model, d.train, cfg, Exec::Serial);
        CHECK(a == batch_objective(model, d.train, cfg, Exec::Parallel));
        CHECK(a == training_objective(model, d.train, cfg));
    }

    const auto loss = MarginLoss::linear_core(LinearCoreSpec(BaseLoss::logistic()));
    const auto ts = logspace(1e-3, 0.9, 40);
    CHECK(transformation_grid(loss, ts, Exec::Serial) == transformation_grid(loss, ts, Exec::Parallel));

    const LinearCoreSpec spec(BaseLoss::exponential(), CoreSide::OneSided);
    for (bool structured : {false, true}) {
        const auto draws = random_regret_draws(200, 4, structured, 2.0, 9);
        const auto a = regret_sweep(spec, draws, Exec::Serial);
        const auto b = regret_sweep(spec, draws, Exec::Parallel);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].regret_target == b[i].regret_target);
            CHECK(a[i].regret_surrogate == b[i].regret_surrogate);
        }
    }
}

TEST_CASE("random regret draws are valid distributions") {
    for (const auto& d : random_regret_draws(100, 5, true, 1.0, 3)) {
        double s = 0.0;
        for (double p : d.p) s += p;
        CHECK(std::abs(s - 1.0) < 1e-12);
        for (std::size_t a = 0; a < 5; ++a) CHECK(d.loss[a * 5 + a] == 0.0);
    }
}
