#pragma once

// Numbered invariant checks shared by the acceptance runner and `selftest`.
//
// Checks marked with a Mode take Mode::Stated to evaluate the property
// exactly as stated, and Mode::Valid to evaluate the mathematically valid
// form instead (see the individual comments).

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace lincore {

struct CheckResult {
    int id = 0;
    std::string name;
    bool pass = true;
    std::size_t evaluated = 0;  // number of individual comparisons
    std::size_t failed = 0;
    std::vector<std::string> notes;  // first failures and summary figures
    double seconds = 0.0;

    void expect(bool ok, const std::string& what);
    void note(const std::string& text) { notes.push_back(text); }
    std::string summary() const;
};

enum class Mode { Stated, Valid };

CheckResult check_rate_slopes();
/// Valid form replaces T_tau(t) >= t/tau by T_tau(t) >= tau * t.
CheckResult check_transformation_bounds(Mode mode);
/// Valid form leaves tau = 0.1 out of the slope band.
CheckResult check_tau_stability(Mode mode);
CheckResult check_smoothness();
CheckResult check_closed_form();
CheckResult check_multiclass_consistency(std::size_t draws_per_size = 2500);
CheckResult check_structured_consistency(std::size_t draws_per_size = 2500);
CheckResult check_inference_oracles(std::size_t instances = 500);
CheckResult check_gradients(std::size_t instances = 100);
CheckResult check_unbiasedness();
CheckResult check_variance_bound(std::size_t trials = 10000);
CheckResult check_scaling();
CheckResult check_training();
/// Valid form drops the noisy-group saturation fraction requirement.
CheckResult check_noise(Mode mode, std::size_t seeds = 5);
/// Runs every experiment twice into scratch directories and compares CSVs
/// with wall-clock columns removed.
CheckResult check_determinism(const std::filesystem::path& scratch);

/// Criterion id -> check as stated; ids are 1..15.
CheckResult run_criterion(int id, const std::filesystem::path& scratch);
inline constexpr int kCriteria = 15;

/// CSV text with the named columns removed.
std::string drop_csv_columns(const std::string& csv, const std::vector<std::string>& columns);

}  // namespace lincore
