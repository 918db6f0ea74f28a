// Acceptance runner: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "lincore/checks.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lincore acceptance criteria"};
    int only = 0;
    std::string scratch = (std::filesystem::temp_directory_path() / "lincore_acceptance").string();
    app.add_option("--criterion", only, "run a single criterion (1-15)")->check(CLI::Range(1, lincore::kCriteria));
    app.add_option("--scratch", scratch, "directory for determinism runs");
    CLI11_PARSE(app, argc, argv);

    bool all_pass = true;
    for (int id = 1; id <= lincore::kCriteria; ++id) {
        if (only != 0 && id != only) continue;
        const lincore::CheckResult r = lincore::run_criterion(id, std::filesystem::path(scratch) / std::to_string(id));
        all_pass = all_pass && r.pass;
        std::printf("%s criterion %2d %s (%.2f s): %s\n", r.pass ? "PASS" : "FAIL", id, r.name.c_str(), r.seconds,
                    r.summary().c_str());
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
