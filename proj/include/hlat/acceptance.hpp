// The ten acceptance checks, shared by the acceptance test binary and the
// `verify` subcommand. Each check reports a verdict plus the numbers behind it.
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hlat::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;  // the measured quantities, one line
    double seconds = 0;
};

struct Options {
    std::vector<int> only;  // empty: all of 1..10
    std::optional<std::filesystem::path> cache_dir;
};

// Runs the selected criteria in order; `on_result` sees each as it finishes.
std::vector<CriterionResult> run(const Options& opt = {},
                                 const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_line(const CriterionResult& r);

}  // namespace hlat::acceptance
