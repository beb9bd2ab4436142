// Command-line front end. `run` is the whole program minus process setup, so
// tests can drive it with argument vectors and string streams.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hlat::cli {

// Defaults read from a key=value file; flags given on the command line win.
// Lines are `key = value`; blank lines and lines starting with '#' are skipped.
struct RunConfig {
    std::optional<int> q;
    std::optional<std::uint64_t> N;  // table limit
    std::optional<std::uint64_t> D, K, M;
    std::optional<double> A, step;
    std::optional<std::uint64_t> X, samples;
    std::optional<std::string> out, cache_dir;
    std::optional<unsigned> threads;

    bool operator==(const RunConfig&) const = default;
};

// Throws std::invalid_argument on unknown keys, malformed or non-positive values, q < 3.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);
// (flag, value) pairs in the spelling the subcommands use, e.g. ("--cache-dir", "/tmp").
std::vector<std::pair<std::string, std::string>> config_flags(const RunConfig& cfg);

// Exit codes: 0 success, 1 acceptance failure, 2 argument error,
// 3 budget/table error, 4 any other failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hlat::cli
