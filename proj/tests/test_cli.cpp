#include <filesystem>
#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using hlat::cli::RunConfig;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = hlat::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "hlat_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("documented examples") {
    auto c = run({"count", "--q", "3", "--x", "1"});
    CHECK(c.code == 0);
    CHECK(c.out == "15\n");
    auto m = run({"moments", "--q", "3", "--m", "1", "--l", "1"});
    CHECK(m.code == 0);
    CHECK(m.out == "0\n");
}

TEST_CASE("count: brute force, squared radius, table limit") {
    CHECK(run({"count", "--q", "3", "--x", "2", "--brute"}).out == run({"count", "--q", "3", "--x", "2"}).out);
    CHECK(run({"count", "--q", "3", "--x2", "4"}).out == run({"count", "--q", "3", "--x", "2"}).out);
    CHECK(run({"count", "--q", "3", "--x", "3", "--N", "2"}).code == 3);
}

TEST_CASE("argument errors exit with 2 and usage text") {
    auto u = run({"count", "--q", "3", "--x", "1", "--bogus"});
    CHECK(u.code == 2);
    CHECK(u.err.find("Usage") != std::string::npos);
    CHECK(run({"count", "--q", "2", "--x", "1"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"moments", "--q", "3", "--m", "1", "--l", "3", "--method", "closed2"}).code == 2);
    CHECK(run({"error", "--q", "3", "--x-min", "sqrt(2)", "--x-max", "2", "--samples", "3"}).code == 2);
    CHECK(run({"count", "--q", "3", "--x", "1", "--x2", "1"}).code == 2);
}

TEST_CASE("resource errors exit with 3") {
    CHECK(run({"moments", "--q", "3", "--m", "1", "--l", "2", "--method", "ergodic", "--D", "128"}).code == 3);
    CHECK(run({"density", "--q", "3", "--M", "5", "--A", "0.02"}).code == 3);
}

TEST_CASE("error CSV on an exact grid") {
    auto r = run({"error", "--q", "3", "--x-min", "1", "--x-max", "2", "--samples", "3"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,count,normalized_error");
    std::getline(in, line);
    CHECK(line.rfind("1,15,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("1.5,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("2,", 0) == 0);
}

TEST_CASE("moment JSON carries a schema version") {
    auto r = run({"moments", "--q", "3", "--m", "1", "--l", "2", "--method", "closed2", "--json"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["method"] == "closed2");
    CHECK(j["value"].get<double>() > 31.0);
    CHECK(j["truncation"]["D"] == 40);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
    std::vector<std::string> a{"phi-sum", "--q", "3", "--M", "5", "--X", "10", "--samples", "50"};
    auto r1 = run(a);
    auto b = a;
    b.insert(b.begin(), {"--threads", "1"});
    auto r2 = run(b);
    CHECK(r1.code == 0);
    CHECK(r1.out == r2.out);
    CHECK(r1.out.rfind("x,partial_sum\n", 0) == 0);
}

TEST_CASE("density writes CSV and metadata") {
    auto csv = temp_path("density.csv");
    auto r = run({"density", "--q", "3", "--M", "10", "--out", csv.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(csv).rfind("x,P\n", 0) == 0);
    auto meta = nlohmann::json::parse(slurp(csv.string() + ".json"));
    CHECK(meta["schema_version"] == 1);
    CHECK(meta["M"] == 10);
    CHECK(std::fabs(meta["moments"][0]["value"].get<double>() - 1.0) < 1e-3);
}

TEST_CASE("config: round trip, validation, precedence") {
    RunConfig c;
    c.q = 4;
    c.N = 1000;
    c.D = 12;
    c.A = 0.1 + 0.2;
    c.step = 0.125;
    c.samples = 77;
    c.cache_dir = "/tmp/cache dir";
    c.threads = 2;
    auto text = hlat::cli::serialize_config(c);
    CHECK(hlat::cli::parse_config(text) == c);
    CHECK(hlat::cli::serialize_config(hlat::cli::parse_config(text)) == text);
    CHECK(hlat::cli::parse_config("# comment\n\nq=5\n").q == 5);
    CHECK_THROWS_AS(hlat::cli::parse_config("q = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(hlat::cli::parse_config("D = 0\n"), std::invalid_argument);
    CHECK_THROWS_AS(hlat::cli::parse_config("A = -1\n"), std::invalid_argument);
    CHECK_THROWS_AS(hlat::cli::parse_config("colour = blue\n"), std::invalid_argument);
    CHECK_THROWS_AS(hlat::cli::parse_config("q 3\n"), std::invalid_argument);

    auto file = temp_path("run.cfg");
    std::ofstream(file) << "q = 4\nsamples = 3\n";
    auto from_cfg = run({"count", "--config", file.string(), "--x", "1"});
    CHECK(from_cfg.code == 0);
    CHECK(from_cfg.out == run({"count", "--q", "4", "--x", "1"}).out);
    CHECK(run({"count", "--config", file.string(), "--q", "3", "--x", "1"}).out == "15\n");
    std::ofstream(file) << "q = 1\n";
    CHECK(run({"count", "--config", file.string(), "--x", "1"}).code == 2);
}

TEST_CASE("verify prints one line per selected criterion") {
    auto r = run({"verify", "--only", "2,3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("[PASS]  2") != std::string::npos);
    CHECK(r.out.find("[PASS]  3") != std::string::npos);
    CHECK(r.out.find(" 1 ") == std::string::npos);
}
