#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "diraclab/cli.hpp"

using namespace diraclab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("diraclab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err);
    if (err_text) *err_text = err.str();
    return rc;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    std::string err;
    CHECK(run({}, &err) == 2);
    CHECK(err.find("usage") != std::string::npos);
    CHECK(run({"no-such-command"}) == 2);
    CHECK(run({"algebra-check", "--sign", "3", "--out", scratch("sign").string()}) == 2);
    CHECK(run({"--version"}) == 0);
}

TEST_CASE("unknown config keys are reported with their line") {
    const auto dir = scratch("cfg");
    {
        std::ofstream f(dir / "bad.cfg");
        f << "# comment\nmanifold = sphere\ncolour = blue\n";
    }
    std::string err;
    CHECK(run({"algebra-check", "--config", (dir / "bad.cfg").string(), "--out", dir.string()}, &err) == 2);
    CHECK(err.find(":3:") != std::string::npos);
    CHECK(err.find("colour") != std::string::npos);

    {
        std::ofstream f(dir / "dim.cfg");
        f << "dim = 1\n";
    }
    CHECK(run({"geometry-check", "--config", (dir / "dim.cfg").string(), "--out", dir.string()}) == 2);
}

TEST_CASE("config file and flag precedence") {
    const auto dir = scratch("prec");
    {
        std::ofstream f(dir / "run.cfg");
        f << "manifold = sphere\nn-grid = 50,100\nrepeats = 2\nseed = 7\nfamily = false\n";
    }
    REQUIRE(run({"dirac-converge", "--config", (dir / "run.cfg").string(), "--seed", "9", "--out", dir.string()}) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["subcommand"] == "dirac-converge");
    CHECK(m["config"]["manifold"] == "sphere");
    CHECK(m["config"]["seed"] == "9");
    CHECK(m["config"]["n_grid"] == "50,100");
    CHECK_FALSE(m["config"].contains("out"));
    CHECK_FALSE(m["config"].contains("threads"));
}

TEST_CASE("algebra-check is deterministic") {
    const auto a = scratch("alg_a"), b = scratch("alg_b");
    REQUIRE(run({"algebra-check", "--out", a.string()}) == 0);
    REQUIRE(run({"algebra-check", "--out", b.string()}) == 0);
    for (const auto* f : {"algebra.csv", "algebra.json", "manifest.json"}) {
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK_FALSE(slurp(a / f).empty());
    }
}

TEST_CASE("a manifest reproduces the run byte for byte") {
    const auto a = scratch("man_a"), b = scratch("man_b");
    REQUIRE(run({"laplace-converge", "--n-grid", "64,128", "--repeats", "3", "--threads", "2", "--out", a.string()}) ==
            0);
    REQUIRE(run({"--manifest", (a / "manifest.json").string(), "--threads", "1", "--out", b.string()}) == 0);
    for (const auto* f : {"report.csv", "report.dat", "report.json", "manifest.json"}) {
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(fs::exists(a / "timing.txt"));
}

TEST_CASE("bound-report and specfun write their artifacts") {
    const auto dir = scratch("bound");
    REQUIRE(run({"bound-report", "--out", dir.string(), "--dump-operators", (dir / "ops").string()}) == 0);
    CHECK(slurp(dir / "bound.csv").rfind("hbar,rho,ratio\n", 0) == 0);
    CHECK(fs::exists(dir / "ops" / "D_hbar0.mtx"));
    REQUIRE(run({"specfun", "--out", dir.string()}) == 0);
    CHECK(slurp(dir / "specfun.csv").rfind("t,A,B,C", 0) == 0);
}
