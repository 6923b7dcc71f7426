#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "rlab/cli.hpp"

using namespace rlab;
namespace fs = std::filesystem;

TEST_CASE("exponents subcommand prints algebra and exits cleanly") {
    CHECK(run_cli({"exponents"}) == 0);
    CHECK(run_cli({"exponents", "--d", "4", "--p", "5/4", "--q", "12/5"}) == 0);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli({"no_such_subcommand"}) == 2);
    CHECK(run_cli({"exponents", "--bogus-flag"}) == 2);
    CHECK(run_cli({}) == 2);
}

TEST_CASE("help exits with code 0") {
    CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("config problems exit with code 2") {
    CHECK(run_cli({"extension", "--config", "/nonexistent/x.cfg"}) == 2);
    fs::path bad = fs::temp_directory_path() / "rlab_bad.cfg";
    std::ofstream(bad) << "broken line without equals\n";
    CHECK(run_cli({"extension", "--config", bad.string()}) == 2);
    fs::remove(bad);
}

TEST_CASE("sweep subcommand writes reports where asked") {
    fs::path dir = fs::temp_directory_path() / "rlab_cli_sweep";
    fs::remove_all(dir);
    fs::path cfg = fs::temp_directory_path() / "rlab_cli_sweep.cfg";
    std::ofstream(cfg) << "sweep.family = gaussian\n"
                          "sweep.d = 2\n"
                          "sweep.box = 4\n"
                          "sweep.n = 32\n"
                          "sweep.circle_m = 32\n"
                          "sweep.q = 1\n"
                          "sweep.widths = 1.0, 0.7071067811865476, 0.5\n";
    int rc = run_cli({"maximal", "--config", cfg.string(), "--report-dir", dir.string()});
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "sweep_maximal.json"));
    CHECK(fs::exists(dir / "sweep_maximal.csv"));
    fs::remove(cfg);
    fs::remove_all(dir);
}
