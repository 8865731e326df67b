// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "speclab/emit.hpp"

using namespace speclab;

namespace {

std::string scenario_path(const std::string& name)
{
    return std::string(SPECLAB_SOURCE_DIR) + "/scenarios/" + name;
}

std::string cli_binary()
{
    return std::string(SPECLAB_SOURCE_DIR) + "/build/speclab";
}

int run_cli(const std::string& args)
{
    std::string cmd = cli_binary() + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("cli: unknown subcommand exits 2, scan emits the requested rows")
{
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("scan") == 2); // missing scenario argument

    std::string rd = "/tmp/speclab_cli_test";
    std::system(("rm -rf " + rd).c_str());
    int rc = run_cli("--run-dir " + rd + " scan --window -0.6:-0.2 --resolution 9 " +
                     scenario_path("well_c4_scan.scn"));
    CHECK(rc == 0);
    std::string csv = slurp(rd + "/scan/scan.csv");
    // Header plus one row per sample, CRLF line ends.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
    CHECK(csv.find("\r\n") != std::string::npos);
    CHECK(csv.rfind("lambda_re,lambda_im,sigma_min", 0) == 0);

    // Identical rerun produces byte-identical output.
    std::string first = csv;
    CHECK(run_cli("--run-dir " + rd + " scan --window -0.6:-0.2 --resolution 9 " +
                  scenario_path("well_c4_scan.scn")) == 0);
    CHECK(slurp(rd + "/scan/scan.csv") == first);
}

TEST_CASE("cli: scenario errors exit 3")
{
    std::string bad = "/tmp/speclab_bad.scn";
    {
        std::ofstream out(bad);
        out << "[scenario]\nformat 1\n[grid]\nn 16\nL 16\n[hamiltonian]\nkind matrix\n"
               "[potential.w1]\nkind ball\nradius 1\namplitude 2\n"
               "[potential.w2]\nkind ball\nradius 1\namplitude 1\n";
    }
    CHECK(run_cli("scan " + bad) == 3);
    CHECK(run_cli("scan /nonexistent.scn") == 3);
}

TEST_CASE("cli: wiener demo and decompose artifacts")
{
    std::string rd = "/tmp/speclab_cli_test2";
    std::system(("rm -rf " + rd).c_str());
    CHECK(run_cli("--run-dir " + rd + " wiener-demo") == 0);
    std::string j = slurp(rd + "/wiener-demo/wiener_demo.json");
    CHECK(j.find("\"inverse_b0\": \"0.33333333333333331\"") != std::string::npos);

    CHECK(run_cli("--run-dir " + rd + " decompose " + scenario_path("well_c4_scan.scn")) == 0);
    std::string csv = slurp(rd + "/decompose/decomposition.csv");
    CHECK(csv.rfind("l,alpha,support_measure,height", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 2);

    std::string manifest = slurp(rd + "/decompose/manifest.json");
    CHECK(manifest.find("\"command\": \"decompose\"") != std::string::npos);
}
