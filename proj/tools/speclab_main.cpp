// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "speclab/acceptance.hpp"
#include "speclab/emit.hpp"
#include "speclab/strichartz.hpp"

namespace fs = std::filesystem;
using namespace speclab;
using nlohmann::json;

namespace {

// Exit codes: 2 usage, 3 scenario errors, 4 numerical failures.
constexpr int kUsageError = 2;
constexpr int kScenarioError = 3;
constexpr int kNumericalError = 4;

struct RunContext {
    fs::path dir;
    json manifest;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    RunContext(const std::string& run_root, const std::string& command)
    {
        dir = fs::path(run_root) / command;
        fs::create_directories(dir);
        manifest["command"] = command;
        manifest["artifacts"] = json::array();
        manifest["version"] = "speclab 1.0";
    }
    void write(const std::string& name, const std::string& payload)
    {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        out << payload;
        manifest["artifacts"].push_back(name);
        std::cout << "wrote " << (dir / name).string() << "\n";
    }
    void finish()
    {
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
        out << manifest.dump(2) << "\n";
    }
};

std::string default_run_root()
{
    const char* env = std::getenv("SPECLAB_RUN_DIR");
    return env ? env : "runs";
}

GridFunction default_gaussian(const Grid3& g, double s)
{
    GridFunction f(g, 1);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                auto p = g.point(ix, iy, iz);
                f[idx] = std::exp(-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / (2 * s * s));
            }
    return f;
}

GridFunction initial_state(const Scenario& scn)
{
    if (scn.is_matrix()) {
        GridFunction f(scn.grid, 2);
        auto bump = default_gaussian(scn.grid, 0.08 * scn.grid.box_length);
        for (std::size_t i = 0; i < bump.size(); ++i)
            f.at(1, i) = bump[i]; // dispersive component
        return f;
    }
    return default_gaussian(scn.grid, 0.08 * scn.grid.box_length);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"speclab: numerical lab for dispersive spectral analysis"};
    app.require_subcommand(1);
    std::string run_root = default_run_root();
    app.add_option("--run-dir", run_root, "run output directory root");

    std::string scn_path;
    double opt_p = 6.0 / 5.0;
    double opt_T = -1, opt_dt = -1;
    std::string opt_window;
    int opt_resolution = -1;
    bool opt_td = false, opt_unprojected = false, opt_quick = false;
    std::string scenario_dir = "scenarios";

    auto* decompose = app.add_subcommand("decompose", "atomic decomposition of the potential");
    decompose->add_option("scenario", scn_path)->required();
    decompose->add_option("--p", opt_p, "atom exponent");

    auto* propagate = app.add_subcommand("propagate", "time evolution norm table");
    propagate->add_option("scenario", scn_path)->required();
    propagate->add_option("--T", opt_T);
    propagate->add_option("--dt", opt_dt);
    propagate->add_flag("--time-dependent", opt_td, "use the scenario's moving frame");

    auto* scan = app.add_subcommand("scan", "smallest-singular-value scan");
    scan->add_option("scenario", scn_path)->required();
    scan->add_option("--window", opt_window, "real window lo:hi");
    scan->add_option("--resolution", opt_resolution);

    auto* projections = app.add_subcommand("projections", "Riesz projection diagnostics");
    projections->add_option("scenario", scn_path)->required();

    auto* strichartz = app.add_subcommand("strichartz", "empirical space-time quotients");
    strichartz->add_option("scenario", scn_path)->required();
    strichartz->add_flag("--time-dependent", opt_td);
    strichartz->add_flag("--unprojected", opt_unprojected);

    auto* wiener = app.add_subcommand("wiener-demo", "cyclic-time algebra demonstrations");

    auto* accept = app.add_subcommand("accept", "run the acceptance suite");
    accept->add_flag("--quick", opt_quick);
    accept->add_option("--scenarios", scenario_dir, "bundled scenario directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsageError;
    }

    try {
        if (*decompose) {
            RunContext run(run_root, "decompose");
            Scenario scn = load_scenario(scn_path);
            run.manifest["scenario"] = scn_path;
            run.manifest["seed"] = scn.seed;
            run.manifest["p"] = format_float(opt_p);
            const GridFunction& v = scn.is_matrix() ? scn.w1 : scn.v;
            auto d = atomic_decompose(v, opt_p);
            run.write("decomposition.csv", emit_decompose_csv(d));
            run.finish();
        } else if (*propagate) {
            RunContext run(run_root, "propagate");
            Scenario scn = load_scenario(scn_path);
            run.manifest["scenario"] = scn_path;
            run.manifest["seed"] = scn.seed;
            DuhamelOptions o;
            o.T = opt_T > 0 ? opt_T : scn.run.T;
            o.dt = opt_dt > 0 ? opt_dt : scn.run.dt;
            o.boundary_tol = scn.tol.boundary_mass;
            if (opt_td)
                o.mode = TimeDependence::moving_potential;
            auto traj = duhamel_solve(scn, initial_state(scn), o);
            run.manifest["T"] = format_float(o.T);
            run.manifest["dt"] = format_float(o.dt);
            run.write("propagate.csv", emit_propagate_csv(traj));
            run.finish();
        } else if (*scan) {
            RunContext run(run_root, "scan");
            Scenario scn = load_scenario(scn_path);
            run.manifest["scenario"] = scn_path;
            run.manifest["seed"] = scn.seed;
            double lo = scn.scan.lo, hi = scn.scan.hi;
            if (!opt_window.empty()) {
                auto colon = opt_window.find(':');
                if (colon == std::string::npos) {
                    std::cerr << "error: --window expects lo:hi\n";
                    return kUsageError;
                }
                lo = std::stod(opt_window.substr(0, colon));
                hi = std::stod(opt_window.substr(colon + 1));
            }
            int res = opt_resolution > 0 ? opt_resolution : scn.scan.resolution;
            auto pf = split_potential(scn);
            auto sc = exceptional_scan(pf, lo, hi, res, scn.tol.dip_threshold,
                                       scn.tol.branch_exclusion);
            run.manifest["window"] = format_float(lo) + ":" + format_float(hi);
            run.manifest["resolution"] = res;
            run.write("scan.csv", emit_scan_csv(sc));
            run.write("dips.csv", emit_dips_csv(sc));
            if (scn.scan.has_rect) {
                auto rect = exceptional_scan_rect(pf, scn.scan.re_lo, scn.scan.re_hi,
                                                  scn.scan.n_re, scn.scan.im_lo, scn.scan.im_hi,
                                                  scn.scan.n_im);
                run.write("scan_rect.csv", emit_scan_csv(rect));
            }
            run.finish();
        } else if (*projections) {
            RunContext run(run_root, "projections");
            Scenario scn = load_scenario(scn_path);
            run.manifest["scenario"] = scn_path;
            run.manifest["seed"] = scn.seed;
            auto pf = split_potential(scn);
            auto sc = exceptional_scan(pf, scn.scan.lo, scn.scan.hi, scn.scan.resolution,
                                       scn.tol.dip_threshold, scn.tol.branch_exclusion);
            auto proj = continuous_projection(pf, sc);
            run.write("projections.json", emit_projections_json(proj));
            run.finish();
        } else if (*strichartz) {
            RunContext run(run_root, "strichartz");
            Scenario scn = load_scenario(scn_path);
            run.manifest["scenario"] = scn_path;
            run.manifest["seed"] = scn.seed;
            auto pf = split_potential(scn);
            auto sc = exceptional_scan(pf, scn.scan.lo, scn.scan.hi, scn.scan.resolution,
                                       scn.tol.dip_threshold, scn.tol.branch_exclusion);
            auto proj = continuous_projection(pf, sc);
            std::vector<StrichartzDatum> family;
            for (int i = 0; i < 3; ++i) {
                StrichartzDatum d;
                d.z0 = default_gaussian(scn.grid, (0.03 + 0.01 * i) * scn.grid.box_length);
                family.push_back(d);
            }
            auto rep = strichartz_quotients(scn, proj, family, scn.run.T, scn.run.dt, opt_td,
                                            !opt_unprojected);
            run.write("strichartz.json", emit_strichartz_json(rep));
            run.write("quotients.csv", emit_strichartz_csv(rep));
            run.finish();
        } else if (*wiener) {
            RunContext run(run_root, "wiener-demo");
            run.write("wiener_demo.json", emit_wiener_demo_json());
            run.finish();
        } else if (*accept) {
            RunContext run(run_root, "accept");
            AcceptanceOptions o;
            o.quick = opt_quick;
            o.scenario_dir = scenario_dir;
            auto results = run_acceptance(o, std::cout);
            bool all = true;
            json j = json::array();
            for (const auto& r : results) {
                all = all && r.pass;
                json e;
                e["id"] = r.id;
                e["name"] = r.name;
                e["pass"] = r.pass;
                e["seconds"] = format_float(r.seconds);
                e["detail"] = r.detail;
                j.push_back(e);
            }
            run.manifest["quick"] = opt_quick;
            run.write("acceptance.json", j.dump(2) + "\n");
            run.finish();
            if (!all)
                return kNumericalError;
        }
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::string what = e.what();
        bool scenario_issue = what.rfind("scenario:", 0) == 0;
        return scenario_issue ? kScenarioError : kNumericalError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kScenarioError;
    }
    return 0;
}
