// slag-lab: batch scenario runner for the calibration geometry laboratory.
//
// Usage: slag-lab <scenario> [--config file] [--set key=value]... [--out dir]
// Scenarios: annulus, sec6, maximality, sweep:<suite>, solve:<poisson|ma|family>,
// transform.  Exit codes: 0 all checks pass, 2 a check failed, 3 parameter or
// precondition error, 4 internal error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slag/errors.hpp"
#include "slag/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for calibrated gradient graphs"};
    app.name("slag-lab");

    std::string scenario;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "slag-out";

    app.add_option("scenario", scenario,
                   "annulus | sec6 | maximality | sweep:<suite> | "
                   "solve:<poisson|ma|family> | transform")
        ->required();
    app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--set", overrides, "config override key=value (repeatable)");
    app.add_option("--out", out_dir, "output directory for report.json and artifacts");

    CLI11_PARSE(app, argc, argv);

    try {
        slag::ScenarioConfig cfg;
        if (!config_path.empty()) {
            cfg = slag::ScenarioConfig::from_file(config_path);
        }
        for (const auto& kv : overrides) {
            cfg.apply_override(kv);
        }

        slag::ExperimentReport rep = slag::run_scenario(scenario, cfg, out_dir);
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            rep.write_json((std::filesystem::path(out_dir) / "report.json").string());
        }

        for (const auto& c : rep.checks) {
            std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": value "
                      << c.value << ", target " << c.target << " (tol " << c.tolerance
                      << ", " << slag::to_string(c.source) << ")\n";
        }
        if (!rep.verdict.empty()) {
            std::cout << "verdict: " << rep.verdict << "\n";
        }
        std::cout << (rep.all_passed() ? "all checks passed" : "CHECKS FAILED") << " ("
                  << rep.timing_ms << " ms)\n";
        return rep.all_passed() ? 0 : 2;
    } catch (const slag::DomainError& e) {
        std::cerr << "parameter/precondition error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
