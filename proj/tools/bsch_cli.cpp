// Command-line driver: single runs, parameter studies and the verification
// suite. Logging verbosity comes from BSCH_LOG (error, info, debug).

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "bsch/config.hpp"
#include "bsch/diagnostics.hpp"
#include "bsch/errors.hpp"
#include "bsch/kernels.hpp"
#include "bsch/snapshot.hpp"
#include "bsch/verify.hpp"

namespace fs = std::filesystem;
using namespace bsch;

namespace {

void setup_logging() {
    auto log = spdlog::stderr_color_mt("bsch");
    log->set_pattern("[%l] %v");
    spdlog::set_default_logger(log);
    const char* env = std::getenv("BSCH_LOG");
    const std::string level = env ? env : "info";
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::set_level(spdlog::level::info);
    if (env && level != "error" && level != "info" && level != "debug")
        spdlog::warn("BSCH_LOG={} not recognized, using info", level);
}

fs::path output_dir(const std::string& flag, const Config& c) {
    const std::string d = flag.empty() ? c.output.dir : flag;
    if (d.empty()) throw ConfigError("/output/dir", "no output directory (use --out)");
    fs::create_directories(d);
    return d;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    os << s;
    if (!os) throw Error("write failed: " + p.string());
}

std::string snapshot_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.txt", step);
    return buf;
}

int cmd_run(const std::string& config_path, const std::string& out_flag) {
    const Config c = load_config(config_path);
    const RunSetup s = make_setup(c);
    const fs::path out = output_dir(out_flag, c);
    const int n = s.params.steps();
    spdlog::info("run: {}x{} grid, {} steps, L={}, delta={}, eps={}, kernels={}", s.grid.nx(), s.grid.ny(),
                 n, s.params.L, s.params.delta, s.params.eps, kernels::isa_name(kernels::active_isa()));

    RunOptions opts;
    opts.store_every = 0;
    opts.diagnostics = c.output.diagnostics;
    const int every = c.output.snapshot_every;
    opts.hook = [&](const SolverState&, const SolverState& next) {
        const int k = int(std::lround(next.t / s.params.tau));
        spdlog::debug("step {} t={} newton={}", k, next.t, next.newton_iters);
        if ((every > 0 && k % every == 0) || k == n) save_snapshot((out / snapshot_name(k)).string(), s.grid, next);
    };
    save_snapshot((out / snapshot_name(0)).string(), s.grid, initial_state(s.params, s.grid, s.init));
    const Trajectory tr = run(s.params, s.grid, s.init, opts);

    if (c.output.diagnostics) {
        std::string csv = diagnostics_csv_header() + "\n";
        for (const auto& r : tr.diagnostics) csv += diagnostics_csv_row(r) + "\n";
        write_text(out / "diagnostics.csv", csv);
        const auto& last = tr.diagnostics.back();
        spdlog::info("done: energy {} -> {}, mass_total {}", tr.diagnostics.front().energy, last.energy,
                     last.mass_total);
    }
    return 0;
}

int cmd_study(const std::string& kind, const std::string& config_path, const std::string& out_flag, int jobs) {
    const Config c = load_config(config_path);
    StudySpec spec = default_study(study_kind_from_string(kind));
    spec.base = make_setup(c);
    spec.jobs = jobs > 0 ? jobs : int(std::max(1u, std::thread::hardware_concurrency()));
    const fs::path out = output_dir(out_flag, c);
    spdlog::info("study {}: {} sweep points, {} workers", kind, spec.sweep.size(), spec.jobs);
    const StudyResult r = run_study(spec);
    for (const auto& p : r.points) spdlog::info("  param {:<10g} {} = {:.6e}", p.param, r.fit_quantity, p.value);
    spdlog::info("slope {:.4f} (fit residual {:.3e})", r.slope, r.fit_residual);
    write_text(out / "study.json", study_to_json(r));
    return 0;
}

int cmd_check(bool quick) {
    int failed = 0;
    for (const auto& c : run_verification(quick)) {
        std::printf("%-22s %s  measured %.3e  tol %.1e%s%s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    c.measured, c.tolerance, c.detail.empty() ? "" : "  ", c.detail.c_str());
        failed += !c.pass;
    }
    std::fflush(stdout);
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Cahn-Hilliard solver with kinetic-rate dynamic boundary conditions"};
    app.require_subcommand(1);

    std::string config, out, kind;
    int jobs = 0;
    bool quick = false;

    auto* run_cmd = app.add_subcommand("run", "Integrate one configuration");
    run_cmd->add_option("--config", config, "JSON configuration")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out, "Output directory (default: output.dir)");

    auto* study_cmd = app.add_subcommand("study", "Run a parameter study");
    study_cmd->add_option("kind", kind, "Study kind")
        ->required()
        ->check(CLI::IsMember({"yosida", "kinetic-zero", "kinetic-inf", "delta-zero", "stability"}));
    study_cmd->add_option("--config", config, "Base JSON configuration")->required()->check(CLI::ExistingFile);
    study_cmd->add_option("--out", out, "Output directory (default: output.dir)");
    study_cmd->add_option("--jobs", jobs, "Worker threads (default: available parallelism)")
        ->check(CLI::PositiveNumber);

    auto* check_cmd = app.add_subcommand("check", "Run the built-in verification suite");
    check_cmd->add_flag("--quick", quick, "Reduced sample counts");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run_cmd) return cmd_run(config, out);
        if (*study_cmd) return cmd_study(kind, config, out, jobs);
        if (*check_cmd) return cmd_check(quick);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
