// qcsync: run collision-model trajectories, sweeps, spectra and Wigner exports.
//
//   qcsync propagate|sweep|spectrum|wigner --config <path> [--out <dir>] [--jobs N]
//
// Output directory: --out, else the config's `output`, else $QCSYNC_OUT_DIR, else ".".
// Exit codes: 0 success, 1 usage/schema error, 2 numerical failure.

#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "qcsync/qcsync.hpp"

namespace {

std::filesystem::path output_dir(const std::string& flag, const qcsync::RunConfig& cfg) {
    if (!flag.empty()) return flag;
    if (!cfg.output.empty()) return cfg.output;
    if (const char* env = std::getenv("QCSYNC_OUT_DIR"); env && *env) return env;
    return ".";
}

void report(const qcsync::CommandResult& res) {
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : res.files) std::cout << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stroboscopic optical collision-model simulator"};
    app.require_subcommand(1);

    std::string config_path, out;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool export_matrix = false;
    std::vector<int> snapshots;

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration (YAML)")->required();
        sub->add_option("--out", out, "output directory");
    };
    auto* prop = app.add_subcommand("propagate", "trajectory and measure CSVs");
    common(prop);
    prop->add_flag("--export-matrix", export_matrix, "also write the joint scattering matrix");
    auto* sweep = app.add_subcommand("sweep", "final S_re and E_N over the sweep grid");
    common(sweep);
    sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* spec = app.add_subcommand("spectrum", "adjoint Liouvillian spectrum, gap and decay fit");
    common(spec);
    auto* wig = app.add_subcommand("wigner", "per-mode Wigner grids at selected collision counts");
    common(wig);
    wig->add_option("--snapshots", snapshots, "collision counts (default: wigner.snapshots)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto cfg = qcsync::load_config(config_path);
        const auto dir = output_dir(out, cfg);
        if (*prop) report(qcsync::cmd_propagate(cfg, dir, export_matrix));
        else if (*sweep) report(qcsync::cmd_sweep(cfg, dir, jobs));
        else if (*spec) report(qcsync::cmd_spectrum(cfg, dir));
        else if (*wig) report(qcsync::cmd_wigner(cfg, dir, snapshots));
        return 0;
    } catch (const qcsync::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_usage_error() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
