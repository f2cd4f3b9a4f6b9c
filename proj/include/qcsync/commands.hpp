#pragma once

// Command implementations behind the CLI. Each command reads a validated RunConfig and
// writes CSV/text artifacts into an output directory.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>
#include <vector>

#include "qcsync/config.hpp"
#include "qcsync/csv.hpp"
#include "qcsync/liouvillian.hpp"
#include "qcsync/measures.hpp"

namespace qcsync {

struct CommandResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::filesystem::path prepare_dir(const std::filesystem::path& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) fail(ErrorKind::InvalidArgument, "cannot create output directory " + out.string() + ": " + ec.message());
    return out;
}

inline void emit(CommandResult& res, const std::filesystem::path& path, const std::string& content) {
    csv::write_file(path.string(), content);
    res.files.push_back(path);
}

inline std::string fmt(double v) { return csv::number(v); }

}  // namespace detail

inline Trajectory run_trajectory(const RunConfig& cfg) {
    return propagate(cfg.chain, cfg.system_a, cfg.system_b, cfg.env);
}

inline CommandResult cmd_propagate(const RunConfig& cfg, const std::filesystem::path& out, bool export_matrix = false) {
    const auto traj = run_trajectory(cfg);
    const auto sync = relative_measure(traj);
    const auto ent = entanglement_series(traj);
    detail::prepare_dir(out);
    CommandResult res;
    std::ostringstream t, m;
    csv::write_trajectory(t, traj);
    csv::write_measures(m, sync, ent);
    detail::emit(res, out / "trajectory.csv", t.str());
    detail::emit(res, out / "measures.csv", m.str());
    if (export_matrix) {
        std::ostringstream s;
        csv::write_matrix(s, joint_scattering(cfg.chain));
        detail::emit(res, out / "scattering_matrix.csv", s.str());
    }
    return res;
}

/// Final-collision S_re and E_N over the configured grid; rows ordered axis1 major.
inline std::vector<csv::SweepRow> run_sweep(const RunConfig& cfg, int jobs) {
    require(cfg.sweep.has_value(), "sweep: config has no 'sweep' section");
    const auto& sw = *cfg.sweep;
    const int n1 = sw.axis1.steps, n2 = sw.axis2.steps;
    std::vector<csv::SweepRow> rows(static_cast<std::size_t>(n1) * n2);
    const auto clamp = [](double v) { return std::clamp(v, 0.0, kPi / 2); };

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(rows.size());
    const auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < rows.size();) {
            try {
                const int i = static_cast<int>(k) / n2, j = static_cast<int>(k) % n2;
                ChainConfig chain = cfg.chain;
                const double d21 = sw.axis1.value(i), d31 = sw.axis2.value(j);
                chain.theta1 = sw.theta1;
                chain.theta2 = clamp(sw.theta1 + d21);
                chain.theta3 = clamp(sw.theta1 + d31);
                const auto traj = propagate(chain, cfg.system_a, cfg.system_b, cfg.env);
                rows[k] = {d21, d31, relative_value(traj.back()).S_re, log_negativity(traj.back().cov)};
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(rows.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

inline CommandResult cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out, int jobs) {
    const auto rows = run_sweep(cfg, jobs);
    detail::prepare_dir(out);
    CommandResult res;
    std::ostringstream s;
    csv::write_sweep(s, rows);
    detail::emit(res, out / "sweep.csv", s.str());
    return res;
}

struct SpectrumReport {
    Spectrum spectrum;
    double identity_residual = 0.0;
    double asymptotic_rate = 0.0;  // 0 when persistent oscillations survive
    bool fit_available = false;
    DecayFit fit;
    double mismatch = 0.0;  // |fit - rate| / rate, or |fit| when rate = 0
    bool valid = true;
    std::vector<std::string> warnings;
};

inline SpectrumReport analyze_spectrum(const RunConfig& cfg) {
    SpectrumReport rep;
    if (cfg.env.alpha_E != cplx(0.0, 0.0)) {
        rep.valid = false;
        rep.warnings.push_back("env.alpha_E is nonzero; the master-equation comparison assumes a vacuum environment");
    }
    const auto& c = cfg.chain;
    const auto& lv = cfg.liouvillian;
    const auto jump = jump_operator(c.theta1, c.theta2, c.theta3, lv.n_max);
    const auto lm = adjoint_liouvillian(c.phi_a, c.phi_b, jump);
    rep.identity_residual = identity_residual(lm);
    rep.spectrum = spectrum(lm, lv.re_tolerance);
    if (!rep.spectrum.well_conditioned)
        rep.warnings.push_back("eigenvector residual " + detail::fmt(rep.spectrum.max_residual) +
                               " exceeds the defect threshold; spectrum may be defective");
    rep.asymptotic_rate = rep.spectrum.persistent() ? 0.0 : rep.spectrum.gap;

    const auto traj = run_trajectory(cfg);
    try {
        rep.fit = fit_decay(traj, lv.fit_lo, lv.fit_hi, lv.mode);
        rep.fit_available = true;
        rep.mismatch = rep.asymptotic_rate > 0.0 ? std::abs(rep.fit.rate - rep.asymptotic_rate) / rep.asymptotic_rate
                                                 : rep.fit.rate;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientData) throw;
        rep.warnings.push_back(std::string("decay fit unavailable: ") + e.what());
    }
    return rep;
}

inline std::string format_spectrum_report(const RunConfig& cfg, const SpectrumReport& rep) {
    std::ostringstream os;
    const auto& s = rep.spectrum;
    os << "n_max: " << cfg.liouvillian.n_max << '\n'
       << "dimension: " << s.eigenvalues.size() << '\n'
       << "identity_residual: " << detail::fmt(rep.identity_residual) << '\n'
       << "threshold: " << detail::fmt(s.threshold) << '\n'
       << "gap: " << detail::fmt(s.gap) << '\n'
       << "gap_defined: " << (s.gap_defined ? "true" : "false") << '\n'
       << "pure_imaginary_count: " << s.pure_imaginary_count << '\n'
       << "persistent: " << (s.persistent() ? "true" : "false") << '\n'
       << "asymptotic_rate: " << detail::fmt(rep.asymptotic_rate) << '\n'
       << "max_eigen_residual: " << detail::fmt(s.max_residual) << '\n'
       << "well_conditioned: " << (s.well_conditioned ? "true" : "false") << '\n'
       << "fit_window: [" << cfg.liouvillian.fit_lo << ", " << cfg.liouvillian.fit_hi << "]\n";
    if (rep.fit_available)
        os << "fitted_rate: " << detail::fmt(rep.fit.rate) << '\n'
           << "fit_r_squared: " << detail::fmt(rep.fit.r_squared) << '\n'
           << "fit_extrema: " << rep.fit.extrema << '\n'
           << "mismatch: " << detail::fmt(rep.mismatch) << '\n';
    os << "valid: " << (rep.valid ? "true" : "false") << '\n';
    if (!rep.warnings.empty()) {
        os << "warnings:\n";
        for (const auto& w : rep.warnings) os << "  - \"" << w << "\"\n";
    }
    return os.str();
}

inline std::string format_dark_states(const RunConfig& cfg) {
    const auto& c = cfg.chain;
    const double ta = c.theta1 + c.theta3, tb = c.theta2;
    std::ostringstream os;
    os << "theta_tilde_a: " << detail::fmt(ta) << '\n' << "theta_tilde_b: " << detail::fmt(tb) << '\n';
    if (tb == 0.0) {
        os << "states: []\n";
        return os.str();
    }
    os << "states:\n";
    for (int k = 1; k <= 2; ++k) {
        const auto coeffs = dark_state_in_shell(k, ta, tb);
        const auto rep = dark_state_check(coeffs, ta, tb, c.phi_a, c.phi_b);
        os << "  - excitations: " << k << '\n'
           << "    dark: " << (rep.dark ? "true" : "false") << '\n'
           << "    residual: " << detail::fmt(rep.residual) << '\n'
           << "    hamiltonian_eigenstate: " << (rep.hamiltonian_eigenstate ? "true" : "false") << '\n'
           << "    decoherence_free: " << (rep.decoherence_free() ? "true" : "false") << '\n'
           << "    coefficients:\n";
        for (const auto& [nm, v] : coeffs)
            os << "      - {n: " << nm.first << ", m: " << nm.second << ", re: " << detail::fmt(v.real())
               << ", im: " << detail::fmt(v.imag()) << "}\n";
    }
    return os.str();
}

inline CommandResult cmd_spectrum(const RunConfig& cfg, const std::filesystem::path& out) {
    const auto rep = analyze_spectrum(cfg);
    detail::prepare_dir(out);
    CommandResult res;
    res.warnings = rep.warnings;
    std::ostringstream s;
    csv::write_spectrum(s, rep.spectrum);
    detail::emit(res, out / "spectrum.csv", s.str());
    detail::emit(res, out / "spectrum_report.yaml", format_spectrum_report(cfg, rep));
    detail::emit(res, out / "dark_states.yaml", format_dark_states(cfg));
    return res;
}

inline CommandResult cmd_wigner(const RunConfig& cfg, const std::filesystem::path& out, std::vector<int> snapshots) {
    if (snapshots.empty()) snapshots = cfg.wigner.snapshots;
    require(!snapshots.empty(), "wigner: no snapshots requested (use --snapshots or wigner.snapshots)");
    for (int l : snapshots)
        require(l >= 0 && l <= cfg.chain.collisions, "wigner: snapshot " + std::to_string(l) +
                                                         " outside [0, " + std::to_string(cfg.chain.collisions) + "]");
    const auto traj = run_trajectory(cfg);
    detail::prepare_dir(out);
    CommandResult res;
    for (int l : snapshots) {
        const auto& pt = traj[static_cast<std::size_t>(l)];
        for (int mode = 0; mode < 2; ++mode) {
            const Eigen::Vector2d mean = mode == 0 ? Eigen::Vector2d(pt.mean_qa, pt.mean_pa)
                                                   : Eigen::Vector2d(pt.mean_qb, pt.mean_pb);
            const GaussianState st(mean, CovarianceMatrix(Matrix(pt.cov.block(mode, mode))));
            const auto grid = default_wigner_grid(st, cfg.wigner.points);
            const auto w = wigner(st, grid.points);
            std::ostringstream os;
            csv::write_wigner(os, grid, w);
            const std::string name = "wigner_L" + std::to_string(l) + "_mode_" + (mode == 0 ? "a" : "b") + ".csv";
            detail::emit(res, out / name, os.str());
        }
    }
    return res;
}

}  // namespace qcsync
