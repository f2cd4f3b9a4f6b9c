#pragma once

// Effective master-equation picture of the collision chain on a truncated two-mode Fock
// space: jump operator, (adjoint) Liouvillian and its spectrum, decay-rate fitting,
// dark states, direct Lindblad integration, and the two-qubit collective-loss model.
//
// Superoperators act on row-major vectorized operators: (A (x) B) vec(X) = vec(A X B^T).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "qcsync/collision.hpp"

namespace qcsync {

/// Operator on the two-mode truncated space |n> (x) |m>, n major, dimension n_max^2.
struct FockOperator {
    int n_max = 0;
    CMatrix entries;

    int dim() const { return static_cast<int>(entries.rows()); }
};

struct ModeOperators {
    FockOperator a_a, a_b, N_a, N_b;
};

/// Single-mode truncated annihilation operator, <n-1|a|n> = sqrt(n).
inline CMatrix ladder(int n_max) {
    require(n_max >= 2, "Fock cutoff n_max must be >= 2, got " + std::to_string(n_max));
    CMatrix a = CMatrix::Zero(n_max, n_max);
    for (int n = 1; n < n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline ModeOperators build_operators(int n_max) {
    const CMatrix a = ladder(n_max);
    const CMatrix id = CMatrix::Identity(n_max, n_max);
    const CMatrix aa = Eigen::kroneckerProduct(a, id).eval();
    const CMatrix ab = Eigen::kroneckerProduct(id, a).eval();
    return {{n_max, aa}, {n_max, ab}, {n_max, aa.adjoint() * aa}, {n_max, ab.adjoint() * ab}};
}

struct JumpOperator {
    FockOperator op;
    double theta_tilde_a = 0.0;
    double theta_tilde_b = 0.0;
};

/// o = theta_tilde_a a_a + theta_tilde_b a_b.
inline JumpOperator collective_jump(double theta_tilde_a, double theta_tilde_b, int n_max) {
    const auto ops = build_operators(n_max);
    return {{n_max, theta_tilde_a * ops.a_a.entries + theta_tilde_b * ops.a_b.entries}, theta_tilde_a, theta_tilde_b};
}

/// Effective couplings of the tritter: theta_tilde_a = theta1 + theta3, theta_tilde_b = theta2.
inline JumpOperator jump_operator(double theta1, double theta2, double theta3, int n_max) {
    return collective_jump(theta1 + theta3, theta2, n_max);
}

inline FockOperator phase_hamiltonian(double phi_a, double phi_b, int n_max) {
    const auto ops = build_operators(n_max);
    return {n_max, phi_a * ops.N_a.entries + phi_b * ops.N_b.entries};
}

struct LiouvillianMatrix {
    int dim = 0;
    CMatrix entries;
    double theta_tilde_a = std::numeric_limits<double>::quiet_NaN();
    double theta_tilde_b = std::numeric_limits<double>::quiet_NaN();
    double phi_a = 0.0;
    double phi_b = 0.0;
};

// ---------------------------------------------------------------------------
// Vectorization helpers.

inline CVector vectorize(const CMatrix& x) {
    CVector v(x.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) v(i * x.cols() + j) = x(i, j);
    return v;
}

inline CMatrix unvectorize(const CVector& v, Eigen::Index dim) {
    require(v.size() == dim * dim, "unvectorize: size mismatch");
    CMatrix x(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) x(i, j) = v(i * dim + j);
    return x;
}

namespace detail {

inline CMatrix adjoint_superoperator(const CMatrix& h, const CMatrix& o) {
    const Eigen::Index d = h.rows();
    const CMatrix id = CMatrix::Identity(d, d);
    const cplx i1(0.0, 1.0);
    const CMatrix od = o.adjoint();
    const CMatrix odo = od * o;
    CMatrix out = i1 * (Eigen::kroneckerProduct(h, id).eval() - Eigen::kroneckerProduct(id, h.transpose()).eval());
    out += Eigen::kroneckerProduct(od, o.transpose()).eval();
    out -= 0.5 * Eigen::kroneckerProduct(odo, id).eval();
    out -= 0.5 * Eigen::kroneckerProduct(id, (o.transpose() * o.conjugate()).eval()).eval();
    return out;
}

inline CMatrix lindblad_superoperator(const CMatrix& h, const CMatrix& o) {
    const Eigen::Index d = h.rows();
    const CMatrix id = CMatrix::Identity(d, d);
    const cplx i1(0.0, 1.0);
    const CMatrix odo = o.adjoint() * o;
    CMatrix out = -i1 * (Eigen::kroneckerProduct(h, id).eval() - Eigen::kroneckerProduct(id, h.transpose()).eval());
    out += Eigen::kroneckerProduct(o, o.conjugate()).eval();
    out -= 0.5 * Eigen::kroneckerProduct(odo, id).eval();
    out -= 0.5 * Eigen::kroneckerProduct(id, odo.transpose()).eval();
    return out;
}

}  // namespace detail

/// Heisenberg-picture generator: i[H, .] + o^dag . o - {o^dag o, .}/2 with H = phi_a N_a + phi_b N_b.
inline LiouvillianMatrix adjoint_liouvillian(double phi_a, double phi_b, const FockOperator& o) {
    require(o.n_max >= 2 && o.dim() == o.n_max * o.n_max && o.entries.cols() == o.dim(),
            "adjoint_liouvillian: jump operator does not match its Fock cutoff");
    const auto h = phase_hamiltonian(phi_a, phi_b, o.n_max);
    LiouvillianMatrix out;
    out.entries = detail::adjoint_superoperator(h.entries, o.entries);
    out.dim = static_cast<int>(out.entries.rows());
    out.phi_a = phi_a;
    out.phi_b = phi_b;
    return out;
}

inline LiouvillianMatrix adjoint_liouvillian(double phi_a, double phi_b, const FockOperator& o, int n_max) {
    require(o.n_max == n_max, "adjoint_liouvillian: jump operator cutoff " + std::to_string(o.n_max) +
                                  " does not match n_max = " + std::to_string(n_max));
    return adjoint_liouvillian(phi_a, phi_b, o);
}

inline LiouvillianMatrix adjoint_liouvillian(double phi_a, double phi_b, const JumpOperator& o) {
    auto out = adjoint_liouvillian(phi_a, phi_b, o.op);
    out.theta_tilde_a = o.theta_tilde_a;
    out.theta_tilde_b = o.theta_tilde_b;
    return out;
}

/// || L vec(I) ||; zero for any adjoint Lindblad generator.
inline double identity_residual(const LiouvillianMatrix& lm) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(lm.dim))));
    return (lm.entries * vectorize(CMatrix::Identity(d, d))).norm();
}

// ---------------------------------------------------------------------------
// Spectrum.

inline constexpr double kDefectResidual = 1e-7;

struct Spectrum {
    std::vector<cplx> eigenvalues;  // descending real part
    double gap = 0.0;               // |Re| of the slowest decaying eigenvalue
    bool gap_defined = false;       // false when every eigenvalue is (numerically) purely imaginary
    int pure_imaginary_count = 0;   // |Re| <= threshold and |Im| > threshold
    double threshold = 0.0;         // re_tolerance scaled by the spectral radius
    double max_residual = 0.0;      // max ||L psi - c psi|| / ||psi||
    bool well_conditioned = true;   // false if max_residual exceeds kDefectResidual

    /// Persistent oscillations survive: some eigenvalues sit on the imaginary axis.
    bool persistent() const { return pure_imaginary_count > 0; }
};

inline Spectrum spectrum(const LiouvillianMatrix& lm, double re_tolerance = 1e-10) {
    Eigen::ComplexEigenSolver<CMatrix> solver(lm.entries, true);
    if (solver.info() != Eigen::Success) fail(ErrorKind::Numerical, "spectrum: eigensolver did not converge");
    const CVector& vals = solver.eigenvalues();
    const CMatrix& vecs = solver.eigenvectors();

    Spectrum out;
    for (Eigen::Index j = 0; j < vals.size(); ++j) {
        const double res = (lm.entries * vecs.col(j) - vals(j) * vecs.col(j)).norm() / vecs.col(j).norm();
        out.max_residual = std::max(out.max_residual, res);
    }
    out.well_conditioned = out.max_residual <= kDefectResidual;

    out.eigenvalues.assign(vals.data(), vals.data() + vals.size());
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](cplx x, cplx y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() < y.imag();
    });
    double radius = 0.0;
    for (auto c : out.eigenvalues) radius = std::max(radius, std::abs(c));
    out.threshold = re_tolerance * std::max(1.0, radius);
    for (auto c : out.eigenvalues) {
        if (std::abs(c.real()) <= out.threshold) {
            if (std::abs(c.imag()) > out.threshold) ++out.pure_imaginary_count;
        } else if (!out.gap_defined) {
            out.gap = std::abs(c.real());
            out.gap_defined = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory analysis.

enum class Quadrature { Q, P };

inline double trajectory_signal(const TrajectoryPoint& pt, char mode, Quadrature quad) {
    require(mode == 'a' || mode == 'b', "mode must be 'a' or 'b'");
    if (mode == 'a') return quad == Quadrature::Q ? pt.mean_qa : pt.mean_pa;
    return quad == Quadrature::Q ? pt.mean_qb : pt.mean_pb;
}

struct DecayFit {
    double rate = 0.0;  // |slope| of log envelope per collision
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int extrema = 0;
};

inline constexpr int kMinFitExtrema = 5;

/// Exponential envelope rate of a sampled oscillation from its local maxima of |s|.
inline DecayFit fit_decay(std::span<const double> signal, int first_index = 0) {
    std::vector<double> xs, ys;
    double peak_max = 0.0;
    for (double v : signal) peak_max = std::max(peak_max, std::abs(v));
    const double floor = peak_max * 1e-10;
    for (std::size_t i = 1; i + 1 < signal.size(); ++i) {
        const double ym = std::abs(signal[i - 1]), y0 = std::abs(signal[i]), yp = std::abs(signal[i + 1]);
        if (!(y0 >= ym && y0 > yp) || y0 <= floor) continue;
        // Parabolic refinement of the sampled peak.
        double offset = 0.0, peak = y0;
        const double curvature = ym - 2.0 * y0 + yp;
        if (curvature < 0.0) {
            offset = 0.5 * (ym - yp) / curvature;
            peak = y0 - 0.25 * (ym - yp) * offset;
        }
        xs.push_back(static_cast<double>(first_index) + static_cast<double>(i) - offset);
        ys.push_back(std::log(peak));
    }
    if (static_cast<int>(xs.size()) < kMinFitExtrema)
        fail(ErrorKind::InsufficientData, "fit_decay: found " + std::to_string(xs.size()) + " envelope extrema, need " +
                                              std::to_string(kMinFitExtrema));
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    DecayFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.rate = std::abs(fit.slope);
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.extrema = static_cast<int>(xs.size());
    return fit;
}

/// Decay rate of <q_beta> (or <p_beta>) over collision counts [lo, hi].
inline DecayFit fit_decay(const Trajectory& traj, int lo, int hi, char mode = 'a', Quadrature quad = Quadrature::Q) {
    require(lo >= 0 && hi >= lo && static_cast<std::size_t>(hi) < traj.size(),
            "fit_decay: window [" + std::to_string(lo) + ", " + std::to_string(hi) + "] outside trajectory");
    std::vector<double> s;
    for (int l = lo; l <= hi; ++l) s.push_back(trajectory_signal(traj[static_cast<std::size_t>(l)], mode, quad));
    return fit_decay(std::span<const double>(s), lo);
}

struct OscillationEstimate {
    double period = 0.0;     // collisions per cycle
    double frequency = 0.0;  // cycles per collision
    int crossings = 0;
};

/// Period from the mean spacing of linearly interpolated zero crossings.
inline OscillationEstimate oscillation_frequency(std::span<const double> signal) {
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < signal.size(); ++i) {
        const double a = signal[i], b = signal[i + 1];
        if (a == 0.0 && (crossings.empty() || crossings.back() != static_cast<double>(i)))
            crossings.push_back(static_cast<double>(i));
        else if (a * b < 0.0)
            crossings.push_back(static_cast<double>(i) + a / (a - b));
    }
    if (crossings.size() < 2)
        fail(ErrorKind::InsufficientData, "oscillation_frequency: fewer than two zero crossings");
    OscillationEstimate out;
    out.crossings = static_cast<int>(crossings.size());
    out.period = 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    out.frequency = 1.0 / out.period;
    return out;
}

inline OscillationEstimate oscillation_frequency(const Trajectory& traj, int start = 0, char mode = 'a') {
    require(start >= 0 && static_cast<std::size_t>(start) < traj.size(), "oscillation_frequency: bad start");
    std::vector<double> s;
    for (std::size_t l = static_cast<std::size_t>(start); l < traj.size(); ++l)
        s.push_back(trajectory_signal(traj[l], mode, Quadrature::Q));
    return oscillation_frequency(std::span<const double>(s));
}

// ---------------------------------------------------------------------------
// Dark states.

using FockCoefficients = std::map<std::pair<int, int>, cplx>;

struct DarkStateReport {
    bool dark = false;
    double residual = 0.0;  // || o |psi> || for normalized |psi>
    bool hamiltonian_eigenstate = false;
    bool decoherence_free() const { return dark && hamiltonian_eigenstate; }
};

inline constexpr double kDarkResidual = 1e-10;

inline DarkStateReport dark_state_check(const FockCoefficients& coeffs, double theta_tilde_a, double theta_tilde_b,
                                        double phi_a = 0.0, double phi_b = 0.0) {
    require(!coeffs.empty(), "dark_state_check: empty coefficient map");
    double norm2 = 0.0;
    for (const auto& [nm, c] : coeffs) {
        require(nm.first >= 0 && nm.second >= 0, "dark_state_check: negative Fock index");
        norm2 += std::norm(c);
    }
    require(norm2 > 0.0, "dark_state_check: zero state");
    const double scale = 1.0 / std::sqrt(norm2);

    FockCoefficients image;
    for (const auto& [nm, c] : coeffs) {
        const auto [n, m] = nm;
        if (n > 0) image[{n - 1, m}] += theta_tilde_a * std::sqrt(static_cast<double>(n)) * c * scale;
        if (m > 0) image[{n, m - 1}] += theta_tilde_b * std::sqrt(static_cast<double>(m)) * c * scale;
    }
    double res2 = 0.0;
    for (const auto& [nm, c] : image) res2 += std::norm(c);

    DarkStateReport out;
    out.residual = std::sqrt(res2);
    out.dark = out.residual < kDarkResidual;
    // H_phi |n, m> = (phi_a n + phi_b m) |n, m>: eigenstate iff the support shares one energy.
    std::vector<double> energies;
    for (const auto& [nm, c] : coeffs)
        if (std::abs(c) * scale > 1e-14) energies.push_back(phi_a * nm.first + phi_b * nm.second);
    const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
    out.hamiltonian_eigenstate = energies.empty() || (*hi - *lo) <= 1e-12 * std::max(1.0, std::abs(*hi));
    return out;
}

/// Normalized dark state on the shell n + m = k, from the recursion
/// theta_tilde_a sqrt(n) c_{n,m} + theta_tilde_b sqrt(m+1) c_{n-1,m+1} = 0.
inline FockCoefficients dark_state_in_shell(int excitations, double theta_tilde_a, double theta_tilde_b) {
    require(excitations >= 1, "dark_state_in_shell: need at least one excitation");
    require(theta_tilde_b != 0.0, "dark_state_in_shell: theta_tilde_b must be nonzero");
    FockCoefficients c;
    cplx cur = 1.0;
    c[{excitations, 0}] = cur;
    for (int m = 0; m < excitations; ++m) {
        const int n = excitations - m;
        cur = -theta_tilde_a * std::sqrt(static_cast<double>(n)) * cur / (theta_tilde_b * std::sqrt(m + 1.0));
        c[{n - 1, m + 1}] = cur;
    }
    double norm2 = 0.0;
    for (const auto& [nm, v] : c) norm2 += std::norm(v);
    for (auto& [nm, v] : c) v /= std::sqrt(norm2);
    return c;
}

inline CVector to_state_vector(const FockCoefficients& coeffs, int n_max) {
    CVector psi = CVector::Zero(n_max * n_max);
    for (const auto& [nm, c] : coeffs) {
        require(nm.first < n_max && nm.second < n_max, "to_state_vector: Fock index beyond cutoff");
        psi(nm.first * n_max + nm.second) = c;
    }
    return psi;
}

/// Normalized truncated product of coherent states |alpha_a> (x) |alpha_b>.
inline CVector coherent_product_state(cplx alpha_a, cplx alpha_b, int n_max) {
    const auto single = [n_max](cplx alpha) {
        CVector v(n_max);
        cplx term = 1.0;
        for (int n = 0; n < n_max; ++n) {
            if (n > 0) term *= alpha / std::sqrt(static_cast<double>(n));
            v(n) = term;
        }
        return CVector(v / v.norm());
    };
    return Eigen::kroneckerProduct(single(alpha_a), single(alpha_b)).eval();
}

// ---------------------------------------------------------------------------
// Direct integration of d rho/dt = -i[H, rho] + o rho o^dag - {o^dag o, rho}/2.

struct LindbladSeries {
    std::vector<double> times;
    std::vector<CMatrix> states;
};

inline constexpr double kTraceDriftLimit = 1e-6;

inline LindbladSeries lindblad_evolve(const FockOperator& rho0, double phi_a, double phi_b, const FockOperator& o,
                                      double t_max, double dt, double sample_interval = 1.0) {
    require(rho0.n_max == o.n_max && rho0.dim() == o.dim(), "lindblad_evolve: operator dimensions differ");
    require(dt > 0.0 && t_max >= 0.0 && sample_interval > 0.0, "lindblad_evolve: bad time grid");
    const CMatrix& r0 = rho0.entries;
    require((r0 - r0.adjoint()).norm() < 1e-10, "lindblad_evolve: rho0 is not Hermitian");
    require(std::abs(r0.trace() - 1.0) < 1e-10, "lindblad_evolve: rho0 must have unit trace");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r0, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-10, "lindblad_evolve: rho0 is not positive");

    const CMatrix h = phase_hamiltonian(phi_a, phi_b, o.n_max).entries;
    const CMatrix& jump = o.entries;
    const CMatrix jump_dag = jump.adjoint();
    // -iH_eff rho + h.c. + o rho o^dag with H_eff = H - i o^dag o / 2.
    const CMatrix k_eff = cplx(0.0, -1.0) * h - 0.5 * (jump_dag * jump);
    const auto rhs = [&](const CMatrix& rho) -> CMatrix {
        CMatrix kr = k_eff * rho;
        return kr + kr.adjoint() + jump * rho * jump_dag;
    };

    const long steps = std::lround(t_max / dt);
    const long sample_every = std::max(1L, std::lround(sample_interval / dt));
    LindbladSeries out;
    CMatrix rho = r0;
    out.times.push_back(0.0);
    out.states.push_back(rho);
    for (long s = 1; s <= steps; ++s) {
        const CMatrix k1 = rhs(rho);
        const CMatrix k2 = rhs(rho + 0.5 * dt * k1);
        const CMatrix k3 = rhs(rho + 0.5 * dt * k2);
        const CMatrix k4 = rhs(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double drift = std::abs(rho.trace() - 1.0);
        if (drift > kTraceDriftLimit)
            fail(ErrorKind::StepSize, "lindblad_evolve: trace drift " + std::to_string(drift) + " at t = " +
                                          std::to_string(s * dt) + "; reduce dt");
        if (s % sample_every == 0) {
            out.times.push_back(static_cast<double>(s) * dt);
            out.states.push_back(rho);
        }
    }
    return out;
}

inline cplx expectation(const CMatrix& rho, const CMatrix& op) { return (rho * op).trace(); }

// ---------------------------------------------------------------------------
// Two-qubit collective dissipation, O = theta_tilde_a s^-_a + theta_tilde_b s^-_b,
// H = sum_beta phi_beta s^+_beta s^-_beta. Basis |s_a s_b>, s^- = |0><1|.

inline LiouvillianMatrix spin_liouvillian(double phi_a, double phi_b, double theta_tilde_a, double theta_tilde_b) {
    const auto ops = build_operators(2);
    const CMatrix h = phi_a * ops.N_a.entries + phi_b * ops.N_b.entries;
    const CMatrix o = theta_tilde_a * ops.a_a.entries + theta_tilde_b * ops.a_b.entries;
    LiouvillianMatrix out;
    out.entries = detail::lindblad_superoperator(h, o);
    out.dim = static_cast<int>(out.entries.rows());
    out.theta_tilde_a = theta_tilde_a;
    out.theta_tilde_b = theta_tilde_b;
    out.phi_a = phi_a;
    out.phi_b = phi_b;
    return out;
}

}  // namespace qcsync
