#pragma once

// Synchronization and entanglement measures on two-mode trajectories.

#include <cmath>
#include <vector>

#include "qcsync/collision.hpp"

namespace qcsync {

enum class SyncKind {
    AntiPhase,  // error quadratures (q_a + q_b)/sqrt(2), (p_a + p_b)/sqrt(2)
    Complete,   // error quadratures (q_a - q_b)/sqrt(2), (p_a - p_b)/sqrt(2)
};

struct SyncPoint {
    int collisions = 0;
    double S_c = 0.0;
    double S_re = 0.0;
    double R_a = 0.0;
    double R_b = 0.0;
};

struct SyncSeries {
    std::vector<SyncPoint> points;
};

namespace detail {

inline void require_physical_cov(const CovarianceMatrix& cov, const char* who) {
    require(cov.n_modes() == 2, std::string(who) + ": expected a two-mode covariance");
    const auto report = is_physical(cov);
    require(report.physical, std::string(who) + ": covariance is not physical (min eigenvalue " +
                                 std::to_string(report.min_eigenvalue) + ")");
}

// Var q_- + Var p_-, i.e. the shifted second moment of the error quadratures.
inline double error_variance(const CovarianceMatrix& c, SyncKind kind) {
    const double sign = kind == SyncKind::AntiPhase ? 1.0 : -1.0;
    const double var_q = (c(0, 0) + c(2, 2) + 2.0 * sign * c(0, 2)) / 2.0;
    const double var_p = (c(1, 1) + c(3, 3) + 2.0 * sign * c(1, 3)) / 2.0;
    return var_q + var_p;
}

}  // namespace detail

/// Synchronization measure S_c = 1 / <q_-^2 + p_-^2> with the error quadratures shifted
/// by their first moments.
inline double mari_value(const TrajectoryPoint& pt, SyncKind kind = SyncKind::AntiPhase) {
    detail::require_physical_cov(pt.cov, "mari_measure");
    return 1.0 / detail::error_variance(pt.cov, kind);
}

inline std::vector<double> mari_measure(const Trajectory& traj, SyncKind kind = SyncKind::AntiPhase) {
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& pt : traj.points) out.push_back(mari_value(pt, kind));
    return out;
}

/// Relative measure S_re = R_a R_b S_c with R = <q^2 + p^2>^(1/2) from unshifted moments.
inline SyncPoint relative_value(const TrajectoryPoint& pt, SyncKind kind = SyncKind::AntiPhase) {
    SyncPoint out;
    out.collisions = pt.collisions;
    out.S_c = mari_value(pt, kind);
    const auto& c = pt.cov;
    const double ra2 = c(0, 0) + c(1, 1) + pt.mean_qa * pt.mean_qa + pt.mean_pa * pt.mean_pa;
    const double rb2 = c(2, 2) + c(3, 3) + pt.mean_qb * pt.mean_qb + pt.mean_pb * pt.mean_pb;
    if (!(ra2 > 0.0) || !(rb2 > 0.0))
        fail(ErrorKind::DegenerateInput, "relative_measure: vanishing quadrature amplitude at L = " +
                                             std::to_string(pt.collisions));
    out.R_a = std::sqrt(ra2);
    out.R_b = std::sqrt(rb2);
    out.S_re = out.R_a * out.R_b * out.S_c;
    return out;
}

inline SyncSeries relative_measure(const Trajectory& traj, SyncKind kind = SyncKind::AntiPhase) {
    SyncSeries out;
    out.points.reserve(traj.size());
    for (const auto& pt : traj.points) out.points.push_back(relative_value(pt, kind));
    return out;
}

// ---------------------------------------------------------------------------
// Logarithmic negativity.

inline constexpr double kDiscriminantTolerance = 1e-12;

struct EntanglementPoint {
    int collisions = 0;
    double E_N = 0.0;
    double mu = 0.0;     // smallest symplectic eigenvalue of the partial transpose
    double Sigma = 0.0;  // det A + det B - 2 det C
};

struct EntanglementSeries {
    std::vector<EntanglementPoint> points;
};

inline EntanglementPoint negativity_details(const CovarianceMatrix& cov) {
    detail::require_physical_cov(cov, "log_negativity");
    const Eigen::Matrix2d a = cov.block(0, 0), b = cov.block(1, 1), c = cov.block(0, 1);
    const double sigma = a.determinant() + b.determinant() - 2.0 * c.determinant();
    const double det = cov.matrix().determinant();
    double disc = sigma * sigma - 4.0 * det;
    // Clamp rounding noise; the threshold is relative to the size of Sigma^2.
    if (disc < 0.0) {
        if (-disc < kDiscriminantTolerance * std::max(1.0, sigma * sigma))
            disc = 0.0;
        else
            fail(ErrorKind::NumericalDegeneracy,
                 "log_negativity: negative discriminant Sigma^2 - 4 det sigma = " + std::to_string(disc));
    }
    const double mu2 = (sigma - std::sqrt(disc)) / 2.0;
    if (!(mu2 > 0.0)) fail(ErrorKind::NumericalDegeneracy, "log_negativity: non-positive symplectic eigenvalue");
    EntanglementPoint out;
    out.mu = std::sqrt(mu2);
    out.Sigma = sigma;
    out.E_N = std::max(-std::log(2.0 * out.mu), 0.0);
    return out;
}

inline double log_negativity(const CovarianceMatrix& cov) { return negativity_details(cov).E_N; }

inline EntanglementSeries entanglement_series(const Trajectory& traj) {
    EntanglementSeries out;
    out.points.reserve(traj.size());
    for (const auto& pt : traj.points) {
        auto e = negativity_details(pt.cov);
        e.collisions = pt.collisions;
        out.points.push_back(e);
    }
    return out;
}

}  // namespace qcsync
