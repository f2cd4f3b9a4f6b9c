#pragma once

// Continuous-variable Gaussian states.
//
// Conventions: hbar = 1, q = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2), so the
// vacuum covariance is I/2. Quadratures are interleaved [q1, p1, q2, p2, ...].

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcsync/errors.hpp"

namespace qcsync {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

// Minimum eigenvalue of sigma + i Omega / 2 below which a covariance is rejected.
inline constexpr double kPhysicalityTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-12;

struct SymplecticForm {
    int n_modes = 0;
    Matrix matrix;
};

/// Block-diagonal Omega = (+)_j [[0, 1], [-1, 0]] for `n_modes` modes.
inline SymplecticForm symplectic_form(int n_modes) {
    require(n_modes >= 1, "symplectic_form: n_modes must be >= 1, got " + std::to_string(n_modes));
    Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
    for (int j = 0; j < n_modes; ++j) {
        omega(2 * j, 2 * j + 1) = 1.0;
        omega(2 * j + 1, 2 * j) = -1.0;
    }
    return {n_modes, std::move(omega)};
}

/// Real symmetric 2N x 2N quadrature covariance, interleaved ordering.
class CovarianceMatrix {
public:
    CovarianceMatrix() = default;

    explicit CovarianceMatrix(Matrix entries) : entries_(std::move(entries)) {
        require(entries_.rows() == entries_.cols(), "covariance must be square");
        require(entries_.rows() > 0 && entries_.rows() % 2 == 0,
                "covariance dimension must be a positive even number");
        const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
        const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
        require(asym <= kSymmetryTolerance * scale,
                "covariance is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    }

    static CovarianceMatrix vacuum(int n_modes) {
        require(n_modes >= 1, "vacuum: n_modes must be >= 1");
        return CovarianceMatrix(Matrix::Identity(2 * n_modes, 2 * n_modes) * 0.5);
    }

    int n_modes() const { return static_cast<int>(entries_.rows() / 2); }
    const Matrix& matrix() const { return entries_; }
    double operator()(int i, int j) const { return entries_(i, j); }

    /// 2x2 block coupling modes i and j (0-based).
    Eigen::Matrix2d block(int i, int j) const { return entries_.block<2, 2>(2 * i, 2 * j); }

private:
    Matrix entries_;
};

struct PhysicalityReport {
    bool physical = false;
    double min_eigenvalue = 0.0;
};

/// Robertson-Schroedinger check: smallest eigenvalue of the Hermitian sigma + i Omega/2.
inline PhysicalityReport is_physical(const CovarianceMatrix& cov) {
    const auto omega = symplectic_form(cov.n_modes()).matrix;
    const CMatrix h = cov.matrix().cast<cplx>() + cplx(0.0, 0.5) * omega.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) fail(ErrorKind::Numerical, "is_physical: eigensolver failed");
    const double min_eig = solver.eigenvalues().minCoeff();
    return {min_eig >= -kPhysicalityTolerance, min_eig};
}

class GaussianState {
public:
    GaussianState(Vector mean, CovarianceMatrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
        require(mean_.size() == 2 * cov_.n_modes(), "mean length must equal 2 x n_modes");
        const auto report = is_physical(cov_);
        require(report.physical, "covariance violates the uncertainty relation (min eigenvalue " +
                                     std::to_string(report.min_eigenvalue) + ")");
    }

    static GaussianState vacuum(int n_modes) {
        return {Vector::Zero(2 * n_modes), CovarianceMatrix::vacuum(n_modes)};
    }

    int n_modes() const { return cov_.n_modes(); }
    const Vector& mean() const { return mean_; }
    const CovarianceMatrix& cov() const { return cov_; }

    /// Single-mode marginal (mean and 2x2 block) of mode `k`.
    GaussianState mode(int k) const {
        require(k >= 0 && k < n_modes(), "mode index out of range");
        return {mean_.segment<2>(2 * k), CovarianceMatrix(Matrix(cov_.block(k, k)))};
    }

private:
    Vector mean_;
    CovarianceMatrix cov_;
};

struct PhasePoint {
    double q = 0.0;
    double p = 0.0;
};

/// Single-mode Gaussian Wigner function, normalized to unit phase-space integral
/// (vacuum peak 1/pi in this convention).
inline std::vector<double> wigner(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                                  std::span<const PhasePoint> points) {
    const double det = cov.determinant();
    if (!(det > 1e-300) || !std::isfinite(det))
        fail(ErrorKind::NumericalDegeneracy, "wigner: covariance is singular (det = " + std::to_string(det) + ")");
    const Eigen::Matrix2d inv = cov.inverse();
    const double norm = 1.0 / (2.0 * kPi * std::sqrt(det));
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& pt : points) {
        const Eigen::Vector2d d(pt.q - mean(0), pt.p - mean(1));
        out.push_back(norm * std::exp(-0.5 * d.dot(inv * d)));
    }
    return out;
}

inline std::vector<double> wigner(const GaussianState& state, std::span<const PhasePoint> points) {
    require(state.n_modes() == 1, "wigner: state must have exactly one mode");
    return wigner(Eigen::Vector2d(state.mean()), Eigen::Matrix2d(state.cov().matrix()), points);
}

struct WignerGrid {
    int points_per_axis = 0;
    double half_width = 0.0;
    std::vector<PhasePoint> points;  // row-major: q outer, p inner
};

/// Square grid spanning +-(|mean| + 4 sqrt(max diag sigma)) on both axes.
inline WignerGrid default_wigner_grid(const GaussianState& state, int points_per_axis = 201) {
    require(state.n_modes() == 1, "default_wigner_grid: state must have exactly one mode");
    require(points_per_axis >= 2, "default_wigner_grid: need at least 2 points per axis");
    WignerGrid grid;
    grid.points_per_axis = points_per_axis;
    grid.half_width = state.mean().norm() + 4.0 * std::sqrt(state.cov().matrix().diagonal().maxCoeff());
    grid.points.reserve(static_cast<std::size_t>(points_per_axis) * points_per_axis);
    const double step = 2.0 * grid.half_width / (points_per_axis - 1);
    for (int i = 0; i < points_per_axis; ++i)
        for (int j = 0; j < points_per_axis; ++j)
            grid.points.push_back({-grid.half_width + i * step, -grid.half_width + j * step});
    return grid;
}

}  // namespace qcsync
