#pragma once

// Stroboscopic propagation of the two system modes through the collision chain.
//
// The closed-form path evaluates the reduced 4x4 covariance directly from the entries of
// M = S_J^{-1} = S_J^dag; the symplectic oracle instead evolves the full joint Gaussian
// state collision by collision and traces out the environment.

#include <cmath>
#include <complex>
#include <sstream>
#include <utility>
#include <vector>

#include "qcsync/gaussian.hpp"
#include "qcsync/optical_network.hpp"

namespace qcsync {

/// Displaced squeezed thermal input D(alpha) S(xi, varphi) rho_th(n_th) S^dag D^dag.
struct SystemModeSpec {
    double n_th = 0.0;
    double xi = 0.0;
    double varphi = 0.0;
    cplx alpha{0.0, 0.0};

    void validate(const std::string& name) const {
        require(n_th >= 0.0 && std::isfinite(n_th), name + ".n_th must be >= 0");
        require(xi >= 0.0 && std::isfinite(xi), name + ".xi must be >= 0");
        require(std::isfinite(varphi), name + ".varphi must be finite");
        require(std::isfinite(alpha.real()) && std::isfinite(alpha.imag()), name + ".alpha must be finite");
    }

    // Symmetrically ordered input moments: <{da^dag, da}>/2 and <da^2>.
    double symmetric_number() const { return (n_th + 0.5) * std::cosh(xi); }
    cplx squeeze_moment() const { return (n_th + 0.5) * std::sinh(xi) * std::polar(1.0, varphi); }
};

/// Coherent input shared by every environment mode.
struct EnvModeSpec {
    cplx alpha_E{0.0, 0.0};
};

struct TrajectoryPoint {
    int collisions = 0;
    double mean_qa = 0.0;
    double mean_pa = 0.0;
    double mean_qb = 0.0;
    double mean_pb = 0.0;
    CovarianceMatrix cov;

    cplx amplitude_a() const { return cplx(mean_qa, mean_pa) / std::sqrt(2.0); }
    cplx amplitude_b() const { return cplx(mean_qb, mean_pb) / std::sqrt(2.0); }
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;  // collision counts 0 .. L

    std::size_t size() const { return points.size(); }
    const TrajectoryPoint& operator[](std::size_t i) const { return points[i]; }
    const TrajectoryPoint& back() const { return points.back(); }
};

namespace detail {

inline constexpr double kRowUnitarityTolerance = 1e-9;

// Appendix-style closed form for the two system output modes. `row_a` and `row_b` are the
// first two rows of S_J, so M_{n,1} = conj(row_a[n]) and M_{n,2} = conj(row_b[n]).
inline CovarianceMatrix reduced_covariance_from_rows(const Eigen::Ref<const Eigen::RowVectorXcd>& row_a,
                                                     const Eigen::Ref<const Eigen::RowVectorXcd>& row_b,
                                                     const SystemModeSpec& sa, const SystemModeSpec& sb) {
    const double na = sa.n_th + 0.5, nb = sb.n_th + 0.5;
    const cplx m11 = std::conj(row_a(0)), m21 = std::conj(row_a(1));
    const cplx m12 = std::conj(row_b(0)), m22 = std::conj(row_b(1));

    // Squeezing projections of a complex coefficient z for inputs a and b.
    const auto sq_re = [](double nth, const SystemModeSpec& s, cplx z) {
        return nth * std::sinh(s.xi) * (std::cos(s.varphi) * z.real() + std::sin(s.varphi) * z.imag());
    };
    const auto sq_im = [](double nth, const SystemModeSpec& s, cplx z) {
        return nth * std::sinh(s.xi) * (std::sin(s.varphi) * z.real() - std::cos(s.varphi) * z.imag());
    };

    const double m_rest_1 = (1.0 - std::norm(m11) - std::norm(m21)) / 2.0;
    const double m_rest_2 = (1.0 - std::norm(m12) - std::norm(m22)) / 2.0;
    cplx m_sum{0.0, 0.0};
    for (Eigen::Index j = 2; j < row_a.size(); ++j) m_sum += row_a(j) * std::conj(row_b(j));
    m_sum *= 0.5;  // (1/2) sum_{j>=3} M*_{j,1} M_{j,2}

    const double ca = na * std::cosh(sa.xi), cb = nb * std::cosh(sb.xi);

    const double sq_a11 = sq_re(na, sa, m11 * m11) + sq_re(nb, sb, m21 * m21);
    const double th_a = ca * std::norm(m11) + cb * std::norm(m21) + m_rest_1;
    const double a11 = sq_a11 + th_a;
    const double a22 = -sq_a11 + th_a;
    const double a12 = sq_im(na, sa, m11 * m11) + sq_im(nb, sb, m21 * m21);

    const double sq_b11 = sq_re(na, sa, m12 * m12) + sq_re(nb, sb, m22 * m22);
    const double th_b = ca * std::norm(m12) + cb * std::norm(m22) + m_rest_2;
    const double b11 = sq_b11 + th_b;
    const double b22 = -sq_b11 + th_b;
    const double b12 = sq_im(na, sa, m12 * m12) + sq_im(nb, sb, m22 * m22);

    const double sq_c11 = sq_re(na, sa, m11 * m12) + sq_re(nb, sb, m21 * m22);
    const cplx cross = ca * std::conj(m11) * m12 + cb * std::conj(m21) * m22 + m_sum;
    const double c11 = sq_c11 + cross.real();
    const double c22 = -sq_c11 + cross.real();
    const double c_sq_im = sq_im(na, sa, m11 * m12) + sq_im(nb, sb, m21 * m22);
    // Cov(q_a, p_b) and Cov(p_a, q_b) differ by the imaginary part of the thermal cross term.
    const double c12 = c_sq_im - cross.imag();
    const double c21 = c_sq_im + cross.imag();

    Eigen::Matrix4d s;
    s << a11, a12, c11, c12,
         a12, a22, c21, c22,
         c11, c21, b11, b12,
         c12, c22, b12, b22;
    return CovarianceMatrix(Matrix(s));
}

inline void require_orthonormal_rows(const Eigen::Ref<const Eigen::RowVectorXcd>& row_a,
                                     const Eigen::Ref<const Eigen::RowVectorXcd>& row_b) {
    const double err = std::abs(row_a.squaredNorm() - 1.0) + std::abs(row_b.squaredNorm() - 1.0) +
                       std::abs(row_a.dot(row_b));
    require(err < kRowUnitarityTolerance, "scattering rows are not orthonormal (error " + std::to_string(err) + ")");
}

inline CVector input_means(int dim, const SystemModeSpec& sa, const SystemModeSpec& sb, const EnvModeSpec& env) {
    CVector m = CVector::Constant(dim, env.alpha_E);
    m(0) = sa.alpha;
    m(1) = sb.alpha;
    return m;
}

inline TrajectoryPoint make_point(int collisions, cplx mean_a, cplx mean_b, CovarianceMatrix cov) {
    const double r2 = std::sqrt(2.0);
    return {collisions, r2 * mean_a.real(), r2 * mean_a.imag(), r2 * mean_b.real(), r2 * mean_b.imag(),
            std::move(cov)};
}

inline void require_physical_point(const TrajectoryPoint& pt, const char* who) {
    const auto report = is_physical(pt.cov);
    if (!report.physical) {
        std::ostringstream os;
        os << who << ": propagated covariance is not physical at L = " << pt.collisions
           << " (min eigenvalue of sigma + i Omega/2 = " << report.min_eigenvalue << ")\n"
           << pt.cov.matrix();
        fail(ErrorKind::InternalConsistency, os.str());
    }
}

}  // namespace detail

/// Reduced covariance of the two system output modes for a joint scattering matrix.
inline CovarianceMatrix reduced_covariance(const ScatteringMatrix& sj, const SystemModeSpec& spec_a,
                                           const SystemModeSpec& spec_b, const EnvModeSpec& /*env*/) {
    require(sj.dim() >= 2, "reduced_covariance: need at least the two system modes");
    const double err = sj.unitarity_error();
    require(err < 1e-9, "reduced_covariance: scattering matrix is not unitary (||SS^dag - I|| = " +
                            std::to_string(err) + ")");
    // Environment inputs are coherent states: displacement does not enter second moments.
    return detail::reduced_covariance_from_rows(sj.entries.row(0), sj.entries.row(1), spec_a, spec_b);
}

/// Output means <a_{S,a}>, <a_{S,b}> = first two entries of S_J m_in.
inline std::pair<cplx, cplx> first_moments(const ScatteringMatrix& sj, const CVector& means_in) {
    require(means_in.size() == sj.dim(), "first_moments: means vector length " + std::to_string(means_in.size()) +
                                             " does not match scattering dimension " + std::to_string(sj.dim()));
    return {(sj.entries.row(0) * means_in)(0), (sj.entries.row(1) * means_in)(0)};
}

/// Trajectory of means and reduced covariance for collision counts 0 .. L.
inline Trajectory propagate(const ChainConfig& cfg, const SystemModeSpec& spec_a, const SystemModeSpec& spec_b,
                            const EnvModeSpec& env) {
    cfg.validate();
    spec_a.validate("system_a");
    spec_b.validate("system_b");
    ChainAccumulator acc(cfg);
    const CVector means_in = detail::input_means(acc.dim(), spec_a, spec_b, env);

    Trajectory traj;
    traj.points.reserve(static_cast<std::size_t>(cfg.collisions) + 1);
    for (;;) {
        const CMatrix& s = acc.matrix();
        detail::require_orthonormal_rows(s.row(0), s.row(1));
        const cplx ma = (s.row(0) * means_in)(0);
        const cplx mb = (s.row(1) * means_in)(0);
        auto cov = detail::reduced_covariance_from_rows(s.row(0), s.row(1), spec_a, spec_b);
        traj.points.push_back(detail::make_point(acc.collisions_done(), ma, mb, std::move(cov)));
        detail::require_physical_point(traj.points.back(), "propagate");
        if (acc.collisions_done() == cfg.collisions) break;
        acc.advance();
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Independent joint-state route.

inline constexpr int kOracleMaxCollisions = 100;

/// Real quadrature transform of a passive complex mode map, interleaved layout.
inline Matrix real_symplectic(const CMatrix& s) {
    const Eigen::Index n = s.rows();
    Matrix out(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const double re = s(i, k).real(), im = s(i, k).imag();
            out(2 * i, 2 * k) = re;
            out(2 * i, 2 * k + 1) = -im;
            out(2 * i + 1, 2 * k) = im;
            out(2 * i + 1, 2 * k + 1) = re;
        }
    }
    return out;
}

/// Single-mode covariance n_th R(varphi/2) diag(e^xi, e^-xi) R(varphi/2)^T.
inline Eigen::Matrix2d input_mode_covariance(const SystemModeSpec& s) {
    const double c = std::cos(s.varphi / 2), t = std::sin(s.varphi / 2);
    Eigen::Matrix2d rot;
    rot << c, -t, t, c;
    const Eigen::Matrix2d diag = Eigen::Vector2d(std::exp(s.xi), std::exp(-s.xi)).asDiagonal();
    Eigen::Matrix2d out = (s.n_th + 0.5) * rot * diag * rot.transpose();
    out(1, 0) = out(0, 1);
    return out;
}

/// Full (L+2)-mode Gaussian input state.
inline GaussianState joint_input_state(int collisions, const SystemModeSpec& sa, const SystemModeSpec& sb,
                                       const EnvModeSpec& env) {
    const int n = collisions + 2;
    Vector mean(2 * n);
    Matrix cov = Matrix::Identity(2 * n, 2 * n) * 0.5;
    const auto put = [&](int k, cplx alpha) {
        mean(2 * k) = std::sqrt(2.0) * alpha.real();
        mean(2 * k + 1) = std::sqrt(2.0) * alpha.imag();
    };
    put(0, sa.alpha);
    put(1, sb.alpha);
    for (int k = 2; k < n; ++k) put(k, env.alpha_E);
    cov.block<2, 2>(0, 0) = input_mode_covariance(sa);
    cov.block<2, 2>(2, 2) = input_mode_covariance(sb);
    return {std::move(mean), CovarianceMatrix(std::move(cov))};
}

/// Joint Gaussian states after 0 .. L collisions, evolved one dense collision at a time.
inline std::vector<GaussianState> joint_oracle_states(const ChainConfig& cfg, const SystemModeSpec& spec_a,
                                                      const SystemModeSpec& spec_b, const EnvModeSpec& env) {
    cfg.validate();
    require(cfg.collisions <= kOracleMaxCollisions,
            "symplectic oracle is capped at L = " + std::to_string(kOracleMaxCollisions));
    const int dim = cfg.collisions + 2;
    GaussianState state = joint_input_state(cfg.collisions, spec_a, spec_b, env);
    Vector mean = state.mean();
    Matrix cov = state.cov().matrix();

    CMatrix phase = CMatrix::Identity(dim, dim);
    phase(0, 0) = std::polar(1.0, cfg.phi_a);
    phase(1, 1) = std::polar(1.0, cfg.phi_b);

    std::vector<GaussianState> states;
    states.push_back(std::move(state));
    for (int j = 1; j <= cfg.collisions; ++j) {
        const int slot = j + 1;
        if (!cfg.markovian && j >= 2) {
            const Matrix mix = real_symplectic(beam_splitter(cfg.env_mixing(), slot - 1, slot, dim).entries);
            mean = mix * mean;
            cov = mix * cov * mix.transpose();
        }
        const CMatrix collision = beam_splitter(cfg.theta3, 0, slot, dim).entries *
                                  beam_splitter(cfg.theta2, 1, slot, dim).entries *
                                  beam_splitter(cfg.theta1, 0, slot, dim).entries * phase;
        const Matrix sr = real_symplectic(collision);
        mean = sr * mean;
        cov = sr * cov * sr.transpose();
        cov = 0.5 * (cov + cov.transpose());
        states.emplace_back(mean, CovarianceMatrix(cov));
    }
    return states;
}

/// Same observable as `propagate`, computed from the joint-state route (L <= 100).
inline Trajectory symplectic_oracle(const ChainConfig& cfg, const SystemModeSpec& spec_a,
                                    const SystemModeSpec& spec_b, const EnvModeSpec& env) {
    const auto states = joint_oracle_states(cfg, spec_a, spec_b, env);
    Trajectory traj;
    for (std::size_t l = 0; l < states.size(); ++l) {
        const auto& st = states[l];
        TrajectoryPoint pt;
        pt.collisions = static_cast<int>(l);
        pt.mean_qa = st.mean()(0);
        pt.mean_pa = st.mean()(1);
        pt.mean_qb = st.mean()(2);
        pt.mean_pb = st.mean()(3);
        pt.cov = CovarianceMatrix(Matrix(st.cov().matrix().topLeftCorner(4, 4)));
        traj.points.push_back(std::move(pt));
    }
    return traj;
}

/// Total mean photon number sum_k <a_k^dag a_k> of a Gaussian state.
inline double total_photon_number(const GaussianState& st) {
    return 0.5 * (st.cov().matrix().trace() + st.mean().squaredNorm()) - 0.5 * st.n_modes();
}

}  // namespace qcsync
