#pragma once

// Scattering matrices of the beam-splitter network: a_out = S a_in.
//
// Joint chains use the mode order [system_a, system_b, env_1, ..., env_L]; in the C++
// API these are 0-based indices 0, 1, 2, ..., L+1. Later collisions multiply from the
// left: S_J = S_L ... S_2 S_1.

#include <cmath>
#include <string>
#include <vector>

#include "qcsync/gaussian.hpp"

namespace qcsync {

inline constexpr double kAngleSlack = 1e-12;

struct ScatteringMatrix {
    CMatrix entries;
    std::vector<std::string> mode_labels;

    int dim() const { return static_cast<int>(entries.rows()); }

    /// Frobenius norm of S S^dag - I.
    double unitarity_error() const {
        return (entries * entries.adjoint() - CMatrix::Identity(dim(), dim())).norm();
    }
};

inline std::vector<std::string> chain_labels(int collisions) {
    std::vector<std::string> labels{"system_a", "system_b"};
    for (int j = 1; j <= collisions; ++j) labels.push_back("env_" + std::to_string(j));
    return labels;
}

inline void require_unit_angle(double theta, const std::string& name) {
    require(theta >= -kAngleSlack && theta <= kPi / 2 + kAngleSlack,
            name + " must lie in [0, pi/2], got " + std::to_string(theta));
}

struct ChainConfig {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta3 = 0.0;
    double phi_a = 0.0;
    double phi_b = 0.0;
    // Environment beam splitter, r_E = cos theta_E, t_E = sin theta_E. Full transmission
    // (theta_E = pi/2) routes a fresh environment mode into every collision.
    double theta_E = kPi / 2;
    int collisions = 1;
    bool markovian = true;

    /// Memory parameter eta = pi/2 - theta_E; eta = 0 is the Markovian point.
    double env_mixing() const { return markovian ? 0.0 : kPi / 2 - theta_E; }

    static double theta_E_from_mixing(double eta) { return kPi / 2 - eta; }

    void validate() const {
        require_unit_angle(theta1, "theta1");
        require_unit_angle(theta2, "theta2");
        require_unit_angle(theta3, "theta3");
        require_unit_angle(theta_E, "theta_E");
        require(std::isfinite(phi_a) && std::isfinite(phi_b), "phases must be finite");
        require(collisions >= 1, "collisions (L) must be >= 1, got " + std::to_string(collisions));
    }
};

/// Real two-mode mixer [[cos, sin], [-sin, cos]] on modes (i, j), identity elsewhere.
inline ScatteringMatrix beam_splitter(double theta, int mode_i, int mode_j, int dim) {
    require(dim >= 2, "beam_splitter: dim must be >= 2");
    require(mode_i >= 0 && mode_i < dim && mode_j >= 0 && mode_j < dim,
            "beam_splitter: mode index out of range");
    require(mode_i != mode_j, "beam_splitter: modes must differ");
    CMatrix s = CMatrix::Identity(dim, dim);
    const double c = std::cos(theta), t = std::sin(theta);
    s(mode_i, mode_i) = c;
    s(mode_i, mode_j) = t;
    s(mode_j, mode_i) = -t;
    s(mode_j, mode_j) = c;
    std::vector<std::string> labels;
    for (int k = 1; k <= dim; ++k) labels.push_back("a" + std::to_string(k));
    return {std::move(s), std::move(labels)};
}

/// Three-port mixer S3 S2 S1 over [a1, a2, a3]: S1, S3 mix (a1, a2), S2 mixes (a2, a3).
inline ScatteringMatrix tritter(double theta1, double theta2, double theta3) {
    require_unit_angle(theta1, "theta1");
    require_unit_angle(theta2, "theta2");
    require_unit_angle(theta3, "theta3");
    ScatteringMatrix out = beam_splitter(theta1, 0, 1, 3);
    out.entries = beam_splitter(theta3, 0, 1, 3).entries * beam_splitter(theta2, 1, 2, 3).entries * out.entries;
    return out;
}

namespace detail {

// Per-collision unitary over [system_a, system_b, env]: tritter in the system-environment
// mapping followed (on the right) by the phase shifters.
inline Eigen::Matrix3cd seim_block(const ChainConfig& cfg) {
    const auto mix = [](double theta, int i, int j) {
        Eigen::Matrix3cd s = Eigen::Matrix3cd::Identity();
        const double c = std::cos(theta), t = std::sin(theta);
        s(i, i) = c;
        s(i, j) = t;
        s(j, i) = -t;
        s(j, j) = c;
        return s;
    };
    Eigen::Matrix3cd phase = Eigen::Matrix3cd::Identity();
    phase(0, 0) = std::polar(1.0, cfg.phi_a);
    phase(1, 1) = std::polar(1.0, cfg.phi_b);
    return mix(cfg.theta3, 0, 2) * mix(cfg.theta2, 1, 2) * mix(cfg.theta1, 0, 2) * phase;
}

}  // namespace detail

inline ScatteringMatrix seim(const ChainConfig& cfg) {
    cfg.validate();
    return {CMatrix(detail::seim_block(cfg)), {"system_a", "system_b", "env"}};
}

/// Incremental builder of S_J(l) = S_l ... S_1 for l = 0, 1, ..., L.
///
/// Each collision touches three rows (system_a, system_b and the environment slot of
/// that collision); the environment mixer touches two. A step is O(L) work.
class ChainAccumulator {
public:
    explicit ChainAccumulator(const ChainConfig& cfg)
        : cfg_(cfg), block_(detail::seim_block(cfg)), eta_(cfg.env_mixing()) {
        cfg_.validate();
        const int dim = cfg_.collisions + 2;
        s_ = CMatrix::Identity(dim, dim);
    }

    int collisions_done() const { return done_; }
    int dim() const { return static_cast<int>(s_.rows()); }
    const CMatrix& matrix() const { return s_; }
    const ChainConfig& config() const { return cfg_; }

    void advance() {
        require(done_ < cfg_.collisions, "ChainAccumulator: all collisions already applied");
        const int j = ++done_;
        const int env = j + 1;  // 0-based slot of env_j
        if (!cfg_.markovian && j >= 2 && eta_ != 0.0) {
            const double c = std::cos(eta_), t = std::sin(eta_);
            const Eigen::RowVectorXcd prev = s_.row(env - 1);
            const Eigen::RowVectorXcd cur = s_.row(env);
            s_.row(env - 1) = c * prev + t * cur;
            s_.row(env) = -t * prev + c * cur;
        }
        Eigen::Matrix<cplx, 3, Eigen::Dynamic> rows(3, s_.cols());
        rows.row(0) = s_.row(0);
        rows.row(1) = s_.row(1);
        rows.row(2) = s_.row(env);
        rows = block_ * rows;
        s_.row(0) = rows.row(0);
        s_.row(1) = rows.row(1);
        s_.row(env) = rows.row(2);
    }

private:
    ChainConfig cfg_;
    Eigen::Matrix3cd block_;
    double eta_;
    CMatrix s_;
    int done_ = 0;
};

/// Joint (L+2)-mode scattering matrix of the full chain (sparse row updates).
inline ScatteringMatrix joint_scattering(const ChainConfig& cfg) {
    ChainAccumulator acc(cfg);
    while (acc.collisions_done() < cfg.collisions) acc.advance();
    return {acc.matrix(), chain_labels(cfg.collisions)};
}

/// Reference construction from dense embedded factors; O(L^4), for cross-checks.
inline ScatteringMatrix joint_scattering_dense(const ChainConfig& cfg) {
    cfg.validate();
    const int dim = cfg.collisions + 2;
    CMatrix phase = CMatrix::Identity(dim, dim);
    phase(0, 0) = std::polar(1.0, cfg.phi_a);
    phase(1, 1) = std::polar(1.0, cfg.phi_b);
    CMatrix total = CMatrix::Identity(dim, dim);
    for (int j = 1; j <= cfg.collisions; ++j) {
        const int env = j + 1;
        const CMatrix collision = beam_splitter(cfg.theta3, 0, env, dim).entries *
                                  beam_splitter(cfg.theta2, 1, env, dim).entries *
                                  beam_splitter(cfg.theta1, 0, env, dim).entries * phase;
        if (!cfg.markovian && j >= 2)
            total = collision * beam_splitter(cfg.env_mixing(), env - 1, env, dim).entries * total;
        else
            total = collision * total;
    }
    return {std::move(total), chain_labels(cfg.collisions)};
}

}  // namespace qcsync
