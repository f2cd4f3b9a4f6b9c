#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qcsync;
using namespace qcsync::testing;

namespace {

// Fig. 4 couplings: theta1 = theta3 = pi/8, theta2 = pi/4.
const JumpOperator& fig4_jump() {
    static const JumpOperator o = jump_operator(kPi / 8, kPi / 4, kPi / 8, 5);
    return o;
}

const Spectrum& fig4a_spectrum() {
    static const Spectrum s = spectrum(adjoint_liouvillian(kPi / 8, kPi / 4, fig4_jump()));
    return s;
}

const Spectrum& fig4c_spectrum() {
    static const Spectrum s = spectrum(adjoint_liouvillian(kPi / 8, kPi / 8, fig4_jump()));
    return s;
}

FockOperator projector(const CVector& psi, int n_max) { return {n_max, psi * psi.adjoint()}; }

double quadrature_q(const CMatrix& rho, const CMatrix& a) {
    return std::sqrt(2.0) * expectation(rho, a).real();
}

}  // namespace

TEST(Operators, Ladder) {
    const CMatrix a = ladder(3);
    EXPECT_EQ(a(0, 1), cplx(1.0));
    EXPECT_NEAR(a(1, 2).real(), std::sqrt(2.0), 1e-15);
    EXPECT_EQ((a.cwiseAbs().array() > 0).count(), 2);
}

TEST(Operators, Commutators) {
    const auto ops = build_operators(4);
    const CMatrix& a = ops.a_a.entries;
    const CMatrix& b = ops.a_b.entries;
    EXPECT_EQ((a * b - b * a).norm(), 0.0);
    const CMatrix ca = ladder(4) * ladder(4).adjoint() - ladder(4).adjoint() * ladder(4);
    EXPECT_LT((ca.topLeftCorner(3, 3) - CMatrix::Identity(3, 3)).norm(), 1e-14);
    EXPECT_NEAR(ca(3, 3).real(), -3.0, 1e-14);
    EXPECT_LT((ops.N_a.entries - a.adjoint() * a).norm(), 1e-15);
}

TEST(Operators, CutoffValidated) { EXPECT_THROW(build_operators(1), Error); }

TEST(JumpOperator, Fig4Couplings) {
    const auto ops = build_operators(5);
    const auto& o = fig4_jump();
    EXPECT_NEAR(o.theta_tilde_a, kPi / 4, 1e-15);
    EXPECT_NEAR(o.theta_tilde_b, kPi / 4, 1e-15);
    EXPECT_LT((o.op.entries - (kPi / 4) * (ops.a_a.entries + ops.a_b.entries)).norm(), 1e-14);
}

TEST(JumpOperator, ZeroAnglesNoDissipation) { EXPECT_EQ(jump_operator(0, 0, 0, 3).op.entries.norm(), 0.0); }

TEST(JumpOperator, VacuumIsDark) {
    CVector vac = CVector::Zero(25);
    vac(0) = 1.0;
    EXPECT_EQ((fig4_jump().op.entries * vac).norm(), 0.0);
}

TEST(Liouvillian, IdentityFixedPoint) {
    for (double pb : {kPi / 4, kPi / 6, kPi / 8})
        EXPECT_LT(identity_residual(adjoint_liouvillian(kPi / 8, pb, fig4_jump())), 1e-10);
    Rng rng(1);
    const auto o = jump_operator(uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1), 4);
    EXPECT_LT(identity_residual(adjoint_liouvillian(0.3, -1.1, o)), 1e-10);
}

TEST(Liouvillian, DimensionMismatch) {
    FockOperator bad{3, CMatrix::Zero(4, 4)};
    EXPECT_THROW(adjoint_liouvillian(0.1, 0.2, bad), Error);
    EXPECT_THROW(adjoint_liouvillian(0.1, 0.2, fig4_jump().op, 4), Error);
}

TEST(Liouvillian, VectorizationConvention) {
    // (A (x) B) vec(X) = vec(A X B^T) with row-major vec.
    Rng rng(2);
    const CMatrix a = random_unitary(rng, 3), b = random_unitary(rng, 3), x = random_unitary(rng, 3);
    const CVector lhs = Eigen::kroneckerProduct(a, b).eval() * vectorize(x);
    EXPECT_LT((lhs - vectorize(a * x * b.transpose())).norm(), 1e-13);
    EXPECT_EQ(unvectorize(vectorize(x), 3), x);
}

TEST(Spectrum, ClosedDynamics) {
    const int n = 3;
    const double pa = 0.3, pb = 0.7;
    const auto s = spectrum(adjoint_liouvillian(pa, pb, jump_operator(0, 0, 0, n)));
    EXPECT_FALSE(s.gap_defined);
    EXPECT_EQ(s.gap, 0.0);
    EXPECT_EQ(s.eigenvalues.size(), 81u);
    for (auto c : s.eigenvalues) {
        EXPECT_LT(std::abs(c.real()), 1e-12);
        // Im c = phi_a dn + phi_b dm for some dn, dm in (-n, n).
        bool found = false;
        for (int dn = -(n - 1); dn < n; ++dn)
            for (int dm = -(n - 1); dm < n; ++dm) found |= std::abs(c.imag() - (pa * dn + pb * dm)) < 1e-10;
        EXPECT_TRUE(found) << c;
    }
}

TEST(Spectrum, Fig4aDecays) {
    const auto& s = fig4a_spectrum();
    EXPECT_EQ(s.eigenvalues.size(), 625u);
    EXPECT_TRUE(s.gap_defined);
    EXPECT_GT(s.gap, 0.0);
    EXPECT_LE(s.eigenvalues.front().real(), 1e-9);
    // Steady state: eigenvalue zero.
    double closest = HUGE_VAL;
    for (auto c : s.eigenvalues) closest = std::min(closest, std::abs(c));
    EXPECT_LT(closest, 1e-10);
}

TEST(Spectrum, Sorted) {
    const auto& e = fig4a_spectrum().eigenvalues;
    for (std::size_t i = 1; i < e.size(); ++i) EXPECT_GE(e[i - 1].real(), e[i].real());
}

TEST(Spectrum, ConjugationSymmetry) {
    const auto& e = fig4a_spectrum().eigenvalues;
    for (auto c : e) {
        double best = HUGE_VAL;
        for (auto d : e) best = std::min(best, std::abs(d - std::conj(c)));
        EXPECT_LT(best, 1e-9) << c;
    }
}

TEST(Spectrum, EqualPhasesPersist) {
    const auto& s = fig4c_spectrum();
    EXPECT_GT(s.pure_imaginary_count, 0);
    EXPECT_TRUE(s.persistent());
    EXPECT_LE(s.eigenvalues.front().real(), 1e-9);
}

TEST(Spectrum, UnequalPhasesOnlyUnitaryLeftovers) {
    // With phi_a != phi_b nothing oscillates forever except states outside the dissipator's reach.
    EXPECT_EQ(fig4a_spectrum().pure_imaginary_count, 0);
}

TEST(FitDecay, SyntheticEnvelope) {
    std::vector<double> s;
    for (int l = 0; l <= 200; ++l) s.push_back(10.0 * std::exp(-0.1 * l) * std::cos(0.4 * l));
    const auto fit = fit_decay(std::span<const double>(s));
    EXPECT_NEAR(fit.rate, 0.100, 0.002);
    EXPECT_GT(fit.r_squared, 0.999);
}

TEST(FitDecay, InsufficientExtrema) {
    std::vector<double> s;
    for (int l = 0; l < 20; ++l) s.push_back(std::exp(-0.1 * l) * std::cos(0.4 * l));
    try {
        fit_decay(std::span<const double>(s));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
    }
}

TEST(OscillationFrequency, PhaseQuarterPi) {
    ChainConfig c;
    c.theta1 = c.theta3 = kPi / 8;
    c.theta2 = kPi / 4;
    c.phi_a = c.phi_b = kPi / 4;
    c.collisions = 200;
    SystemModeSpec s{0.0, 0.0, 0.0, cplx(1.0)};
    const auto traj = propagate(c, s, {}, {});
    EXPECT_NEAR(oscillation_frequency(traj, 40).period, 8.0, 0.5);
}

TEST(OscillationFrequency, ConstantSignal) {
    std::vector<double> s(50, 1.0);
    EXPECT_THROW(oscillation_frequency(std::span<const double>(s)), Error);
}

TEST(DarkState, OneExcitation) {
    const double ta = 0.7, tb = 0.4;
    FockCoefficients c{{{1, 0}, tb}, {{0, 1}, -ta}};
    const auto rep = dark_state_check(c, ta, tb);
    EXPECT_TRUE(rep.dark);
    EXPECT_LT(rep.residual, 1e-14);
}

TEST(DarkState, TwoExcitation) {
    const double ta = 0.7, tb = 0.4;
    FockCoefficients c{{{2, 0}, 1.0}, {{1, 1}, -std::sqrt(2.0) * ta / tb}, {{0, 2}, ta * ta / (tb * tb)}};
    EXPECT_TRUE(dark_state_check(c, ta, tb).dark);
    const auto built = dark_state_in_shell(2, ta, tb);
    const double scale = built.at({2, 0}).real();
    EXPECT_NEAR(built.at({1, 1}).real() / scale, -std::sqrt(2.0) * ta / tb, 1e-12);
    EXPECT_NEAR(built.at({0, 2}).real() / scale, ta * ta / (tb * tb), 1e-12);
}

TEST(DarkState, HigherShells) {
    for (int k = 1; k <= 4; ++k) {
        const auto c = dark_state_in_shell(k, kPi / 4, kPi / 4);
        const auto rep = dark_state_check(c, kPi / 4, kPi / 4, kPi / 8, kPi / 8);
        EXPECT_TRUE(rep.dark) << k;
        EXPECT_TRUE(rep.decoherence_free()) << k;
        // Against the truncated jump operator as well.
        EXPECT_LT((fig4_jump().op.entries * to_state_vector(c, 5)).norm(), 1e-12);
    }
}

TEST(DarkState, NotDark) {
    const auto rep = dark_state_check({{{1, 0}, 1.0}}, 0.5, 0.5);
    EXPECT_FALSE(rep.dark);
    EXPECT_NEAR(rep.residual, 0.5, 1e-15);
}

TEST(DarkState, HamiltonianEigenstateNeedsEqualPhases) {
    const auto c = dark_state_in_shell(1, 0.5, 0.5);
    EXPECT_TRUE(dark_state_check(c, 0.5, 0.5, 0.3, 0.3).hamiltonian_eigenstate);
    EXPECT_FALSE(dark_state_check(c, 0.5, 0.5, 0.3, 0.4).hamiltonian_eigenstate);
}

TEST(DarkState, EmptyMap) { EXPECT_THROW(dark_state_check({}, 0.5, 0.5), Error); }

TEST(Lindblad, VacuumStationary) {
    CVector vac = CVector::Zero(25);
    vac(0) = 1.0;
    const auto series = lindblad_evolve(projector(vac, 5), kPi / 8, kPi / 4, fig4_jump().op, 20.0, 0.05);
    for (const auto& rho : series.states) EXPECT_LT((rho - series.states.front()).norm(), 1e-12);
    EXPECT_EQ(series.times.size(), 21u);
}

TEST(Lindblad, DarkStatesDecoherenceFree) {
    const auto& o = fig4_jump();
    for (int k = 1; k <= 2; ++k) {
        const CVector psi = to_state_vector(dark_state_in_shell(k, o.theta_tilde_a, o.theta_tilde_b), 5);
        const auto series = lindblad_evolve(projector(psi, 5), kPi / 8, kPi / 8, o.op, 100.0, 0.05);
        for (const auto& rho : series.states) {
            EXPECT_NEAR(expectation(rho, psi * psi.adjoint()).real(), 1.0, 1e-6);
            EXPECT_NEAR(std::abs(rho.trace()), 1.0, 1e-8);
        }
    }
}

TEST(Lindblad, StepSizeGuard) {
    const CVector psi = coherent_product_state(1.0, 0.5, 5);
    try {
        lindblad_evolve(projector(psi, 5), 0.0, 0.0, jump_operator(1.5, 1.5, 1.5, 5).op, 20.0, 2.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StepSize);
    }
}

TEST(Lindblad, RejectsBadInitialState) {
    FockOperator rho{5, CMatrix::Identity(25, 25)};
    EXPECT_THROW(lindblad_evolve(rho, 0, 0, fig4_jump().op, 1.0, 0.1), Error);
}

TEST(Lindblad, IntegratorDecayMatchesGap) {
    const int n = 5;
    const auto& o = fig4_jump();
    const auto ops = build_operators(n);
    const auto series =
        lindblad_evolve(projector(coherent_product_state(0.3, 0.0, n), n), kPi / 8, kPi / 4, o.op, 120.0, 0.05);
    std::vector<double> q;
    for (const auto& rho : series.states) q.push_back(quadrature_q(rho, ops.a_a.entries));
    const auto fit = fit_decay(std::span<const double>(q).subspan(20));
    const double gap = fig4a_spectrum().gap;
    EXPECT_NEAR(fit.rate / gap, 1.0, 0.10);
}

TEST(Lindblad, SmallAmplitudeMatchesCollisionModel) {
    // Weak coupling, where the first-order effective generator is accurate.
    const int n = 8;
    ChainConfig c;
    c.theta1 = c.theta3 = kPi / 40;
    c.theta2 = kPi / 20;
    c.phi_a = kPi / 8;
    c.phi_b = kPi / 6;
    c.collisions = 100;
    SystemModeSpec a{0.0, 0.0, 0.0, cplx(0.5)};
    const auto traj = propagate(c, a, {}, {});
    const auto o = jump_operator(c.theta1, c.theta2, c.theta3, n);
    const auto ops = build_operators(n);
    const auto series = lindblad_evolve(projector(coherent_product_state(0.5, 0.0, n), n), c.phi_a, c.phi_b, o.op,
                                        100.0, 0.05);
    double num = 0.0, den = 0.0;
    for (int l = 0; l <= 100; ++l) {
        const auto& rho = series.states[static_cast<std::size_t>(l)];
        for (auto [me, qcm] : {std::pair{quadrature_q(rho, ops.a_a.entries), traj[l].mean_qa},
                               std::pair{quadrature_q(rho, ops.a_b.entries), traj[l].mean_qb}}) {
            num += (me - qcm) * (me - qcm);
            den += qcm * qcm;
        }
    }
    EXPECT_LT(std::sqrt(num / den), 0.05);
}

TEST(SpinModel, SingletStationary) {
    const auto lm = spin_liouvillian(0.4, 0.4, 0.6, 0.6);
    EXPECT_EQ(lm.dim, 16);
    CVector singlet = CVector::Zero(4);
    singlet(1) = 1.0 / std::sqrt(2.0);
    singlet(2) = -1.0 / std::sqrt(2.0);
    const CMatrix rho = singlet * singlet.adjoint();
    EXPECT_LT((lm.entries * vectorize(rho)).norm(), 1e-14);
}

TEST(SpinModel, SteadyManifold) {
    const auto s = spectrum(spin_liouvillian(0.4, 0.4, 0.6, 0.6));
    int zeros = 0;
    for (auto c : s.eigenvalues) zeros += std::abs(c) < 1e-10;
    EXPECT_GE(zeros, 2);
}

TEST(SpinModel, NoDissipationPurelyImaginary) {
    const auto s = spectrum(spin_liouvillian(0.4, 0.9, 0.0, 0.0));
    for (auto c : s.eigenvalues) EXPECT_LT(std::abs(c.real()), 1e-12);
    EXPECT_FALSE(s.gap_defined);
}

TEST(SpinModel, TracePreserving) {
    // Schroedinger-picture generator: vec(I)^T-row-trace functional is annihilated.
    const auto lm = spin_liouvillian(0.2, 0.5, 0.3, 0.8);
    const CVector tr = vectorize(CMatrix::Identity(4, 4));
    EXPECT_LT((tr.transpose() * lm.entries).norm(), 1e-14);
}
