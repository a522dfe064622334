#include "geophase/estimate.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace geophase;

namespace {

Matrix pure(const Vector& psi) { return psi * psi.adjoint(); }

Vector qubit(cplx a, cplx b) {
    Vector v(2);
    v << a, b;
    return v / v.norm();
}

DensityOperator random_qubit_state(std::mt19937_64& rng, bool mixed) {
    std::normal_distribution<double> g;
    double x = g(rng), y = g(rng), z = g(rng);
    const double len = std::sqrt(x * x + y * y + z * z);
    const double r = mixed ? std::uniform_real_distribution<double>(0.0, 0.999)(rng) : 1.0;
    return qubit_state(r * x / len, r * y / len, r * z / len);
}

Matrix random_unitary(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx{g(rng), g(rng)};
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ();
}

}  // namespace

TEST(Estimate, ExactTomographyExamples) {
    const double s = 1.0 / std::sqrt(2.0);
    auto rec = tomography(ideal_readout(pure(qubit(s, s))));
    EXPECT_NEAR(rec.sx, 1.0, 1e-15);
    EXPECT_NEAR(rec.sy, 0.0, 1e-15);
    EXPECT_NEAR(rec.sz, 0.0, 1e-15);
    rec = tomography(ideal_readout(pure(qubit(1.0, 0.0))));
    EXPECT_NEAR(rec.sx, 0.0, 1e-15);
    EXPECT_NEAR(rec.sy, 0.0, 1e-15);
    EXPECT_NEAR(rec.sz, 1.0, 1e-15);
    EXPECT_EQ(rec.shots, 0);
}

TEST(Estimate, ReadoutNormalizesWithinTheQubitSubspace) {
    Vector psi(3);
    psi << 0.6, 0.0, 0.8;
    const auto r = ideal_readout(pure(psi));
    EXPECT_NEAR(r.p_z_none, 0.0, 1e-15);
    EXPECT_NEAR(r.leakage, 0.64, 1e-15);
    EXPECT_EQ(tomography(r).leakage, r.leakage);
    EXPECT_NEAR(excited_probability(pure(psi)), 0.0, 1e-15);
    Vector one(3);
    one << 0.0, 0.6, 0.8;
    EXPECT_NEAR(excited_probability(pure(one)), 1.0, 1e-15);
}

TEST(Estimate, SampledTomographyWithinBinomialBands) {
    ReadoutProbabilities p{0.2, 0.5, 0.9, 0.0};
    const std::int64_t shots = 10000;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto rec = tomography(p, SampledReadout{shots, seed});
        const auto exact = tomography(p);
        auto band = [&](double pz) { return 3.0 * 2.0 * std::sqrt(pz * (1.0 - pz) / shots); };
        EXPECT_LE(std::abs(rec.sz - exact.sz), band(p.p_z_none));
        EXPECT_LE(std::abs(rec.sx - exact.sx), band(p.p_z_x));
        EXPECT_LE(std::abs(rec.sy - exact.sy), band(p.p_z_y));
        EXPECT_TRUE(rec.warnings.empty());
        EXPECT_EQ(rec.shots, shots);
        EXPECT_EQ(rec.seed, seed);
    }
}

TEST(EstimateProperty, SeededSamplingIsReproducible) {
    ReadoutProbabilities p{0.3, 0.45, 0.7, 0.01};
    const auto a = tomography(p, SampledReadout{5000, 42});
    const auto b = tomography(p, SampledReadout{5000, 42});
    const auto c = tomography(p, SampledReadout{5000, 43});
    EXPECT_EQ(a.sx, b.sx);
    EXPECT_EQ(a.sy, b.sy);
    EXPECT_EQ(a.sz, b.sz);
    EXPECT_TRUE(a.sx != c.sx || a.sy != c.sy || a.sz != c.sz);
}

TEST(Estimate, FewShotsWarnAndZeroShotsReject) {
    ReadoutProbabilities p;
    EXPECT_EQ(tomography(p, SampledReadout{50, 1}).warnings.size(), 1u);
    EXPECT_THROW(tomography(p, SampledReadout{0, 1}), ConfigError);
}

TEST(Estimate, PhaseExtraction) {
    TomographyRecord rec;
    rec.sx = 1.0;
    EXPECT_EQ(extract_phase(rec), 0.0);
    rec.sx = -1.0;
    EXPECT_NEAR(extract_phase(rec), kPi, 1e-15);
    rec.sx = 0.0;
    rec.sy = 1e-4;
    EXPECT_THROW(extract_phase(rec), NumericalError);
}

TEST(EstimateProperty, PhaseIsShrinkageInvariant) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-kPi + 1e-9, kPi);
    for (int i = 0; i < 200; ++i) {
        const double g = u(rng);
        TomographyRecord rec;
        rec.sx = std::cos(g);
        rec.sy = std::sin(g);
        const double full = extract_phase(rec);
        rec.sx *= 0.47;
        rec.sy *= 0.47;
        EXPECT_NEAR(extract_phase(rec), full, 1e-15);
        EXPECT_NEAR(full, g, 1e-12);
    }
}

TEST(Estimate, UnwrapAlongASweep) {
    const std::vector<double> wrapped{3.0, -3.1, -2.9, 2.8, std::numeric_limits<double>::quiet_NaN(), 2.5};
    const auto u = unwrap_phases(wrapped, 3.0);
    EXPECT_NEAR(u[0], 3.0, 1e-15);
    EXPECT_NEAR(u[1], -3.1 + kTwoPi, 1e-15);
    EXPECT_NEAR(u[2], -2.9 + kTwoPi, 1e-15);
    EXPECT_NEAR(u[3], 2.8, 1e-15);
    EXPECT_TRUE(std::isnan(u[4]));
    EXPECT_NEAR(u[5], 2.5, 1e-15);
    EXPECT_NEAR(nearest_branch(0.1, 4.0 * kPi), 0.1 + 4.0 * kPi, 1e-12);
}

TEST(Estimate, MaximumLikelihoodExamples) {
    TomographyRecord rec;
    auto rho = ml_reconstruct(rec);
    EXPECT_LT((rho.matrix - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
    rec.sx = 1.0;
    const Matrix plus = pure(qubit(1.0, 1.0));
    EXPECT_LT((ml_reconstruct(rec).matrix - plus).norm(), 1e-15);
    rec.sx = 1.05;
    rho = ml_reconstruct(rec);
    EXPECT_LT((rho.matrix - plus).norm(), 1e-15);
    EXPECT_NEAR(bloch_vector(rho.matrix).length(), 1.0, 1e-15);
    EXPECT_NO_THROW(rho.check());
}

TEST(EstimateProperty, MaximumLikelihoodIsIdempotentAndPhysical) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 0.8);
    for (int i = 0; i < 300; ++i) {
        TomographyRecord rec;
        rec.sx = g(rng);
        rec.sy = g(rng);
        rec.sz = g(rng);
        const auto rho = ml_reconstruct(rec);
        EXPECT_NO_THROW(rho.check(1e-12, 1e-12, 1e-12));
        const auto b = bloch_vector(rho.matrix);
        TomographyRecord again;
        again.sx = b.x;
        again.sy = b.y;
        again.sz = b.z;
        EXPECT_LT((ml_reconstruct(again).matrix - rho.matrix).norm(), 1e-12);
        // inside the ball the raw vector is kept; outside it is projected radially
        if (rec.bloch_length() <= 1.0) {
            EXPECT_NEAR(b.x, rec.sx, 1e-12);
        } else {
            EXPECT_NEAR(b.length(), 1.0, 1e-12);
            EXPECT_NEAR(b.x * rec.bloch_length(), rec.sx, 1e-12);
        }
    }
}

TEST(Estimate, FidelityExamples) {
    const Matrix zero = pure(qubit(1.0, 0.0));
    const Matrix one = pure(qubit(0.0, 1.0));
    EXPECT_NEAR(fidelity({zero}, {zero}), 1.0, 1e-12);
    EXPECT_NEAR(fidelity({zero}, {one}), 0.0, 1e-7);
    EXPECT_NEAR(fidelity({zero}, DensityOperator::maximally_mixed(2)), 1.0 / std::sqrt(2.0), 1e-12);
    // equatorial target vs shrunken state at the same phase: √((1+L)/2)
    EXPECT_NEAR(fidelity(adiabatic_target(0.7), qubit_state(0.47 * std::cos(0.7), 0.47 * std::sin(0.7), 0.0)),
                std::sqrt(0.5 * 1.47), 1e-12);
    EXPECT_THROW(fidelity({zero}, DensityOperator::maximally_mixed(3)), ConfigError);
    Matrix bad = zero;
    bad(1, 1) = -0.2;
    bad(0, 0) = 1.2;
    EXPECT_THROW(fidelity({bad}, {zero}), InvalidStateError);
}

TEST(EstimateProperty, FidelitySymmetricUnitarilyInvariantAndClosedForm) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
        const auto rho = random_qubit_state(rng, i % 2 == 0);
        const auto sigma = random_qubit_state(rng, true);
        const double f = fidelity(rho, sigma);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
        EXPECT_NEAR(f, fidelity(sigma, rho), 1e-10);
        // the closed form takes √(det ρ); for pure ρ that turns round-off in det ρ into ~1e-9
        EXPECT_NEAR(f, qubit_fidelity_closed_form(rho, sigma), i % 2 == 0 ? 1e-10 : 1e-8);
        const Matrix u = random_unitary(rng, 2);
        EXPECT_NEAR(f, fidelity({u * rho.matrix * u.adjoint()}, {u * sigma.matrix * u.adjoint()}), 1e-10);
    }
}

TEST(EstimateProperty, FidelityOnLargerSpaces) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 50; ++i) {
        const Matrix u = random_unitary(rng, 4);
        std::uniform_real_distribution<double> w(0.0, 1.0);
        RealVector p(4);
        for (int j = 0; j < 4; ++j) p(j) = w(rng);
        p /= p.sum();
        const Matrix rho = u * p.cast<cplx>().asDiagonal() * u.adjoint();
        // commuting states: F = Σ √(p_j q_j)
        RealVector q(4);
        for (int j = 0; j < 4; ++j) q(j) = w(rng);
        q /= q.sum();
        const Matrix sigma = u * q.cast<cplx>().asDiagonal() * u.adjoint();
        EXPECT_NEAR(fidelity({rho}, {sigma}), (p.cwiseProduct(q)).cwiseSqrt().sum(), 1e-10);
    }
}
