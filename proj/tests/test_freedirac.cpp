#include "dirac1d/freedirac.hpp"
#include "dirac1d/minverse.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dirac1d;

TEST(SpectralPoint, MassShell)
{
    for (double z : {1e-3, 0.5, 7.0})
        for (Branch b : {Branch::positive, Branch::negative}) {
            const double l = SpectralPoint{z, b}.lambda(1.3);
            EXPECT_NEAR(l * l - z * z, 1.3 * 1.3, 1e-12 * l * l);
        }
}

TEST(FreeResolvent, DiagonalValue)
{
    const DiracAlgebra alg(1.0);
    const Mat2 r = free_resolvent_kernel({1.0, Branch::positive}, 0.3, 0.3, alg);
    Mat2 expect;
    expect << I_unit * std::sqrt(2.0) / 2.0, I_unit / 2.0, I_unit / 2.0, I_unit * std::sqrt(2.0) / 2.0;
    EXPECT_LT((r - expect).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(free_resolvent_kernel({0.0, Branch::positive}, 0.0, 1.0, alg), ConfigError);
}

TEST(FreeResolvent, LowerBoundaryValueIsAdjointOfUpper)
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uz(1e-3, 10.0), ux(-5.0, 5.0);
    for (int k = 0; k < 50; ++k) {
        const double z = uz(rng), x = ux(rng), y = ux(rng);
        const Mat2 lower = resolvent_block(-z, Branch::positive, sgn(x - y), std::abs(x - y), 1.0);
        const Mat2 upperT = resolvent_block(z, Branch::positive, sgn(y - x), std::abs(x - y), 1.0).adjoint();
        EXPECT_LT((lower - upperT).cwiseAbs().maxCoeff(), 1e-13 * upperT.cwiseAbs().maxCoeff());
    }
}

namespace {
/// max over x of |(i alpha d/dx + beta m - lambda) R0(., y)| by centered differences, |x - y| > 2h.
double ode_residual(double z, double h)
{
    const DiracAlgebra alg(1.0);
    const double lam = std::sqrt(z * z + 1.0);
    const double y = 0.0;
    double worst = 0.0;
    for (double x = 3 * h; x < 4.0; x += 0.37) {
        for (double xs : {x, -x}) {
            auto R = [&](double u) { return free_resolvent_kernel({z, Branch::positive}, u, y, alg); };
            const Mat2 d = (R(xs + h) - R(xs - h)) / (2.0 * h);
            const Mat2 res = I_unit * alg.alpha * d + alg.m * alg.beta * R(xs) - lam * R(xs);
            worst = std::max(worst, res.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}
} // namespace

TEST(FreeResolvent, SolvesTheDiracEquationOffDiagonal)
{
    for (double z : {0.3, 1.0, 3.0}) {
        const double h = 1e-2;
        const double r1 = ode_residual(z, h);
        EXPECT_LE(r1, h * h * (1.0 + z * z * z)) << "z=" << z;
        EXPECT_GT(r1 / ode_residual(z, h / 2), 3.5) << "z=" << z;
    }
}

TEST(ThresholdExpansion, G0Values)
{
    const DiracAlgebra alg(1.0);
    EXPECT_EQ(g0_kernel(0.7, 0.7, alg).cwiseAbs().maxCoeff(), 0.0);
    Mat2 expect;
    expect << 0.5 * I_unit - 0.5, -0.5, -0.5, -0.5 * I_unit - 0.5;
    EXPECT_LT((g0_kernel(1.0, 0.0, alg) - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ThresholdExpansion, G1Values)
{
    const DiracAlgebra alg(1.0);
    EXPECT_LT((g1_kernel(0.2, 0.2, alg) - I_unit / 4.0 * alg.id).cwiseAbs().maxCoeff(), 1e-15);
    const Mat2 expect = Mat2(-0.5 * alg.alpha - I_unit / 4.0 * (alg.beta + alg.id) + I_unit / 4.0 * alg.id);
    EXPECT_LT((g1_kernel(0.0, 1.0, alg) - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ThresholdExpansion, ResidualOrders)
{
    const DiracAlgebra alg(1.0);
    for (Branch b : {Branch::positive, Branch::negative}) {
        const Vec2 e = threshold_vector(b);
        const Mat2 sing = (e * e.transpose()).cast<cplx>();
        for (double x : {0.3, 1.0, 2.0}) {
            std::vector<double> zs, r0, r1;
            for (int k = 0; k <= 8; ++k) {
                const double z = std::pow(10.0, -3.0 + 2.0 * k / 8);
                const Mat2 R = resolvent_block(z, b, 1.0, x, alg.m);
                const Mat2 lead = I_unit * alg.m / (2.0 * z) * sing;
                const Mat2 a = R - lead - g0_kernel(x, 0.0, alg, b);
                zs.push_back(z);
                r0.push_back(a.cwiseAbs().maxCoeff());
                r1.push_back((a - z * g1_kernel(x, 0.0, alg, b)).cwiseAbs().maxCoeff());
            }
            EXPECT_GE(fit_loglog(zs, r0).slope, 0.9);
            EXPECT_GE(fit_loglog(zs, r1).slope, 1.9);
        }
    }
}

TEST(Cutoff, ProfilesAndPartition)
{
    const FrequencyCutoff lo = FrequencyCutoff::low_energy(1.0);
    EXPECT_EQ(lo.value(0.5), 1.0);
    EXPECT_EQ(lo.value(1.0), 0.0);
    const FrequencyCutoff d = FrequencyCutoff::dyadic_block(3);
    EXPECT_EQ(d.value(3.9), 0.0);
    EXPECT_EQ(d.value(16.1), 0.0);
    EXPECT_GT(d.value(8.0), 0.0);
    // low-energy(2) plus dyadic blocks telescope to the band limit
    std::vector<FrequencyCutoff> cuts{FrequencyCutoff::low_energy(2.0)};
    for (int j = 1; j <= 4; ++j)
        cuts.push_back(FrequencyCutoff::dyadic_block(j));
    const FrequencyCutoff band = FrequencyCutoff::band_limit(4);
    for (double z = 0.0; z <= 32.0; z += 0.01) {
        double s = 0.0;
        for (const auto& c : cuts)
            s += c.value(z);
        EXPECT_NEAR(s, band.value(z), 1e-10);
    }
}

TEST(FreePropagator, QuadratureSelfConsistency)
{
    const DiracAlgebra alg(1.0);
    const QuadConfig q;
    for (const auto& cut : {FrequencyCutoff::low_energy(1.0), FrequencyCutoff::dyadic_block(2)})
        for (double t : {4.0, 30.0})
            for (double x : {0.0, 1.5, 9.0}) {
                const CheckedValue c = free_propagator_checked(t, x, 0.0, cut, alg, q);
                EXPECT_LT(c.change, 1e-6);
            }
}

TEST(FreePropagator, TimeReversal)
{
    const DiracAlgebra alg(1.0);
    const auto cut = FrequencyCutoff::dyadic_block(1);
    for (Branch b : {Branch::positive, Branch::negative}) {
        const Mat2 k = free_propagator_kernel(3.0, 1.2, -0.4, cut, alg, {}, b);
        const Mat2 kr = free_propagator_kernel(-3.0, -0.4, 1.2, cut, alg, {}, b);
        EXPECT_LT((kr - k.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(GtProfile, StationaryPhaseAtTheOrigin)
{
    const DiracAlgebra alg(1.0);
    const double t = 100.0;
    const cplx g = gt_profile(0.0, t, FrequencyCutoff::low_energy(1.0), alg, {});
    const cplx sp = std::sqrt(cplx(0.0, -2.0 * pi)) * std::exp(-I_unit * (alg.m * t)) / std::sqrt(alg.m * t);
    EXPECT_LE(std::abs(g - sp), 0.05 * std::abs(g));
}

TEST(GtProfile, NonStationaryOutsideTheLightCone)
{
    const DiracAlgebra alg(1.0);
    for (double t : {40.0, 100.0})
        EXPECT_LE(std::abs(gt_profile(2.0 * t, t, FrequencyCutoff::low_energy(1.0), alg, {})), 1e-3);
}

TEST(GtProfile, ConjugationSymmetry)
{
    const DiracAlgebra alg(1.0);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ur(0.0, 20.0), ut(1.0, 50.0);
    for (int k = 0; k < 10; ++k) {
        const double r = ur(rng), t = ut(rng);
        const auto cut = FrequencyCutoff::low_energy(1.0);
        const cplx a = gt_profile(r, -t, cut, alg, {});
        const cplx b = std::conj(gt_profile(r, t, cut, alg, {}));
        EXPECT_LT(std::abs(a - b), 1e-12);
    }
    EXPECT_THROW(gt_profile(1.0, 0.0, FrequencyCutoff::low_energy(1.0), alg, {}), ConfigError);
}

TEST(Ft0, RankOneStructure)
{
    const DiracAlgebra alg(1.0);
    const auto cut = FrequencyCutoff::low_energy(1.0);
    const Mat2 k = ft0_kernel(10.0, 0.0, 0.0, cut, alg, {});
    EXPECT_EQ((k.row(0) - k.row(1)).cwiseAbs().maxCoeff(), 0.0);
    const Mat2 expect = (alg.m / (4.0 * pi)) * (alg.beta + alg.id) * gt_profile(0.0, 10.0, cut, alg, {});
    EXPECT_LT((k - expect).cwiseAbs().maxCoeff(), 1e-12);
    const Mat2 k2 = ft0_kernel(7.0, 3.0, -1.0, cut, alg, {});
    EXPECT_EQ((k2.row(0) - k2.row(1)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FreeEnvelope, LowBlocksWithinTheEnvelope)
{
    const DiracAlgebra alg(1.0);
    for (const auto& r : free_envelope_scan({1, 2, 3}, {4.0, 16.0}, alg)) {
        EXPECT_LE(r.ratio, 10.0) << "j=" << r.j << " t=" << r.t;
        EXPECT_LE(r.weightedRatio, 10.0) << "j=" << r.j << " t=" << r.t;
        EXPECT_LE(r.curvatureRatio, 10.0) << "j=" << r.j << " t=" << r.t;
    }
}
