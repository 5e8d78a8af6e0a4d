#include "dirac1d/lap.hpp"

#include <gtest/gtest.h>

using namespace dirac1d;

namespace {
PotentialSpec regular_gaussian()
{
    Mat2 a;
    a << 1.0, 0.5, 0.5, -0.5;
    return PotentialSpec::gaussian(a, 1.0);
}

PotentialSpec absorbing_gaussian()
{
    Mat2 a;
    a << cplx(1.0, 0.1), 0.5, 0.5, cplx(-0.5, -0.05);
    auto p = PotentialSpec::gaussian(a, 1.0);
    p.allowNonSelfAdjoint = true;
    return p;
}
} // namespace

TEST(Resolvent, ZeroPotentialIsTheFreeResolvent)
{
    const Grid g = build_grid(4.0, 41);
    const DiracAlgebra alg(1.0);
    const Factorization empty;
    const auto p = ResolventPoint::real(0.7);
    const PerturbedResolvent r = perturbed_resolvent(p, &empty, nullptr, g, alg, ResolventRoute::symmetricIdentity);
    EXPECT_EQ((r.sym - free_resolvent_symmetric(p, g, alg.m)).cwiseAbs().maxCoeff(), 0.0);
    // action form: column weights folded in
    const BlockKernel k = r.kernel(g);
    const Mat2 ref = free_resolvent_kernel({0.7, Branch::positive}, g.node(3), g.node(17), alg);
    EXPECT_LT((k.block(3, 17) - g.weight(17) * ref).cwiseAbs().maxCoeff(), 1e-12);

    const auto V = eval_potential(PotentialSpec::zero(), g);
    const auto c = perturbed_resolvent(ResolventPoint::at(cplx(1.3, 0.2)), nullptr, &V, g, alg,
                                       ResolventRoute::directInverse);
    const Mat2 cref = resolvent_block_complex(cplx(1.3, 0.2), sgn(g.node(3) - g.node(17)),
                                              std::abs(g.node(3) - g.node(17)), alg.m);
    EXPECT_LT((c.kernel(g).block(3, 17) - g.weight(17) * cref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Resolvent, RoutesAgree)
{
    const Grid g = build_grid(6.0, 61);
    const DiracAlgebra alg(1.0);
    const auto V = eval_potential(regular_gaussian(), g);
    const Factorization f = factorize(V);
    for (double z : {0.1, 1.0, 3.0})
        for (Branch b : {Branch::positive, Branch::negative}) {
            const auto p = ResolventPoint::real(z, b);
            const auto a = perturbed_resolvent(p, &f, nullptr, g, alg, ResolventRoute::symmetricIdentity);
            const auto d = perturbed_resolvent(p, nullptr, &V, g, alg, ResolventRoute::directInverse);
            EXPECT_LE(route_deviation(a, d), 1e-10) << "z=" << z;
            EXPECT_FALSE(a.nearSingular);
        }
    EXPECT_THROW(perturbed_resolvent(ResolventPoint::real(1.0), nullptr, nullptr, g, alg,
                                     ResolventRoute::symmetricIdentity),
                 ConfigError);
    EXPECT_THROW(perturbed_resolvent(ResolventPoint::real(1.0), nullptr, nullptr, g, alg, ResolventRoute::directInverse),
                 ConfigError);
}

TEST(Resolvent, LowerBoundaryValueIsTheAdjoint)
{
    const Grid g = build_grid(6.0, 61);
    const DiracAlgebra alg(1.0);
    const Factorization f = factorize(eval_potential(regular_gaussian(), g));
    for (double z : {0.2, 2.0}) {
        const auto up = perturbed_resolvent(ResolventPoint::real(z), &f, nullptr, g, alg, ResolventRoute::symmetricIdentity);
        const auto dn =
            perturbed_resolvent(ResolventPoint::real(-z), &f, nullptr, g, alg, ResolventRoute::symmetricIdentity);
        EXPECT_LT(spectral_norm(dn.sym - up.sym.adjoint()), 1e-10 * spectral_norm(up.sym));
    }
}

TEST(Resolvent, ComplexKernelApproachesTheBoundaryValue)
{
    const Grid g = build_grid(8.0, 81);
    const DiracAlgebra alg(1.0);
    const auto V = eval_potential(regular_gaussian(), g);
    const Factorization f = factorize(V);
    for (double lambda : {1.5, -1.5}) {
        const double z = std::sqrt(lambda * lambda - 1.0);
        const auto real = perturbed_resolvent(ResolventPoint::real(z, lambda > 0 ? Branch::positive : Branch::negative),
                                              &f, nullptr, g, alg, ResolventRoute::symmetricIdentity);
        const auto cpx = perturbed_resolvent(ResolventPoint::at(cplx(lambda, 1e-6)), nullptr, &V, g, alg,
                                             ResolventRoute::directInverse);
        const double a = weighted_norm_sym(real.sym, 1.5, g), b = weighted_norm_sym(cpx.sym, 1.5, g);
        EXPECT_NEAR(a, b, 1e-3 * a);
        EXPECT_LE(eta_bias(lambda, V, g, alg), 1e-4);
    }
    EXPECT_THROW(eta_bias(0.5, V, g, alg), ConfigError);
}

TEST(Lap, RegularWeightedNormStaysBoundedAtThreshold)
{
    const DiracAlgebra alg(1.0);
    std::vector<double> maxima;
    for (int n : {81, 161}) {
        const Grid g = build_grid(8.0, n);
        const Factorization f = factorize(eval_potential(regular_gaussian(), g));
        const LapTable t = lap_scan(lap_lambda_grid(alg.m, 8), 1.5, &f, g, alg);
        ASSERT_EQ(t.rows.size(), 8u);
        EXPECT_TRUE(t.warnings.empty());
        EXPECT_LT(t.maxNorm, 10.0);
        maxima.push_back(t.maxNorm);
    }
    EXPECT_NEAR(maxima[0], maxima[1], 0.05 * maxima[1]);
}

TEST(Lap, ResonantWeightedNormBlowsUpLikeInverseSquareRoot)
{
    const Grid g = build_grid(8.0, 161);
    const DiracAlgebra alg(1.0);
    const Factorization f = factorize(eval_potential(PotentialSpec::resonance_plus(-4.0), g));
    const LapTable t = lap_scan(lap_lambda_grid(alg.m, 10, alg.m + 1e-3, alg.m + 0.1), 1.5, &f, g, alg);
    std::vector<double> x, y;
    for (const auto& r : t.rows) {
        x.push_back(r.lambda.real() - alg.m);
        y.push_back(r.weightedNorm);
    }
    const LinearFit fit = fit_loglog(x, y);
    EXPECT_NEAR(fit.slope, -0.5, 0.1);
    EXPECT_GT(fit.r2, 0.99);
}

TEST(Lap, InputChecks)
{
    const Grid g = build_grid(4.0, 41);
    const DiracAlgebra alg(1.0);
    EXPECT_THROW(lap_scan({1.5}, 0.5, nullptr, g, alg), ConfigError);
    EXPECT_THROW(lap_scan({0.5}, 1.5, nullptr, g, alg), ConfigError);
    EXPECT_FALSE(lap_scan({1.5}, 0.8, nullptr, g, alg).warnings.empty());
    EXPECT_THROW(lap_lambda_grid(1.0, 10, 0.5, 2.0), ConfigError);
    const auto grid = lap_lambda_grid(1.0, 5, 1.01, 2.0);
    EXPECT_NEAR(grid.front(), 1.01, 1e-14);
    EXPECT_NEAR(grid.back(), 2.0, 1e-14);
    const auto V = eval_potential(PotentialSpec::zero(), g);
    EXPECT_THROW(complex_scan({cplx(3.0, 0.0)}, 1.5, V, g, alg), ConfigError);
    EXPECT_FALSE(complex_scan({cplx(1.5, 0.1)}, 1.5, V, g, alg).warnings.empty());
}

TEST(Sector, GridShape)
{
    const auto s = sector_grid(1.0);
    EXPECT_EQ(s.size(), 48u);
    for (const cplx& l : s) {
        EXPECT_GE(std::abs(l), 3.0 - 1e-12);
        EXPECT_LE(std::abs(l), 6.0 + 1e-12);
        EXPECT_GT(std::abs(l.imag()), 0.0);
        EXPECT_LE(std::abs(l.imag()), 0.1 * std::abs(l) + 1e-12);
    }
}

TEST(Sector, NonSelfAdjointBoundIsGridStable)
{
    const DiracAlgebra alg(1.0);
    std::vector<double> maxima;
    for (int n : {81, 161}) {
        const Grid g = build_grid(8.0, n);
        const auto V = eval_potential(absorbing_gaussian(), g);
        const LapTable t = complex_scan(sector_grid(alg.m, 3.0, 6.0, 0.1, 2, 2), 1.5, V, g, alg);
        EXPECT_TRUE(t.warnings.empty());
        maxima.push_back(t.maxNorm);
    }
    EXPECT_LT(maxima[1], 10.0);
    EXPECT_NEAR(maxima[0], maxima[1], 0.05 * maxima[1]);
}

TEST(Gap, AttractiveWellHasStableEigenvalues)
{
    const DiracAlgebra alg(1.0);
    std::vector<std::vector<double>> found;
    for (int n : {161, 321}) {
        const Grid g = build_grid(10.0, n);
        const auto V = eval_potential(PotentialSpec::gaussian(Mat2(-0.8 * alg.beta), 1.0), g);
        const GapSpectrum s = gap_spectrum(V, g, alg, default_eps_res(g));
        EXPECT_EQ(s.interior.size(), 2u);
        found.push_back(s.interior);
    }
    ASSERT_EQ(found[0].size(), found[1].size());
    for (std::size_t k = 0; k < found[0].size(); ++k)
        EXPECT_NEAR(found[0][k], found[1][k], 1e-3);
}

TEST(Gap, ThresholdEigenvalueOfTheExampleFamily)
{
    const DiracAlgebra alg(1.0);
    const Grid g = build_grid(10.0, 161);
    const auto V = eval_potential(PotentialSpec::resonance_plus(0.5), g);
    const GapSpectrum s = gap_spectrum(V, g, alg, default_eps_res(g));
    double nearest = 1.0;
    for (double l : s.eigenvalues)
        nearest = std::min(nearest, std::abs(l - alg.m));
    EXPECT_LT(nearest, 1e-3);
    EXPECT_THROW(gap_spectrum(eval_potential(absorbing_gaussian(), g), g, alg, default_eps_res(g)), ConfigError);
}

TEST(Gap, FreeOperatorHasNoInteriorEigenvalues)
{
    const DiracAlgebra alg(1.0);
    const Grid g = build_grid(8.0, 81);
    EXPECT_TRUE(gap_spectrum(eval_potential(PotentialSpec::zero(), g), g, alg, default_eps_res(g)).interior.empty());
}
