#include "dirac1d/lattice.hpp"

#include <gtest/gtest.h>

using namespace dirac1d;

TEST(Grid, SmallBoxArithmetic)
{
    const Grid g = build_grid(1.0, 17);
    EXPECT_DOUBLE_EQ(g.h, 0.125);
    EXPECT_DOUBLE_EQ(g.node(0), -1.0);
    EXPECT_DOUBLE_EQ(g.node(16), 1.0);
    EXPECT_DOUBLE_EQ(g.node(8), 0.0);
    for (int i = 1; i < g.n; ++i)
        EXPECT_LT(g.node(i - 1), g.node(i));
}

TEST(Grid, StandardSpacing)
{
    EXPECT_NEAR(build_grid(20.0, 401).h, 0.1, 1e-15);
}

TEST(Grid, RejectsBadInput)
{
    EXPECT_THROW(build_grid(10.0, 15), ConfigError);
    EXPECT_THROW(build_grid(0.0, 64), ConfigError);
    EXPECT_THROW(build_grid(-1.0, 64), ConfigError);
}

TEST(Grid, TrapezoidWeights)
{
    const Grid g = build_grid(2.0, 33);
    double s = 0.0;
    for (int i = 0; i < g.n; ++i)
        s += g.weight(i);
    EXPECT_NEAR(s, 4.0, 1e-14);
    EXPECT_DOUBLE_EQ(g.weight(0), g.h / 2);
}

TEST(Algebra, CliffordRelations)
{
    const DiracAlgebra a(1.0);
    EXPECT_EQ((a.alpha * a.beta + a.beta * a.alpha).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((a.alpha * a.alpha - a.id).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((a.beta * a.beta - a.id).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(DiracAlgebra(0.0), ConfigError);
}

TEST(Spinor, DiscreteNorm)
{
    const Grid g = build_grid(1.0, 17);
    SpinorField f(g.n);
    for (int i = 0; i < g.n; ++i)
        f.set(i, Vec2(1.0, I_unit));
    EXPECT_NEAR(l2_norm(f, g), std::sqrt(4.0), 1e-14);
}

TEST(Kernel, IdentityAndZero)
{
    const Grid g = build_grid(3.0, 41);
    SpinorField f(g.n);
    for (int i = 0; i < g.n; ++i)
        f.set(i, Vec2(std::sin(g.node(i)), cplx(0.0, g.node(i))));
    const SpinorField a = apply_kernel(identity_kernel(g), f, g);
    EXPECT_LT((a.values - f.values).cwiseAbs().maxCoeff(), 1e-14);
    const SpinorField z = apply_kernel(BlockKernel(g.n), f, g);
    EXPECT_EQ(z.values.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(apply_kernel(BlockKernel(g.n + 1), f, g), ConfigError);
}

namespace {
double bump(double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

double bump_integral_error(int n, double reference)
{
    const Grid g = build_grid(2.0, n);
    BlockKernel k(g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            k.set_block(i, j, Mat2::Identity() * bump(g.node(j)) * std::exp(-g.node(i) * g.node(i)));
    SpinorField one(g.n);
    for (int i = 0; i < g.n; ++i)
        one.set(i, Vec2(1.0, 1.0));
    const SpinorField r = apply_kernel(k, one, g);
    return std::abs(r.at(g.n / 2)(0) - reference);
}
} // namespace

TEST(Kernel, BumpIntegralAgainstFineQuadrature)
{
    // fine trapezoid reference on [-1, 1]
    const int N = 1 << 20;
    double ref = 0.0;
    for (int k = 1; k < N; ++k)
        ref += bump(-1.0 + 2.0 * k / N);
    ref *= 2.0 / N;
    const double e1 = bump_integral_error(33, ref);
    EXPECT_LT(e1, 1e-3);
    EXPECT_LT(bump_integral_error(129, ref), e1);
}

TEST(Kernel, GaussianQuadratureConvergesAtSecondOrder)
{
    // int e^{-y^2} on [-L, L] with a 10^6-point reference
    const double L = 1.5;
    const int N = 1000000;
    double ref = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double y = -L + 2.0 * L * k / N;
        ref += (k == 0 || k == N ? 0.5 : 1.0) * std::exp(-y * y);
    }
    ref *= 2.0 * L / N;
    auto err = [&](int n) {
        const Grid g = build_grid(L, n);
        BlockKernel k(g.n);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                k.set_block(i, j, Mat2::Identity() * std::exp(-g.node(i) * g.node(i) - g.node(j) * g.node(j)));
        SpinorField f(g.n);
        for (int i = 0; i < g.n; ++i)
            f.set(i, Vec2(1.0, 1.0));
        return std::abs(apply_kernel(k, f, g).at(g.n / 2)(0) - ref);
    };
    EXPECT_GE(err(17) / err(33), 3.0);
}

TEST(Kernel, WeightedNormOfIdentity)
{
    const Grid g = build_grid(5.0, 51);
    const BlockKernel id = identity_kernel(g);
    EXPECT_NEAR(weighted_op_norm(id, 0.0, g), 1.0, 1e-10);
    EXPECT_NEAR(weighted_op_norm(id, 1.0, g), 1.0, 1e-10);
    EXPECT_THROW(weighted_op_norm(id, -1.0, g), ConfigError);
}

TEST(Kernel, WeightedNormMatchesDenseSvd)
{
    const Grid g = build_grid(4.0, 41);
    BlockKernel k(g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            Mat2 b;
            b << std::exp(-std::pow(g.node(i) - g.node(j), 2)), cplx(0.0, 0.1 * g.node(i)), 0.3,
                std::cos(g.node(j));
            k.set_block(i, j, b);
        }
    // independent: explicit W^{1/2} K W^{1/2} with weights, then SVD
    MatX m(2 * g.n, 2 * g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            m.block<2, 2>(2 * i, 2 * j) = std::sqrt(g.weight(i) * g.weight(j)) * k.block(i, j);
    Eigen::JacobiSVD<MatX> svd(m);
    EXPECT_NEAR(weighted_op_norm(k, 0.0, g), svd.singularValues()(0), 1e-10 * svd.singularValues()(0));

    VecX w(2 * g.n);
    for (int i = 0; i < g.n; ++i)
        w(2 * i) = w(2 * i + 1) = std::pow(jbracket(g.node(i)), -2.0);
    Eigen::JacobiSVD<MatX> svd2(w.asDiagonal() * m * w.asDiagonal());
    EXPECT_NEAR(weighted_op_norm(k, 2.0, g), svd2.singularValues()(0), 1e-10 * svd2.singularValues()(0));

    k.data(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(weighted_op_norm(k, 0.0, g), NumericalError);
}

TEST(Kernel, AdjointAndCompose)
{
    const Grid g = build_grid(2.0, 21);
    BlockKernel k(g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            Mat2 b;
            b << cplx(g.node(i), g.node(j)), 1.0, cplx(0.0, g.node(i) * g.node(j)), 2.0;
            k.set_block(i, j, b);
        }
    const BlockKernel a = adjoint(k, g);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            EXPECT_LT((a.block(i, j) - k.block(j, i).adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    const BlockKernel c = compose(identity_kernel(g), k, g);
    EXPECT_LT((c.data - k.data).cwiseAbs().maxCoeff(), 1e-12);
}
