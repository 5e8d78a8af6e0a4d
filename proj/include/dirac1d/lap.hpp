#pragma once

#include "dirac1d/evolution.hpp"
#include "dirac1d/factorization.hpp"
#include "dirac1d/freedirac.hpp"
#include "dirac1d/nystrom.hpp"
#include "dirac1d/parallel.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <string>
#include <vector>

namespace dirac1d {

enum class ResolventRoute { symmetricIdentity, directInverse };

/// Spectral parameter: real z on a branch (boundary value from the upper half plane
/// for z > 0, lower for z < 0) or a complex lambda.
struct ResolventPoint {
    bool complex = false;
    SpectralPoint z;
    cplx lambda = 0.0;

    static ResolventPoint real(double z, Branch b = Branch::positive) { return {false, {z, b}, 0.0}; }
    static ResolventPoint at(cplx l) { return {true, {}, l}; }

    cplx value(double m) const { return complex ? lambda : cplx(z.lambda(m)); }
};

/// R0 in the sqrt(w) basis. On the real axis the smooth rank-one part (im/2z) e e^T
/// takes plain weights and the rest the kink-corrected rule, as in M(z).
inline MatX free_resolvent_symmetric(const ResolventPoint& p, const Grid& g, double m)
{
    if (p.complex) {
        return nystrom_symmetric(g, [&](int i, int j, double s) {
            return resolvent_block_complex(p.lambda, s, std::abs(g.node(i) - g.node(j)), m);
        });
    }
    const double z = p.z.z;
    if (z == 0.0)
        throw ConfigError("free resolvent: z = 0");
    const Vec2 e = threshold_vector(p.z.branch);
    const Mat2 sing = I_unit * m / (2.0 * z) * (e * e.transpose()).cast<cplx>();
    MatX r = nystrom_symmetric(g, [&](int i, int j, double s) {
        return Mat2(resolvent_block(z, p.z.branch, s, std::abs(g.node(i) - g.node(j)), m) - sing);
    });
    VecX col(2 * g.n);
    for (int i = 0; i < g.n; ++i)
        col.segment<2>(2 * i) = std::sqrt(g.weight(i)) * e.cast<cplx>();
    r += (I_unit * m / (2.0 * z)) * col * col.transpose();
    return r;
}

inline MatX block_diagonal(const std::vector<Mat2>& blocks)
{
    const int n = static_cast<int>(blocks.size());
    MatX d = MatX::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        d.block<2, 2>(2 * i, 2 * i) = blocks[static_cast<std::size_t>(i)];
    return d;
}

struct PerturbedResolvent {
    /// R_V as an operator in the sqrt(w) basis.
    MatX sym;
    double condition = 0.0;
    bool nearSingular = false;

    /// Action form (weights folded in) for apply_kernel.
    BlockKernel kernel(const Grid& g) const
    {
        const VecX sw = sqrt_weights(g);
        return BlockKernel(sw.cwiseInverse().asDiagonal() * sym * sw.asDiagonal(), true);
    }
};

/// R_V = R0 - R0 v^* (U + v R0 v^*)^{-1} v R0 (symmetricIdentity) or
/// R_V = R0 - R0 (I + V R0)^{-1} V R0 (directInverse).
/// f is required for symmetricIdentity; V (possibly non-self-adjoint) for directInverse.
inline PerturbedResolvent perturbed_resolvent(const ResolventPoint& p, const Factorization* f,
                                              const std::vector<Mat2>* V, const Grid& g, const DiracAlgebra& alg,
                                              ResolventRoute route)
{
    const MatX R0 = free_resolvent_symmetric(p, g, alg.m);
    const Eigen::Index N = R0.rows();
    PerturbedResolvent out;
    if (route == ResolventRoute::symmetricIdentity) {
        if (!f)
            throw ConfigError("perturbed_resolvent: symmetric identity needs a factorization");
        if (f->size() == 0) {
            out.sym = R0;
            out.condition = 1.0;
            return out;
        }
        std::vector<Mat2> vs, vsa;
        for (const auto& b : f->v) {
            vs.push_back(b);
            vsa.push_back(b.adjoint());
        }
        const MatX v = block_diagonal(vs);
        const MatX vstar = block_diagonal(vsa);
        MatX M = v * R0 * vstar;
        M.diagonal() += sign_diagonal(*f);
        Eigen::PartialPivLU<MatX> lu(M);
        const double rc = lu.rcond();
        out.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
        out.nearSingular = !(rc > 1e-13);
        out.sym = R0 - (R0 * vstar) * lu.solve(v * R0);
        return out;
    }
    if (!V)
        throw ConfigError("perturbed_resolvent: direct route needs V");
    const MatX Vd = block_diagonal(*V);
    const MatX A = MatX::Identity(N, N) + Vd * R0;
    Eigen::PartialPivLU<MatX> lu(A);
    const double rc = lu.rcond();
    out.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    out.nearSingular = !(rc > 1e-13);
    out.sym = R0 - R0 * lu.solve(Vd * R0);
    return out;
}

/// sqrt(w)-basis matrix of <x>^{-sigma} K <x>^{-sigma}, spectral norm.
inline double weighted_norm_sym(const MatX& sym, double sigma, const Grid& g)
{
    VecX d(2 * g.n);
    for (int i = 0; i < g.n; ++i)
        d.segment<2>(2 * i).setConstant(std::pow(jbracket(g.node(i)), -sigma));
    return spectral_norm(d.asDiagonal() * sym * d.asDiagonal());
}

/// Relative deviation of two resolvent constructions in operator norm.
inline double route_deviation(const PerturbedResolvent& a, const PerturbedResolvent& b)
{
    return spectral_norm(a.sym - b.sym) / spectral_norm(b.sym);
}

struct LapRow {
    cplx lambda;
    double sigma;
    double weightedNorm;
    double condition;
};

struct LapTable {
    std::vector<LapRow> rows;
    double maxNorm = 0.0;
    std::vector<std::string> warnings;
};

/// 40 log-spaced points of lambda - m on [lo, hi] - m (defaults m + 1e-3 .. 5m).
inline std::vector<double> lap_lambda_grid(double m, int count = 40, double lo = -1.0, double hi = -1.0)
{
    if (lo < 0.0)
        lo = m + 1e-3;
    if (hi < 0.0)
        hi = 5.0 * m;
    if (!(lo > m) || !(hi > lo) || count < 2)
        throw ConfigError("lap grid: need m < lo < hi and at least 2 points");
    std::vector<double> out;
    const double a = std::log(lo - m);
    const double b = std::log(hi - m);
    for (int k = 0; k < count; ++k)
        out.push_back(m + std::exp(a + (b - a) * k / (count - 1)));
    return out;
}

/// Weighted norms of R_V(lambda + i0) on real |lambda| > m via the symmetric identity.
/// f == nullptr is V = 0.
inline LapTable lap_scan(const std::vector<double>& lambdas, double sigma, const Factorization* f, const Grid& g,
                         const DiracAlgebra& alg)
{
    if (!(sigma > 0.5))
        throw ConfigError("lap_scan: sigma must exceed 1/2");
    LapTable tab;
    if (sigma <= 1.0)
        tab.warnings.push_back("sigma <= 1: only the large-lambda bound applies");
    const Factorization empty;
    std::vector<LapRow> rows(lambdas.size());
    parallel_for(static_cast<int>(lambdas.size()), [&](int k) {
        const double l = lambdas[static_cast<std::size_t>(k)];
        if (!(std::abs(l) > alg.m))
            throw ConfigError("lap_scan: |lambda| must exceed m");
        const double z = std::sqrt(l * l - alg.m * alg.m);
        const ResolventPoint p = ResolventPoint::real(z, l > 0.0 ? Branch::positive : Branch::negative);
        const PerturbedResolvent r =
            perturbed_resolvent(p, f ? f : &empty, nullptr, g, alg, ResolventRoute::symmetricIdentity);
        rows[static_cast<std::size_t>(k)] = {cplx(l), sigma, weighted_norm_sym(r.sym, sigma, g), r.condition};
    });
    tab.rows = rows;
    for (const auto& r : tab.rows)
        tab.maxNorm = std::max(tab.maxNorm, r.weightedNorm);
    return tab;
}

/// Sector {|lambda| in [r0, r1], 0 < |Im lambda| <= delta |lambda|} on both half-lines.
inline std::vector<cplx> sector_grid(double m, double r0 = 3.0, double r1 = 6.0, double delta = 0.1, int radii = 4,
                                     int angles = 3)
{
    std::vector<cplx> out;
    for (int a = 0; a < radii; ++a) {
        const double r = m * (r0 + (r1 - r0) * a / std::max(1, radii - 1));
        for (int k = 1; k <= angles; ++k) {
            const double ratio = delta * k / angles;
            const double im = ratio * r;
            const double re = std::sqrt(r * r - im * im);
            for (double sr : {1.0, -1.0})
                for (double si : {1.0, -1.0})
                    out.emplace_back(sr * re, si * im);
        }
    }
    return out;
}

/// Weighted norms of (H - lambda)^{-1} at complex lambda via the direct route.
inline LapTable complex_scan(const std::vector<cplx>& lambdas, double sigma, const std::vector<Mat2>& V,
                             const Grid& g, const DiracAlgebra& alg)
{
    if (!(sigma > 0.5))
        throw ConfigError("complex_scan: sigma must exceed 1/2");
    LapTable tab;
    for (const cplx& l : lambdas) {
        if (l.imag() == 0.0)
            throw ConfigError("complex_scan: lambda must be off the real axis");
        if (std::abs(l) < 2.0 * alg.m) {
            tab.warnings.push_back("complex_scan: |lambda| below 2m");
            break;
        }
    }
    std::vector<LapRow> rows(lambdas.size());
    parallel_for(static_cast<int>(lambdas.size()), [&](int k) {
        const cplx l = lambdas[static_cast<std::size_t>(k)];
        const PerturbedResolvent r =
            perturbed_resolvent(ResolventPoint::at(l), nullptr, &V, g, alg, ResolventRoute::directInverse);
        rows[static_cast<std::size_t>(k)] = {l, sigma, weighted_norm_sym(r.sym, sigma, g), r.condition};
    });
    tab.rows = rows;
    for (const auto& r : tab.rows)
        tab.maxNorm = std::max(tab.maxNorm, r.weightedNorm);
    return tab;
}

/// Relative change of the direct route between lambda + i eta and the boundary value at lambda + i0,
/// both through the complex-lambda kernel.
inline double eta_bias(double lambda, const std::vector<Mat2>& V, const Grid& g, const DiracAlgebra& alg,
                       double eta = 1e-6)
{
    if (!(std::abs(lambda) > alg.m))
        throw ConfigError("eta_bias: |lambda| must exceed m");
    const PerturbedResolvent r0 =
        perturbed_resolvent(ResolventPoint::at(lambda), nullptr, &V, g, alg, ResolventRoute::directInverse);
    const PerturbedResolvent r1 = perturbed_resolvent(ResolventPoint::at(cplx(lambda, eta)), nullptr, &V, g, alg,
                                                      ResolventRoute::directInverse);
    return route_deviation(r1, r0);
}

struct GapSpectrum {
    /// All eigenvalues with |lambda| < m.
    std::vector<double> eigenvalues;
    /// Those strictly inside (-m + 3 epsRes, m - 3 epsRes).
    std::vector<double> interior;
    double epsRes = 0.0;
};

inline GapSpectrum gap_spectrum(const std::vector<Mat2>& V, const Grid& g, const DiracAlgebra& alg, double epsRes)
{
    for (const auto& b : V)
        if (!is_hermitian(b, 1e-12))
            throw ConfigError("gap_spectrum: V must be self-adjoint");
    const EigenOracle o = build_eigen_oracle(V, g, alg, epsRes, 1);
    GapSpectrum s;
    s.epsRes = epsRes;
    const auto& ev = o.twists.front().evals;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        const double l = ev(k);
        if (std::abs(l) < alg.m) {
            s.eigenvalues.push_back(l);
            if (std::abs(l) < alg.m - 3.0 * epsRes)
                s.interior.push_back(l);
        }
    }
    return s;
}

} // namespace dirac1d
