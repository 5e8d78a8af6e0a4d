#pragma once

#include "dirac1d/lattice.hpp"
#include "dirac1d/quadrature.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace dirac1d {

/// Positive branch: lambda = +sqrt(m^2 + z^2); negative: lambda = -sqrt(m^2 + z^2).
enum class Branch { positive, negative };

inline double branch_sign(Branch b) { return b == Branch::positive ? 1.0 : -1.0; }

struct SpectralPoint {
    double z = 1.0;
    Branch branch = Branch::positive;

    double lambda(double m) const { return branch_sign(branch) * std::sqrt(m * m + z * z); }
};

/// Threshold direction vector: (1,1) at +m, (1,-1) at -m.
inline Vec2 threshold_vector(Branch b)
{
    return b == Branch::positive ? Vec2(1.0, 1.0) : Vec2(1.0, -1.0);
}

/// Free resolvent block for sgn(x-y) = s and |x-y| = r.
/// Positive branch: (i/2z)[-alpha z s + beta m + sqrt(z^2+m^2)] e^{iz r}.
/// Negative branch: (-i/2z)[alpha z s + beta m - sqrt(z^2+m^2)] e^{-iz r}.
inline Mat2 resolvent_block(double z, Branch b, double s, double r, double m)
{
    if (z == 0.0)
        throw ConfigError("free resolvent: z = 0 is the threshold, use the expansions");
    const double lam = std::sqrt(z * z + m * m);
    Mat2 out;
    if (b == Branch::positive) {
        const cplx pre = I_unit / (2.0 * z) * std::exp(I_unit * (z * r));
        out << pre * (z * s + lam), pre * m, pre * m, pre * (-z * s + lam);
    } else {
        const cplx pre = -I_unit / (2.0 * z) * std::exp(-I_unit * (z * r));
        out << pre * (-z * s - lam), pre * m, pre * m, pre * (z * s - lam);
    }
    return out;
}

inline Mat2 free_resolvent_kernel(const SpectralPoint& p, double x, double y, const DiracAlgebra& alg)
{
    return resolvent_block(p.z, p.branch, sgn(x - y), std::abs(x - y), alg.m);
}

/// Resolvent (D_m - lambda)^{-1} at complex lambda; on the real axis |lambda| > m
/// the boundary value from the upper half plane is taken.
inline Mat2 resolvent_block_complex(cplx lambda, double s, double r, double m)
{
    cplx k = std::sqrt(lambda * lambda - m * m);
    if (k.imag() < 0.0 || (k.imag() == 0.0 && k.real() * lambda.real() < 0.0))
        k = -k;
    if (std::abs(k) == 0.0)
        throw ConfigError("free resolvent: lambda at a threshold");
    const cplx pre = I_unit / (2.0 * k) * std::exp(I_unit * k * r);
    Mat2 out;
    out << pre * (k * s + lambda), pre * m, pre * m, pre * (-k * s + lambda);
    return out;
}

/// G0 = -(i/2) alpha sgn(x-y) - (m/2)(beta +- I)|x-y|.
inline Mat2 g0_block(double s, double r, double m, Branch b = Branch::positive)
{
    const double e = branch_sign(b);
    Mat2 out;
    const cplx d = -0.5 * m * r;
    out << 0.5 * I_unit * s + d * e, d, d, -0.5 * I_unit * s + d * e;
    return out;
}

inline Mat2 g0_kernel(double x, double y, const DiracAlgebra& alg, Branch b = Branch::positive)
{
    return g0_block(sgn(x - y), std::abs(x - y), alg.m, b);
}

/// G1 = +-(1/2) alpha (x-y) -+ (im/4)(beta +- I)|x-y|^2 + (i/4m) I.
inline Mat2 g1_block(double d, double m, Branch b = Branch::positive)
{
    const double e = branch_sign(b);
    const cplx q = -e * I_unit * m / 4.0 * d * d;
    const cplx c = I_unit / (4.0 * m);
    Mat2 out;
    out << -0.5 * e * d + q * e + c, q, q, 0.5 * e * d + q * e + c;
    return out;
}

inline Mat2 g1_kernel(double x, double y, const DiracAlgebra& alg, Branch b = Branch::positive)
{
    return g1_block(x - y, alg.m, b);
}

/// Stone integrand of the free evolution at one z node (without the cut-off).
inline Mat2 free_evolution_integrand(double z, double t, double s, double r, double m, Branch b)
{
    const double lam = std::sqrt(z * z + m * m);
    Mat2 out;
    if (b == Branch::positive) {
        const cplx ph = std::exp(I_unit * (-t * lam + z * r)) / (4.0 * pi * lam);
        out << ph * (z * s + lam), ph * m, ph * m, ph * (-z * s + lam);
    } else {
        const cplx ph = -std::exp(I_unit * (t * lam - z * r)) / (4.0 * pi * lam);
        out << ph * (-z * s - lam), ph * m, ph * m, ph * (z * s - lam);
    }
    return out;
}

inline Mat2 free_propagator_kernel(double t, double x, double y, const FrequencyCutoff& cut, const DiracAlgebra& alg,
                                   const QuadConfig& quad, Branch b = Branch::positive)
{
    const double s = sgn(x - y);
    const double r = std::abs(x - y);
    Mat2 acc = Mat2::Zero();
    for (const auto& nd : cutoff_nodes(cut, alg.m, t, r, quad, 0.0))
        acc += nd.w * free_evolution_integrand(nd.z, t, s, r, alg.m, b);
    return acc;
}

struct CheckedValue {
    Mat2 value;
    double change = 0.0;
    bool converged = true;
};

/// Evaluates at two node levels; flags disagreement above quad.tolerance.
inline CheckedValue free_propagator_checked(double t, double x, double y, const FrequencyCutoff& cut,
                                            const DiracAlgebra& alg, const QuadConfig& quad,
                                            Branch b = Branch::positive)
{
    CheckedValue c;
    const Mat2 coarse = free_propagator_kernel(t, x, y, cut, alg, quad, b);
    c.value = free_propagator_kernel(t, x, y, cut, alg, quad.refined(), b);
    c.change = (c.value - coarse).cwiseAbs().maxCoeff();
    c.converged = c.change <= quad.tolerance;
    return c;
}

/// G_t(r) = int e^{-it sqrt(z^2+m^2) + izr} chi(z) / sqrt(z^2+m^2) dz.
inline cplx gt_profile(double r, double t, const FrequencyCutoff& cut, const DiracAlgebra& alg,
                       const QuadConfig& quad)
{
    if (t == 0.0)
        throw ConfigError("gt_profile: t = 0");
    cplx acc = 0.0;
    for (const auto& nd : cutoff_nodes(cut, alg.m, t, std::abs(r), quad, 0.0)) {
        const double lam = std::sqrt(nd.z * nd.z + alg.m * alg.m);
        acc += nd.w * std::exp(I_unit * (-t * lam + nd.z * r)) / lam;
    }
    return acc;
}

/// F_t^0(x,y) = (m/4pi)(beta + I) G_t(|x-y|).
inline Mat2 ft0_kernel(double t, double x, double y, const FrequencyCutoff& cut, const DiracAlgebra& alg,
                       const QuadConfig& quad)
{
    const cplx gt = gt_profile(std::abs(x - y), t, cut, alg, quad);
    return (alg.m / (4.0 * pi)) * (alg.beta + alg.id) * gt;
}

struct EnvelopeRow {
    int j;
    double t;
    double sup;
    double envelope;
    double ratio;
    double weightedSup;
    double weightedEnvelope;
    double weightedRatio;
    /// sup against min(2^j, t^{-1/2} 2^{3j/2} / m), the stationary-phase size of a dyadic block.
    double curvatureRatio;
};

/// Dyadic free kernels against min(2^j, t^{-1/2} 2^{j/2}) and t^{-3/2} 2^{j/2} <x-y>.
/// The kernel depends on x - y only; r = |x - y| runs past the light cone with
/// samplesPerWavelength points per 2 pi / 2^(j+1), both signs of x - y.
inline std::vector<EnvelopeRow> free_envelope_scan(const std::vector<int>& jList, const std::vector<double>& tList,
                                                   const DiracAlgebra& alg, const QuadConfig& quad = {},
                                                   int samplesPerWavelength = 8)
{
    std::vector<EnvelopeRow> rows;
    for (int j : jList) {
        if (j < 1)
            throw ConfigError("free envelope: dyadic index must be >= 1");
        const FrequencyCutoff cut = FrequencyCutoff::dyadic_block(j);
        const double dr = 2.0 * pi / cut.zmax() / samplesPerWavelength;
        for (double t : tList) {
            if (t == 0.0)
                throw ConfigError("free envelope: t = 0");
            const double rmax = 1.25 * std::abs(t) + 8.0;
            EnvelopeRow row{};
            row.j = j;
            row.t = t;
            const double dj = std::ldexp(1.0, j);
            row.envelope = std::min(dj, std::sqrt(dj / std::abs(t)));
            row.weightedEnvelope = std::sqrt(dj) * std::pow(std::abs(t), -1.5);
            const int nr = static_cast<int>(std::ceil(rmax / dr));
            for (int k = 0; k <= nr; ++k) {
                const double r = k * dr;
                for (double s : {1.0, -1.0}) {
                    const Mat2 K = free_propagator_kernel(t, s * r, 0.0, cut, alg, quad, Branch::positive) +
                                   free_propagator_kernel(t, s * r, 0.0, cut, alg, quad, Branch::negative);
                    const double nb = Eigen::JacobiSVD<Mat2>(K).singularValues()(0);
                    row.sup = std::max(row.sup, nb);
                    row.weightedSup = std::max(row.weightedSup, nb / jbracket(r));
                    if (r == 0.0)
                        break;
                }
            }
            row.ratio = row.sup / row.envelope;
            row.weightedRatio = row.weightedSup / row.weightedEnvelope;
            row.curvatureRatio = row.sup / std::min(dj, std::pow(dj, 1.5) / (alg.m * std::sqrt(std::abs(t))));
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace dirac1d
