#pragma once

#include "dirac1d/factorization.hpp"
#include "dirac1d/freedirac.hpp"
#include "dirac1d/lattice.hpp"
#include "dirac1d/nystrom.hpp"

#include <Eigen/Eigenvalues>

#include <optional>

namespace dirac1d {

/// Sandwich v(x_i) K v^*(x_j) for a block function of (s, x_i - x_j).
template <class Block>
MatX sandwich_symmetric(const Grid& g, const Factorization& f, Block&& blk)
{
    return nystrom_symmetric(g, [&](int i, int j, double s) -> Mat2 {
        return f.v[static_cast<std::size_t>(i)] * blk(s, g.node(i) - g.node(j)) * f.v[static_cast<std::size_t>(j)].adjoint();
    });
}

/// M(z) = U + v R0(z) v^* in the sqrt(w) basis (identity part is the plain identity).
struct MOperator {
    SpectralPoint z;
    MatX M;
    /// M - g(z) P, assembled without the singular part.
    MatX M0;
    cplx g = 0.0;

    /// Kernel with identity part U delta_ij / w_i.
    BlockKernel kernel(const Grid& grid) const { return kernel_from_symmetric(M, grid); }
};

/// v (R0(z) - (im/2z) e e^T) v^*: the bounded part of the sandwiched resolvent.
inline MatX resolvent_sandwich_regular(double z, Branch b, const Factorization& f, const Grid& g, double m)
{
    const Vec2 e = threshold_vector(b);
    const Mat2 sing = I_unit * m / (2.0 * z) * (e * e.transpose()).cast<cplx>();
    return sandwich_symmetric(g, f, [&](double s, double d) { return Mat2(resolvent_block(z, b, s, std::abs(d), m) - sing); });
}

/// sqrt(w) v e, the unnormalized threshold vector.
inline VecX threshold_column(const Factorization& f, const Grid& g, Branch b)
{
    const Vec2 e = threshold_vector(b);
    VecX out(2 * g.n);
    for (int i = 0; i < g.n; ++i)
        out.segment<2>(2 * i) = std::sqrt(g.weight(i)) * (f.v[static_cast<std::size_t>(i)] * e);
    return out;
}

/// Threshold components T, M1, P, theta for one threshold.
struct ThresholdParts {
    Branch which = Branch::positive;
    double norm = 0.0;
    bool rankOne = false;
    VecX theta;
    MatX T;
    MatX M1;
    VecX U;

    MatX P() const { return rankOne ? MatX::Zero(T.rows(), T.cols()) : MatX(theta * theta.adjoint()); }
    MatX Q() const { return MatX::Identity(T.rows(), T.cols()) - P(); }
    /// c_P = -2i / (m ||v e||^2).
    cplx cP(double m) const { return -2.0 * I_unit / (m * norm * norm); }
    /// g(z) = (im / 2z) ||v e||^2.
    cplx g(double z, double m) const { return I_unit * m / (2.0 * z) * norm * norm; }
};

inline ThresholdParts assemble_T_P_Q(const Factorization& f, const Grid& g, const DiracAlgebra& alg, Branch which)
{
    ThresholdParts p;
    p.which = which;
    const Vec2 e = threshold_vector(which);
    p.theta = VecX(2 * g.n);
    double nn = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const Vec2 ve = f.v[static_cast<std::size_t>(i)] * e;
        nn += g.weight(i) * ve.squaredNorm();
        p.theta.segment<2>(2 * i) = std::sqrt(g.weight(i)) * ve;
    }
    p.norm = std::sqrt(nn);
    p.rankOne = p.norm < 1e-10;
    if (!p.rankOne)
        p.theta /= p.norm;
    else
        p.theta.setZero();
    p.U = sign_diagonal(f);
    const double m = alg.m;
    p.T = sandwich_symmetric(g, f, [&](double s, double d) { return g0_block(s, std::abs(d), m, which); });
    p.T.diagonal() += p.U;
    p.M1 = sandwich_symmetric(g, f, [&](double, double d) { return g1_block(d, m, which); });
    return p;
}

inline MOperator assemble_M(const SpectralPoint& z, const Factorization& f, const Grid& g, const DiracAlgebra& alg)
{
    if (z.z == 0.0)
        throw ConfigError("assemble_M: z = 0");
    MOperator op;
    op.z = z;
    // the singular part g(z) P is rank one and smooth, so it takes the plain trapezoid weights
    const VecX col = threshold_column(f, g, z.branch);
    op.g = I_unit * alg.m / (2.0 * z.z) * col.squaredNorm();
    op.M0 = resolvent_sandwich_regular(z.z, z.branch, f, g, alg.m);
    op.M0.diagonal() += sign_diagonal(f);
    op.M = op.M0 + (I_unit * alg.m / (2.0 * z.z)) * col * col.adjoint();
    return op;
}

struct ThresholdReport {
    Branch whichThreshold = Branch::positive;
    bool regular = true;
    bool rankOne = false;
    double h = 0.0;
    double epsRes = 0.0;
    double sigmaMin = 0.0;
    double sigmaSecond = 0.0;
    double norm = 0.0;
    std::optional<SpinorField> phi;
    std::optional<SpinorField> psi;
    VecX phiSym;
    cplx kappa0 = 0.0;
    cplx kappa0Alt = 0.0;
    cplx kappa1 = 0.0;
    Vec2 u = Vec2::Zero();
    cplx cP = 0.0;
    cplx scriptD = 0.0;
    cplx traceS1M1S1 = 0.0;
    double nondegeneracy = 0.0;
    cplx nondegeneracyLhs = 0.0;
    cplx volterra = 0.0;
};

struct ResonanceData {
    SpinorField psi;
    cplx kappa0;
    cplx kappa0Alt;
    cplx kappa1;
    Vec2 u;
};

/// psi = -G0 v^* phi + kappa0 e, with kappa0 = <T phi, v e> / ||v e||^2.
inline ResonanceData resonance_function(const VecX& phiSym, const ThresholdParts& parts, const Factorization& f,
                                        const Grid& g, const DiracAlgebra& alg)
{
    const Branch b = parts.which;
    const Vec2 e = threshold_vector(b);
    const VecX sw = sqrt_weights(g);
    const VecX phi = phiSym.cwiseQuotient(sw);
    ResonanceData r;

    // v^* phi sampled on the grid
    VecX vphi(2 * g.n);
    for (int i = 0; i < g.n; ++i)
        vphi.segment<2>(2 * i) = f.v[static_cast<std::size_t>(i)].adjoint() * phi.segment<2>(2 * i);

    const MatX G = nystrom_rows(g, all_nodes(g), [&](int i, int j, double s) {
        return g0_block(s, std::abs(g.node(i) - g.node(j)), alg.m, b);
    });
    const VecX g0vphi = G * vphi;

    // T phi as a function: U phi + int v G0 v^* phi
    const MatX TG = nystrom_rows(g, all_nodes(g), [&](int i, int j, double s) {
        return Mat2(f.v[static_cast<std::size_t>(i)] * g0_block(s, std::abs(g.node(i) - g.node(j)), alg.m, b) *
                    f.v[static_cast<std::size_t>(j)].adjoint());
    });
    const VecX Tphi = parts.U.cwiseProduct(phi) + TG * phi;
    cplx ip = 0.0;
    for (int i = 0; i < g.n; ++i)
        ip += g.weight(i) * (f.v[static_cast<std::size_t>(i)] * e).dot(Tphi.segment<2>(2 * i));
    r.kappa0 = ip / (parts.norm * parts.norm);
    r.kappa0Alt = parts.theta.dot(parts.T * phiSym) / parts.norm;

    Vec2 c = Vec2::Zero();
    r.u = Vec2::Zero();
    for (int i = 0; i < g.n; ++i) {
        c += g.weight(i) * vphi.segment<2>(2 * i);
        r.u += g.weight(i) * g.node(i) * vphi.segment<2>(2 * i);
    }
    const Vec2 s = I_unit * alg.alpha * c;
    r.kappa1 = e.dot(s) / 2.0;
    const double scale = std::max(s.norm(), 1e-300);
    if ((s - r.kappa1 * e).norm() > 1e-6 * scale + 1e-12)
        throw NumericalError("resonance_function: i alpha int v^* phi is not parallel to the threshold vector");

    r.psi = SpinorField(g.n);
    for (int i = 0; i < g.n; ++i)
        r.psi.set(i, -g0vphi.segment<2>(2 * i) + r.kappa0 * e);
    return r;
}

/// Tr(S1 M1 S1) for the unit vector phi (sqrt(w) basis).
inline cplx trace_s1m1s1(const VecX& phiSym, const ThresholdParts& parts)
{
    return phiSym.dot(parts.M1 * phiSym);
}

struct NondegeneracyCheck {
    cplx lhs;
    cplx rhs;
};

/// |kappa0|^2 - (im/2) Tr(S1 M1 S1) against |kappa0|^2 + |-kappa1/2 +- m(e.u)/2|^2.
inline NondegeneracyCheck nondegeneracy_crosscheck(const VecX& phiSym, const ThresholdParts& parts,
                                                   const Factorization& f, const Grid& g, const DiracAlgebra& alg)
{
    const ResonanceData r = resonance_function(phiSym, parts, f, g, alg);
    const double eps = branch_sign(parts.which);
    const Vec2 e = threshold_vector(parts.which);
    const cplx E = e.dot(r.u);
    const cplx X = -r.kappa1 / 2.0 + eps * alg.m / 2.0 * E;
    NondegeneracyCheck out;
    out.lhs = std::norm(r.kappa0) - I_unit * alg.m / 2.0 * trace_s1m1s1(phiSym, parts);
    out.rhs = std::norm(r.kappa0) + std::norm(X);
    return out;
}

/// Smallest two |eigenvalues| of the Hermitian QTQ on the range of Q, theta deflated.
struct QTQSpectrum {
    double sigmaMin;
    double sigmaSecond;
    VecX phi;
};

inline QTQSpectrum qtq_spectrum(const ThresholdParts& parts)
{
    const MatX Q = parts.Q();
    MatX A = Q * parts.T * Q;
    A = (A + A.adjoint()).eval() / 2.0;
    if (!parts.rankOne) {
        const double shift = 1.0 + A.cwiseAbs().rowwise().sum().maxCoeff();
        A += shift * parts.theta * parts.theta.adjoint();
    }
    Eigen::SelfAdjointEigenSolver<MatX> es(A);
    const auto& ev = es.eigenvalues();
    int i0 = 0;
    int i1 = -1;
    for (int k = 1; k < ev.size(); ++k)
        if (std::abs(ev(k)) < std::abs(ev(i0)))
            i0 = k;
    for (int k = 0; k < ev.size(); ++k)
        if (k != i0 && (i1 < 0 || std::abs(ev(k)) < std::abs(ev(i1))))
            i1 = k;
    return {std::abs(ev(i0)), std::abs(ev(i1)), es.eigenvectors().col(i0)};
}

inline double default_eps_res(const Grid& g, double cCal = 0.5) { return cCal * g.h; }

inline ThresholdReport classify_threshold(const Factorization& f, const Grid& g, const DiracAlgebra& alg, Branch which,
                                          double epsRes, const ThresholdParts* pre = nullptr)
{
    ThresholdParts local;
    if (!pre) {
        local = assemble_T_P_Q(f, g, alg, which);
        pre = &local;
    }
    const ThresholdParts& parts = *pre;
    ThresholdReport rep;
    rep.whichThreshold = which;
    rep.h = g.h;
    rep.epsRes = epsRes;
    rep.rankOne = parts.rankOne;
    rep.norm = parts.norm;
    const QTQSpectrum sp = qtq_spectrum(parts);
    rep.sigmaMin = sp.sigmaMin;
    rep.sigmaSecond = sp.sigmaSecond;
    rep.regular = parts.rankOne || sp.sigmaMin >= epsRes;
    if (!parts.rankOne)
        rep.cP = parts.cP(alg.m);
    if (rep.regular)
        return rep;
    if (sp.sigmaSecond < epsRes)
        throw NumericalError("dimension > 1 detected: grid or potential invalid");

    VecX phiSym = sp.phi / sp.phi.norm();
    ResonanceData r = resonance_function(phiSym, parts, f, g, alg);
    const Vec2 e = threshold_vector(which);

    // phase: the limit constant of psi at x = +L real and nonnegative
    cplx c = e.dot(r.psi.at(g.n - 1)) / 2.0;
    if (std::abs(c) < 1e-10) {
        int k = 0;
        for (int i = 1; i < r.psi.values.size(); ++i)
            if (std::abs(r.psi.values(i)) > std::abs(r.psi.values(k)))
                k = i;
        c = r.psi.values(k);
    }
    const cplx rot = std::abs(c) > 0.0 ? std::conj(c) / std::abs(c) : cplx(1.0);
    phiSym *= rot;
    r.psi.values *= rot;
    r.kappa0 *= rot;
    r.kappa0Alt *= rot;
    r.kappa1 *= rot;
    r.u *= rot;

    if (std::abs(r.kappa0 - r.kappa0Alt) > 1e-8 * (std::abs(r.kappa0) + std::abs(r.kappa0Alt)) + 1e-12)
        throw NumericalError("kappa0 normalizations disagree");

    rep.phiSym = phiSym;
    rep.phi = SpinorField(VecX(phiSym.cwiseQuotient(sqrt_weights(g))));
    rep.psi = r.psi;
    rep.kappa0 = r.kappa0;
    rep.kappa0Alt = r.kappa0Alt;
    rep.kappa1 = r.kappa1;
    rep.u = r.u;
    rep.traceS1M1S1 = trace_s1m1s1(phiSym, parts);
    rep.scriptD = (rep.traceS1M1S1 + 2.0 * I_unit / alg.m * std::norm(r.kappa0)) / rep.cP;
    const double eps = branch_sign(which);
    const cplx E = e.dot(r.u);
    const cplx X = -r.kappa1 / 2.0 + eps * alg.m / 2.0 * E;
    rep.nondegeneracy = std::norm(r.kappa0) + std::norm(X);
    rep.nondegeneracyLhs = std::norm(r.kappa0) - I_unit * alg.m / 2.0 * rep.traceS1M1S1;
    rep.volterra = r.kappa0 + X;
    if (std::abs(rep.volterra) <= 1e-8)
        throw NumericalError("resonance constant kappa0 + X vanishes");
    return rep;
}

} // namespace dirac1d
