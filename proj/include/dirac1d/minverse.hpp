#pragma once

#include "dirac1d/threshold.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <limits>
#include <vector>

namespace dirac1d {

struct DirectInverse {
    MatX Minv;
    double condition = 0.0;
    double residual = 0.0;
    bool illConditioned = false;
};

/// standard: LU in double; extended: LU in long double (oracle for ill-conditioned z).
enum class Precision { standard, extended };

/// Dense inverse of M(z) in the sqrt(w) basis; kernel_from_symmetric unwinds it.
inline DirectInverse invert_direct(const MOperator& op, Precision prec = Precision::standard)
{
    DirectInverse d;
    double rc = 0.0;
    if (prec == Precision::standard) {
        Eigen::PartialPivLU<MatX> lu(op.M);
        rc = lu.rcond();
        d.Minv = lu.inverse();
    } else {
        using MatL = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
        const MatL ml = op.M.cast<std::complex<long double>>();
        Eigen::PartialPivLU<MatL> lu(ml);
        rc = static_cast<double>(lu.rcond());
        d.Minv = lu.inverse().cast<cplx>();
    }
    if (!(rc > 0.0) || !std::isfinite(rc))
        throw NumericalError("invert_direct: singular M(z)");
    d.condition = 1.0 / rc;
    d.illConditioned = d.condition > 1e12;
    d.residual = (op.M * d.Minv - MatX::Identity(op.M.rows(), op.M.cols())).cwiseAbs().maxCoeff();
    return d;
}

struct FeshbachDecomposition {
    cplx h = 0.0;
    MatX D;
    Mat2 B = Mat2::Zero();
    cplx k = 0.0;
    cplx ell = 0.0;
    cplx ellBar = 0.0;
    cplx det = 0.0;
    cplx cP = 0.0;
    cplx scriptD = 0.0;
};

struct FeshbachResult {
    MatX Minv;
    FeshbachDecomposition decomp;
};

/// Regular threshold: M^{-1} = QDQ + (1/h)(P - P M0 QDQ - QDQ M0 P + QDQ M0 P M0 QDQ).
inline FeshbachResult feshbach_regular(const MOperator& op, const ThresholdParts& parts, double m)
{
    if (op.z.branch != parts.which)
        throw ConfigError("feshbach_regular: branch of M(z) and threshold differ");
    const Eigen::Index N = op.M.rows();
    FeshbachResult r;
    if (parts.rankOne) {
        Eigen::PartialPivLU<MatX> lu(op.M);
        r.Minv = lu.inverse();
        r.decomp.D = r.Minv;
        r.decomp.h = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    const VecX& th = parts.theta;
    const MatX P = th * th.adjoint();
    const MatX Q = MatX::Identity(N, N) - P;
    const MatX& M0 = op.M0;
    Eigen::PartialPivLU<MatX> lu(Q * M0 * Q + P);
    if (!(lu.rcond() > 1e-14))
        throw NumericalError("feshbach_regular: Q M0 Q not invertible on QL^2 (misclassified threshold?)");
    const MatX QDQ = lu.inverse() - P;
    const VecX M0th = M0 * th;
    const VecX a = QDQ * M0th;
    const Eigen::RowVectorXcd bt = th.adjoint() * M0 * QDQ;
    const cplx h = op.g + th.dot(M0th) - th.dot(M0 * a);
    const VecX left = th - a;
    const Eigen::RowVectorXcd right = th.adjoint() - bt;
    r.Minv = QDQ + (left * right) / h;
    r.decomp.h = h;
    r.decomp.D = QDQ;
    r.decomp.cP = parts.cP(m);
    return r;
}

/// Resonant threshold: Schur complement on S = P + S1 with B in the basis {phi, theta}.
inline FeshbachResult feshbach_resonant(const MOperator& op, const ThresholdParts& parts, const ThresholdReport& rep)
{
    if (rep.regular || rep.phiSym.size() == 0)
        throw ConfigError("feshbach_resonant: threshold report is not resonant");
    if (op.z.branch != parts.which)
        throw ConfigError("feshbach_resonant: branch of M(z) and threshold differ");
    const Eigen::Index N = op.M.rows();
    MatX E(N, 2);
    E.col(0) = rep.phiSym;
    E.col(1) = parts.theta;
    const MatX S = E * E.adjoint();
    const MatX Q1 = MatX::Identity(N, N) - S;
    const MatX& M0 = op.M0;
    Eigen::PartialPivLU<MatX> lu(Q1 * M0 * Q1 + S);
    if (!(lu.rcond() > 1e-14))
        throw NumericalError("feshbach_resonant: Q1 M0 Q1 not invertible");
    const MatX X = lu.inverse() - S;
    const MatX M0E = M0 * E;
    const MatX F = X * M0E;
    const MatX G = E.adjoint() * M0 * X;
    Mat2 B = E.adjoint() * M0 * E - E.adjoint() * M0 * F;
    B(1, 1) += op.g;
    FeshbachResult r;
    r.decomp.B = B;
    r.decomp.k = B(0, 0);
    r.decomp.h = B(1, 1);
    r.decomp.ell = B(1, 0);
    r.decomp.ellBar = B(0, 1);
    r.decomp.det = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
    r.decomp.cP = rep.cP;
    r.decomp.scriptD = rep.scriptD;
    r.decomp.D = X;
    const double scale = std::abs(B(0, 0) * B(1, 1)) + std::abs(B(0, 1) * B(1, 0));
    if (std::abs(r.decomp.det) < 1e-10 * std::max(scale, 1.0))
        throw NumericalError("feshbach_resonant: det(B) vanishes");
    const Mat2 d = B.inverse();
    r.Minv = X + (E - F) * d * (E.adjoint() - G);
    return r;
}

/// Inverse of QTQ on QL^2 (regular) or Q1 T Q1 on Q1 L^2 (resonant), embedded in the full space.
inline MatX threshold_inverse(const ThresholdParts& parts, const ThresholdReport& rep)
{
    const Eigen::Index N = parts.T.rows();
    MatX S = parts.P();
    if (!rep.regular)
        S += rep.phiSym * rep.phiSym.adjoint();
    const MatX Q = MatX::Identity(N, N) - S;
    Eigen::PartialPivLU<MatX> lu(Q * parts.T * Q + S);
    return lu.inverse() - S;
}

/// Largest z <= 0.5 m, halving, with ||M(z) - g(z)P - T|| ||D0|| <= 0.5.
inline double select_z0(const Factorization& f, const Grid& g, const DiracAlgebra& alg, const ThresholdParts& parts,
                        const ThresholdReport& rep, int maxHalvings = 12)
{
    const double d0 = spectral_norm(threshold_inverse(parts, rep));
    double z = 0.5 * alg.m;
    for (int k = 0; k <= maxHalvings; ++k, z /= 2) {
        const MOperator op = assemble_M({z, parts.which}, f, g, alg);
        const double r = spectral_norm(op.M0 - parts.T);
        if (r * d0 <= 0.5)
            return z;
    }
    return z * 2;
}

struct OrderRow {
    double z;
    double normMinv;
    double residual;
    double fittedOrder;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    LinearFit f;
    const double n = static_cast<double>(x.size());
    if (x.size() < 2)
        return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    const double cov = sxy - sx * sy / n;
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    f.slope = cov / vx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r2 = vy > 0.0 ? cov * cov / (vx * vy) : 1.0;
    return f;
}

/// Log-log fit of y against x (positive data only).
inline LinearFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    return fit_line(lx, ly);
}

struct OrderScan {
    std::vector<OrderRow> rows;
    LinearFit fit;
    bool inconclusive = false;
    bool resonant = false;
    cplx linearP = 0.0;
    cplx cP = 0.0;
};

/// Residual orders after removing the identified leading terms.
/// Regular: M^{-1} - QD0Q - z L1 with L1 extrapolated from two tiny z.
/// Resonant: M^{-1} - (1/(scriptD cP z)) S1.
inline OrderScan expansion_order_scan(const Factorization& f, const Grid& g, const DiracAlgebra& alg,
                                      const ThresholdParts& parts, const ThresholdReport& rep,
                                      const std::vector<double>& zGrid)
{
    OrderScan scan;
    scan.resonant = !rep.regular;
    scan.cP = rep.cP;
    auto minv = [&](double z) {
        return invert_direct(assemble_M({z, parts.which}, f, g, alg), Precision::extended).Minv;
    };
    std::vector<double> zs, rs;
    if (rep.regular) {
        const MatX QD0Q = threshold_inverse(parts, rep);
        const double z1 = 1e-2 * zGrid.front();
        const double z2 = 2e-2 * zGrid.front();
        const MatX a1 = (minv(z1) - QD0Q) / z1;
        const MatX a2 = (minv(z2) - QD0Q) / z2;
        const MatX L1 = (z2 * a1 - z1 * a2) / (z2 - z1);
        if (!parts.rankOne)
            scan.linearP = parts.theta.dot(L1 * parts.theta);
        for (double z : zGrid) {
            const MatX mi = minv(z);
            const double res = spectral_norm(mi - QD0Q - z * L1);
            scan.rows.push_back({z, spectral_norm(mi), res, 0.0});
        }
    } else {
        const MatX S1 = rep.phiSym * rep.phiSym.adjoint();
        const cplx lead = 1.0 / (rep.scriptD * rep.cP);
        for (double z : zGrid) {
            const MatX mi = minv(z);
            const double res = spectral_norm(mi - lead / z * S1);
            scan.rows.push_back({z, spectral_norm(mi), res, 0.0});
        }
    }
    for (std::size_t i = 0; i < scan.rows.size(); ++i) {
        zs.push_back(scan.rows[i].z);
        rs.push_back(scan.rows[i].residual);
        if (i > 0 && scan.rows[i].residual > 0.0 && scan.rows[i - 1].residual > 0.0)
            scan.rows[i].fittedOrder = std::log(scan.rows[i].residual / scan.rows[i - 1].residual) /
                                       std::log(scan.rows[i].z / scan.rows[i - 1].z);
    }
    scan.fit = fit_loglog(zs, rs);
    const double maxRes = *std::max_element(rs.begin(), rs.end());
    // a bounded resonant residual has no slope to fit
    scan.inconclusive = rep.regular && maxRes > 1e-12 && scan.fit.r2 < 0.9;
    return scan;
}

struct FeshbachCheckRow {
    double z;
    double relDeviation;
    double hAbs;
    double condition;
};

struct FeshbachCheck {
    bool resonant = false;
    double z0 = 0.0;
    std::vector<FeshbachCheckRow> rows;
    LinearFit hFit;
    /// Resonant: ||z M^{-1}(z) - (1/(scriptD cP)) S1|| / ||(1/(scriptD cP)) S1|| at the smallest z.
    double residueDeviation = 0.0;
};

/// Feshbach inverse against the extended-precision dense inverse at z = factor * z0.
inline FeshbachCheck feshbach_check(const Factorization& f, const Grid& g, const DiracAlgebra& alg,
                                    const ThresholdParts& parts, const ThresholdReport& rep,
                                    const std::vector<double>& factors = {1e-3, 1e-2, 1e-1})
{
    if (parts.rankOne)
        throw ConfigError("feshbach_check: v e vanishes, there is no threshold projection");
    FeshbachCheck c;
    c.resonant = !rep.regular;
    c.z0 = select_z0(f, g, alg, parts, rep);
    std::vector<double> zs, hs;
    for (double fac : factors) {
        const double z = fac * c.z0;
        const MOperator op = assemble_M({z, parts.which}, f, g, alg);
        const DirectInverse d = invert_direct(op, Precision::extended);
        const FeshbachResult fr = rep.regular ? feshbach_regular(op, parts, alg.m) : feshbach_resonant(op, parts, rep);
        const double rel = spectral_norm(fr.Minv - d.Minv) / spectral_norm(d.Minv);
        c.rows.push_back({z, rel, std::abs(fr.decomp.h), d.condition});
        zs.push_back(z);
        hs.push_back(std::abs(fr.decomp.h));
    }
    c.hFit = fit_loglog(zs, hs);
    if (c.resonant) {
        const double z = *std::min_element(zs.begin(), zs.end());
        const MatX lead = rep.phiSym * rep.phiSym.adjoint() / (rep.scriptD * rep.cP);
        const MatX mi = invert_direct(assemble_M({z, parts.which}, f, g, alg), Precision::extended).Minv;
        c.residueDeviation = spectral_norm(z * mi - lead) / spectral_norm(lead);
    }
    return c;
}

/// Log-spaced z-grid over [1e-3, 1e-1] z0.
inline std::vector<double> order_scan_grid(double z0, int count = 8)
{
    std::vector<double> zg;
    for (int k = 0; k < count; ++k)
        zg.push_back(z0 * std::pow(10.0, -3.0 + 2.0 * k / (count - 1)));
    return zg;
}

} // namespace dirac1d
