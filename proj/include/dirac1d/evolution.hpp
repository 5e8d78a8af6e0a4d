#pragma once

#include "dirac1d/factorization.hpp"
#include "dirac1d/freedirac.hpp"
#include "dirac1d/minverse.hpp"
#include "dirac1d/nystrom.hpp"
#include "dirac1d/parallel.hpp"
#include "dirac1d/quadrature.hpp"
#include "dirac1d/threshold.hpp"

#include <Eigen/Eigenvalues>

#include <optional>
#include <string>
#include <vector>

namespace dirac1d {

enum class BranchPolicy { positiveSpectrum, negativeSpectrum, both };

inline std::vector<Branch> branches_of(BranchPolicy p)
{
    switch (p) {
    case BranchPolicy::positiveSpectrum:
        return {Branch::positive};
    case BranchPolicy::negativeSpectrum:
        return {Branch::negative};
    case BranchPolicy::both:
        return {Branch::positive, Branch::negative};
    }
    return {};
}

struct PropagatorConfig {
    std::vector<double> times;
    std::vector<FrequencyCutoff> cutoffs;
    BranchPolicy branches = BranchPolicy::positiveSpectrum;
    QuadConfig quad;
    double zHole = 1e-4;
};

/// Low-energy block plus dyadic blocks 1..jmax; they sum to the band limit with zmax = 2^(jmax+1).
inline std::vector<FrequencyCutoff> partition_cutoffs(int jmax)
{
    std::vector<FrequencyCutoff> c{FrequencyCutoff::low_energy(2.0)};
    for (int j = 1; j <= jmax; ++j)
        c.push_back(FrequencyCutoff::dyadic_block(j));
    return c;
}

/// Largest deviation of sum chi from the band limit of the largest block, sampled on [0, zmax].
inline double partition_defect(const std::vector<FrequencyCutoff>& cuts, int jmax, int samples = 2001)
{
    const FrequencyCutoff band = FrequencyCutoff::band_limit(jmax);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double z = band.zmax() * k / (samples - 1);
        double s = 0.0;
        for (const auto& c : cuts)
            s += c.value(z);
        worst = std::max(worst, std::abs(s - band.value(z)));
    }
    return worst;
}

/// Interior probe nodes: |x| <= L/2, every stride-th node starting at offset.
inline std::vector<int> probe_nodes(const Grid& g, int stride = 4, int offset = 0)
{
    std::vector<int> p;
    for (int i = 0; i < g.n; ++i)
        if (std::abs(g.node(i)) <= g.L / 2 + 1e-12 && ((i - offset) % stride + stride) % stride == 0)
            p.push_back(i);
    return p;
}

/// Propagator kernels restricted to probe pairs: K[t] is 2P x 2P with block (p, q) = K_t(x_p, x_q).
struct ProbeKernels {
    std::vector<int> probes;
    std::vector<double> times;
    std::vector<MatX> K;
    int nodes = 0;
    int skipped = 0;
    double errorEstimate = 0.0;
    std::vector<std::string> warnings;

    Mat2 block(std::size_t t, int p, int q) const { return K[t].block<2, 2>(2 * p, 2 * q); }
};

namespace detail {

/// Rows p of the action matrix of x -> R0(x_p, x) v^*(x), columns divided by sqrt(w).
inline MatX stone_left(double z, Branch b, const Factorization& f, const Grid& g, const std::vector<int>& probes,
                       double m)
{
    MatX a = nystrom_rows(g, probes, [&](int i, int j, double s) -> Mat2 {
        return resolvent_block(z, b, s, std::abs(g.node(i) - g.node(j)), m) *
               f.v[static_cast<std::size_t>(j)].adjoint();
    });
    for (int j = 0; j < g.n; ++j)
        a.middleCols<2>(2 * j) /= std::sqrt(g.weight(j));
    return a;
}

/// Columns q of x -> v(x) R0(x, y_q), rows divided by sqrt(w).
inline MatX stone_right(double z, Branch b, const Factorization& f, const Grid& g, const std::vector<int>& probes,
                        double m)
{
    MatX a = nystrom_rows(g, probes, [&](int q, int j, double s) -> Mat2 {
        return (f.v[static_cast<std::size_t>(j)] * resolvent_block(z, b, -s, std::abs(g.node(q) - g.node(j)), m))
            .transpose();
    });
    MatX r = a.transpose();
    for (int j = 0; j < g.n; ++j)
        r.middleRows<2>(2 * j) /= std::sqrt(g.weight(j));
    return r;
}

/// Free Stone integrand at probe pairs, t = 0.
inline MatX stone_free(double z, Branch b, const Grid& g, const std::vector<int>& probes, double m)
{
    const int P = static_cast<int>(probes.size());
    MatX out(2 * P, 2 * P);
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q) {
            const double d = g.node(probes[static_cast<std::size_t>(p)]) - g.node(probes[static_cast<std::size_t>(q)]);
            out.block<2, 2>(2 * p, 2 * q) = free_evolution_integrand(z, 0.0, sgn(d), std::abs(d), m, b);
        }
    return out;
}

/// int R0(x_p, a) V(a) R0(a, y_q) da for probe pairs whose kink stencils overlap; other pairs get 0.
/// The corrections of both kinks are added to one trapezoid weight.
inline MatX stone_local_pairs(double z, Branch b, const std::vector<Mat2>& V, const Grid& g,
                              const std::vector<int>& probes, double m)
{
    const int P = static_cast<int>(probes.size());
    MatX out = MatX::Zero(2 * P, 2 * P);
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q) {
            const int ip = probes[static_cast<std::size_t>(p)];
            const int iq = probes[static_cast<std::size_t>(q)];
            if (std::abs(ip - iq) > 6)
                continue;
            const double x = g.node(ip);
            const double y = g.node(iq);
            auto value = [&](int a, double side) -> Mat2 {
                // side != 0: limit of a -> x_a from that side, for kinks sitting at x_a
                const double xa = g.node(a);
                const double s1 = a == ip ? -side : sgn(x - xa);
                const double s2 = a == iq ? side : sgn(xa - y);
                return resolvent_block(z, b, s1, std::abs(x - xa), m) * V[static_cast<std::size_t>(a)] *
                       resolvent_block(z, b, s2, std::abs(xa - y), m);
            };
            Mat2 acc = Mat2::Zero();
            for (int a = 0; a < g.n; ++a) {
                double w = g.weight(a) + kink_weight(g, ip, a);
                if (iq != ip)
                    w += kink_weight(g, iq, a);
                const bool atKink = (a == ip && kink_row(g, ip)) || (a == iq && kink_row(g, iq));
                if (atKink) {
                    acc += w * (value(a, 1.0) + value(a, -1.0)) / 2.0 +
                           g.h * kink_diag * (value(a, 1.0) + value(a, -1.0));
                } else {
                    acc += w * value(a, 0.0);
                }
            }
            out.block<2, 2>(2 * p, 2 * q) = acc;
        }
    return out;
}

/// Same pairs through the factored product L U R, to be replaced by stone_local_pairs.
inline MatX factored_local_pairs(const MatX& L, const VecX& u, const MatX& R, const std::vector<int>& probes)
{
    const int P = static_cast<int>(probes.size());
    MatX out = MatX::Zero(2 * P, 2 * P);
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q)
            if (std::abs(probes[static_cast<std::size_t>(p)] - probes[static_cast<std::size_t>(q)]) <= 6)
                out.block<2, 2>(2 * p, 2 * q) = L.middleRows<2>(2 * p) * u.asDiagonal() * R.middleCols<2>(2 * q);
    return out;
}

} // namespace detail

/// Stone's formula with the symmetric resolvent identity, evaluated on probe pairs for all times at once.
/// f == nullptr means V = 0.
inline ProbeKernels stone_probe_kernels(const PropagatorConfig& cfg, const Factorization* f, const Grid& g,
                                        const DiracAlgebra& alg, const std::vector<int>& probes)
{
    if (cfg.times.empty())
        throw ConfigError("stone propagator: empty time list");
    if (cfg.cutoffs.empty())
        throw ConfigError("stone propagator: no cut-offs");
    ProbeKernels out;
    out.probes = probes;
    out.times = cfg.times;
    const int P = static_cast<int>(probes.size());
    out.K.assign(cfg.times.size(), MatX::Zero(2 * P, 2 * P));
    double tmax = 0.0;
    for (double t : cfg.times)
        tmax = std::max(tmax, std::abs(t));
    // phases e^{iz(|x_p - x| + |x' - y_q|)} with x, x' anywhere on the box
    const double rmax = f ? 3.0 * g.L : g.L;
    const cplx stoneFactor = 1.0 / (2.0 * pi * I_unit);

    struct Job {
        double z;
        double w;
        Branch b;
    };
    std::vector<Job> jobs;
    for (const auto& c : cfg.cutoffs)
        for (Branch b : branches_of(cfg.branches))
            for (const auto& nd : cutoff_nodes(c, alg.m, tmax, rmax, cfg.quad, cfg.zHole))
                jobs.push_back({nd.z, nd.w, b});
    out.nodes = static_cast<int>(jobs.size());

    struct NodeResult {
        MatX A;
        bool ok = true;
        double lost = 0.0;
    };
    std::vector<NodeResult> res(jobs.size());
    std::vector<Mat2> Vrec;
    if (f)
        for (int i = 0; i < f->size(); ++i)
            Vrec.push_back(f->reconstruct(i));
    parallel_for(static_cast<int>(jobs.size()), [&](int k) {
        const Job& jb = jobs[static_cast<std::size_t>(k)];
        NodeResult& r = res[static_cast<std::size_t>(k)];
        r.A = detail::stone_free(jb.z, jb.b, g, probes, alg.m);
        if (!f)
            return;
        // negative z gives the lower boundary value, as Stone's formula needs
        const MOperator op = assemble_M({jb.z, jb.b}, *f, g, alg);
        Eigen::PartialPivLU<MatX> lu(op.M);
        if (!(lu.rcond() > 1e-15)) {
            r.ok = false;
            r.lost = std::abs(jb.w) * r.A.cwiseAbs().maxCoeff();
            r.A.setZero();
            return;
        }
        const MatX L = detail::stone_left(jb.z, jb.b, *f, g, probes, alg.m);
        const MatX R = detail::stone_right(jb.z, jb.b, *f, g, probes, alg.m);
        const double lam = std::sqrt(jb.z * jb.z + alg.m * alg.m);
        MatX corr = L * lu.solve(R);
        {
            // the identity part U of M^{-1} leaves a single integral with two kinks
            corr += detail::stone_local_pairs(jb.z, jb.b, Vrec, g, probes, alg.m) -
                    detail::factored_local_pairs(L, sign_diagonal(*f), R, probes);
        }
        r.A -= stoneFactor * (jb.z / lam) * corr;
    });

    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const Job& jb = jobs[k];
        const NodeResult& r = res[k];
        if (!r.ok) {
            ++out.skipped;
            out.errorEstimate += r.lost;
            continue;
        }
        const double lam = std::sqrt(jb.z * jb.z + alg.m * alg.m);
        for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
            const cplx ph = std::exp(-I_unit * (branch_sign(jb.b) * cfg.times[ti] * lam));
            out.K[ti] += (jb.w * ph) * r.A;
        }
    }
    if (out.skipped > 0)
        out.warnings.push_back(std::to_string(out.skipped) + " z-nodes skipped: M(z) not invertible");
    return out;
}

/// Single kernel entry K_t(x_i, x_j) via Stone's formula.
inline Mat2 stone_propagator(double t, int i, int j, PropagatorConfig cfg, const Factorization* f, const Grid& g,
                             const DiracAlgebra& alg)
{
    cfg.times = {t};
    if (i == j) {
        const ProbeKernels pk = stone_probe_kernels(cfg, f, g, alg, {i});
        return pk.block(0, 0, 0);
    }
    const ProbeKernels pk = stone_probe_kernels(cfg, f, g, alg, {i, j});
    return pk.block(0, 0, 1);
}

/// Dense oracle: H = i alpha d/dx + beta m + V on the box with a Fourier derivative and
/// twisted boundary conditions psi(x + 2L) = e^{i theta} psi(x), averaged over theta.
/// Nodes x_0 .. x_{n-2}; x_{n-1} = L is identified with x_0 = -L.
struct EigenOracle {
    struct Twist {
        double theta = 0.0;
        Eigen::VectorXd evals;
        MatX evecs;
    };
    int N = 0;
    double h = 0.0;
    std::vector<Twist> twists;
    std::vector<double> gapEigenvalues;
    std::vector<double> edgeEigenvalues;

    int periodic_index(int i) const { return i % N; }
};

/// Derivative on N nodes x_a with Bloch phase theta over the period.
inline MatX fourier_derivative(const std::vector<double>& x, double period, double theta)
{
    const int N = static_cast<int>(x.size());
    MatX E(N, N);
    VecX k(N);
    for (int a = 0; a < N; ++a) {
        int p = a <= N / 2 ? a : a - N;
        // the Nyquist mode of an even N has no partner
        if (N % 2 == 0 && a == N / 2 && theta == 0.0)
            p = 0;
        const double kp = (2.0 * pi * p + theta) / period;
        k(a) = I_unit * kp;
        for (int b = 0; b < N; ++b)
            E(b, a) = std::exp(I_unit * (kp * (x[static_cast<std::size_t>(b)] - x.front()))) / std::sqrt(static_cast<double>(N));
    }
    return E * k.asDiagonal() * E.adjoint();
}

inline EigenOracle build_eigen_oracle(const std::vector<Mat2>& V, const Grid& g, const DiracAlgebra& alg, double epsRes,
                                      int twists = 8)
{
    if (twists < 1)
        throw ConfigError("eigensolve oracle: twists must be >= 1");
    EigenOracle o;
    o.N = g.n - 1;
    o.h = g.h;
    const int N = o.N;
    const std::vector<double> xs(g.x.begin(), g.x.begin() + N);
    for (int tw = 0; tw < twists; ++tw) {
        const double theta = twists == 1 ? 0.0 : 2.0 * pi * (tw + 0.5) / twists - pi;
        const MatX D = fourier_derivative(xs, 2.0 * g.L, theta);
        MatX H = MatX::Zero(2 * N, 2 * N);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                H(2 * a, 2 * b) = I_unit * alg.alpha(0, 0) * D(a, b);
                H(2 * a + 1, 2 * b + 1) = I_unit * alg.alpha(1, 1) * D(a, b);
            }
        for (int a = 0; a < N; ++a) {
            Mat2 blk = alg.m * alg.beta;
            if (!V.empty())
                blk += V[static_cast<std::size_t>(a)];
            H.block<2, 2>(2 * a, 2 * a) += blk;
        }
        H = (H + H.adjoint()).eval() / 2.0;
        Eigen::SelfAdjointEigenSolver<MatX> es(H);
        if (es.info() != Eigen::Success)
            throw NumericalError("eigensolve failed");
        o.twists.push_back({theta, es.eigenvalues(), es.eigenvectors()});
    }
    // gap states are localized, so one twist lists them
    const auto& ev = o.twists.front().evals;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        const double l = ev(k);
        if (std::abs(l) < alg.m - 3.0 * epsRes)
            o.gapEigenvalues.push_back(l);
        else if (std::abs(std::abs(l) - alg.m) < 3.0 * epsRes)
            o.edgeEigenvalues.push_back(l);
    }
    return o;
}

/// Weight chi(z(lambda)) e^{-it lambda} for an eigenvalue; gap states get 0.
inline cplx oracle_weight(double lambda, double t, const FrequencyCutoff& cut, BranchPolicy policy, double m)
{
    if (std::abs(lambda) < m)
        return 0.0;
    if (policy == BranchPolicy::positiveSpectrum && lambda < 0.0)
        return 0.0;
    if (policy == BranchPolicy::negativeSpectrum && lambda > 0.0)
        return 0.0;
    const double z = std::sqrt(std::max(0.0, lambda * lambda - m * m));
    return cut.value(z) * std::exp(-I_unit * (t * lambda));
}

/// Kernel of e^{-itH} chi(H) P_ac on probe pairs from the oracle.
inline MatX eigensolve_probe_kernel(const EigenOracle& o, double t, const std::vector<FrequencyCutoff>& cuts,
                                    BranchPolicy policy, const std::vector<int>& probes, double m)
{
    const int P = static_cast<int>(probes.size());
    MatX out = MatX::Zero(2 * P, 2 * P);
    for (const auto& tw : o.twists) {
        const Eigen::Index K = tw.evals.size();
        MatX U(2 * P, K);
        for (int p = 0; p < P; ++p) {
            const int i = probes[static_cast<std::size_t>(p)];
            const int a = o.periodic_index(i);
            // node n-1 is one period past node 0
            const cplx ph = i >= o.N ? std::exp(I_unit * tw.theta) : cplx(1.0);
            U.middleRows<2>(2 * p) = ph * tw.evecs.middleRows<2>(2 * a);
        }
        VecX d(K);
        for (Eigen::Index k = 0; k < K; ++k) {
            cplx s = 0.0;
            for (const auto& c : cuts)
                s += oracle_weight(tw.evals(k), t, c, policy, m);
            d(k) = s;
        }
        out += U * d.asDiagonal() * U.adjoint();
    }
    return out / (o.h * static_cast<double>(o.twists.size()));
}

/// Full kernel on the grid (node n-1 repeats node 0 up to the twist phase).
inline BlockKernel eigensolve_propagator(const EigenOracle& o, const Grid& g, double t,
                                         const std::vector<FrequencyCutoff>& cuts, BranchPolicy policy, double m)
{
    return BlockKernel(eigensolve_probe_kernel(o, t, cuts, policy, all_nodes(g), m), false);
}

/// Rank-one resonant term -(1/(2 pi i cP D)) (-2 pi i)^{1/2} e^{-imt} (mt)^{-1/2} psi(x_i) psi(x_j)^*.
/// The overall sign is fixed by the large-t limit of the Stone propagator.
/// The negative threshold uses the conjugate stationary phase.
inline MatX ft_plus_probe_kernel(double t, const ThresholdReport& rep, const std::vector<int>& probes, double m)
{
    if (t == 0.0)
        throw ConfigError("ft_plus: t = 0");
    if (rep.regular || !rep.psi)
        throw ConfigError("ft_plus: threshold is not resonant");
    const double eps = branch_sign(rep.whichThreshold);
    const cplx root = std::sqrt(cplx(0.0, -2.0 * pi * eps));
    const cplx pre = -root * std::exp(-I_unit * (eps * m * t)) / std::sqrt(cplx(m * t)) /
                     (2.0 * pi * I_unit * rep.cP * rep.scriptD);
    const int P = static_cast<int>(probes.size());
    VecX col(2 * P);
    for (int p = 0; p < P; ++p)
        col.segment<2>(2 * p) = rep.psi->at(probes[static_cast<std::size_t>(p)]);
    return pre * col * col.adjoint();
}

inline Mat2 ft_plus_kernel(double t, int i, int j, const ThresholdReport& rep, double m)
{
    return ft_plus_probe_kernel(t, rep, {i, j}, m).block<2, 2>(0, i == j ? 0 : 2);
}

/// F_t^0 on probe pairs for the given cut-off.
inline MatX ft0_probe_kernel(double t, const FrequencyCutoff& cut, const DiracAlgebra& alg, const QuadConfig& quad,
                             const Grid& g, const std::vector<int>& probes)
{
    const int P = static_cast<int>(probes.size());
    MatX out(2 * P, 2 * P);
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q)
            out.block<2, 2>(2 * p, 2 * q) =
                ft0_kernel(t, g.node(probes[static_cast<std::size_t>(p)]), g.node(probes[static_cast<std::size_t>(q)]),
                           cut, alg, quad);
    return out;
}

enum class DecayWeight { none, xy, xmy };
enum class Subtraction { none, ft0, ftPlus };

struct DecayRow {
    double t;
    double supNorm;
    double weightedSupNorm;
    double supAfterSubtraction;
};

struct DecayScan {
    std::vector<DecayRow> rows;
    LinearFit fit;
    bool inconclusive = false;
    DecayWeight weight = DecayWeight::none;
    Subtraction subtract = Subtraction::none;
    int nodes = 0;
    int skipped = 0;
    std::vector<std::string> warnings;
};

inline double decay_weight(DecayWeight w, double x, double y)
{
    switch (w) {
    case DecayWeight::none:
        return 1.0;
    case DecayWeight::xy:
        return jbracket(x) * jbracket(y);
    case DecayWeight::xmy:
        return jbracket(x - y);
    }
    return 1.0;
}

struct DecayOptions {
    DecayWeight weight = DecayWeight::none;
    Subtraction subtract = Subtraction::none;
    int probeStride = 4;
    int probeOffset = 0;
};

/// Sup over probe pairs of the 2x2 operator norm of the block, divided by the weight.
inline double probe_sup(const MatX& K, const Grid& g, const std::vector<int>& probes, DecayWeight w)
{
    double s = 0.0;
    const int P = static_cast<int>(probes.size());
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q) {
            const Mat2 b = K.block<2, 2>(2 * p, 2 * q);
            const double nb = Eigen::JacobiSVD<Mat2>(b).singularValues()(0);
            s = std::max(s, nb / decay_weight(w, g.node(probes[static_cast<std::size_t>(p)]),
                                              g.node(probes[static_cast<std::size_t>(q)])));
        }
    return s;
}

/// Decay table from precomputed probe kernels; the fit uses the sup after subtraction.
inline DecayScan decay_scan_from(const ProbeKernels& pk, const PropagatorConfig& cfg, const Grid& g,
                                 const DiracAlgebra& alg, const DecayOptions& opt, const ThresholdReport* rep = nullptr)
{
    if (opt.subtract == Subtraction::ftPlus && (!rep || rep->regular))
        throw ConfigError("decay_scan: F_t^+ subtraction needs a resonant threshold report");
    if (opt.subtract == Subtraction::ft0 && cfg.cutoffs.size() != 1)
        throw ConfigError("decay_scan: F_t^0 subtraction needs a single cut-off");
    const std::vector<int>& probes = pk.probes;
    DecayScan scan;
    scan.weight = opt.weight;
    scan.subtract = opt.subtract;
    scan.nodes = pk.nodes;
    scan.skipped = pk.skipped;
    scan.warnings = pk.warnings;
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < pk.times.size(); ++k) {
        const double t = pk.times[k];
        const MatX& K = pk.K[k];
        DecayRow row{t, probe_sup(K, g, probes, DecayWeight::none), probe_sup(K, g, probes, opt.weight), 0.0};
        switch (opt.subtract) {
        case Subtraction::none:
            row.supAfterSubtraction = row.weightedSupNorm;
            break;
        case Subtraction::ft0:
            row.supAfterSubtraction =
                probe_sup(K - ft0_probe_kernel(t, cfg.cutoffs.front(), alg, cfg.quad, g, probes), g, probes, opt.weight);
            break;
        case Subtraction::ftPlus:
            row.supAfterSubtraction = probe_sup(K - ft_plus_probe_kernel(t, *rep, probes, alg.m), g, probes, opt.weight);
            break;
        }
        scan.rows.push_back(row);
        ts.push_back(std::abs(t));
        ys.push_back(row.supAfterSubtraction);
    }
    scan.fit = fit_loglog(ts, ys);
    scan.inconclusive = scan.fit.r2 < 0.9;
    return scan;
}

inline void check_decay_times(const std::vector<double>& times)
{
    if (times.size() < 5)
        throw ConfigError("decay_scan: at least 5 times required");
    for (double t : times)
        if (t < 4.0)
            throw ConfigError("decay_scan: times must be >= 4");
}

/// Decay rates of the selected kernel over the time list.
inline DecayScan decay_scan(const PropagatorConfig& cfg, const Factorization* f, const Grid& g, const DiracAlgebra& alg,
                            const DecayOptions& opt, const ThresholdReport* rep = nullptr)
{
    check_decay_times(cfg.times);
    const ProbeKernels pk = stone_probe_kernels(cfg, f, g, alg, probe_nodes(g, opt.probeStride, opt.probeOffset));
    return decay_scan_from(pk, cfg, g, alg, opt, rep);
}

/// Per-dyadic sup kernels against min(2^j, t^{-1/2} 2^{j/2}) and the weighted envelope
/// t^{-3/2} 2^{j/2} w(x, y); w = <x - y> for V = 0 and max(<x>, <y>) otherwise.
inline std::vector<EnvelopeRow> high_energy_scan(const std::vector<int>& jList, const std::vector<double>& tList,
                                                 const Factorization* f, const Grid& g, const DiracAlgebra& alg,
                                                 const QuadConfig& quad = {}, int probeStride = 4)
{
    std::vector<EnvelopeRow> rows;
    const std::vector<int> probes = probe_nodes(g, probeStride);
    for (int j : jList) {
        if (j < 1)
            throw ConfigError("high_energy_scan: dyadic index must be >= 1");
        PropagatorConfig cfg;
        cfg.times = tList;
        cfg.cutoffs = {FrequencyCutoff::dyadic_block(j)};
        cfg.quad = quad;
        const ProbeKernels pk = stone_probe_kernels(cfg, f, g, alg, probes);
        for (std::size_t k = 0; k < tList.size(); ++k) {
            const double t = std::abs(tList[k]);
            EnvelopeRow r{};
            r.j = j;
            r.t = tList[k];
            const double dj = std::ldexp(1.0, j);
            r.envelope = std::min(dj, std::sqrt(dj) / std::sqrt(t));
            r.weightedEnvelope = std::sqrt(dj) * std::pow(t, -1.5);
            double s = 0.0, ws = 0.0;
            const int P = static_cast<int>(probes.size());
            for (int p = 0; p < P; ++p)
                for (int q = 0; q < P; ++q) {
                    const double x = g.node(probes[static_cast<std::size_t>(p)]);
                    const double y = g.node(probes[static_cast<std::size_t>(q)]);
                    const double nb = Eigen::JacobiSVD<Mat2>(pk.block(k, p, q)).singularValues()(0);
                    const double w = f ? std::max(jbracket(x), jbracket(y)) : jbracket(x - y);
                    s = std::max(s, nb);
                    ws = std::max(ws, nb / w);
                }
            r.sup = s;
            r.ratio = s / r.envelope;
            r.weightedSup = ws;
            r.weightedRatio = ws / r.weightedEnvelope;
            r.curvatureRatio = s / std::min(dj, std::pow(dj, 1.5) / (alg.m * std::sqrt(t)));
            rows.push_back(r);
        }
    }
    return rows;
}

} // namespace dirac1d
