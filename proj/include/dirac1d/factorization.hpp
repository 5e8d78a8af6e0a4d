#pragma once

#include "dirac1d/lattice.hpp"

#include <Eigen/Eigenvalues>

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace dirac1d {

/// Description of the matrix potential V.
struct PotentialSpec {
    enum class Family { zero, exampleResonancePlus, exampleResonanceMinus, gaussianMatrix, scaled, tabulated };

    Family family = Family::zero;
    double delta = -4.0;
    /// gaussianMatrix: V(x) = sum_k A_k exp(-x^2 / w_k^2).
    std::vector<Mat2> amplitudes;
    std::vector<double> widths;
    std::shared_ptr<PotentialSpec> inner;
    double factor = 1.0;
    std::string path;
    bool allowNonSelfAdjoint = false;

    static PotentialSpec zero() { return {}; }
    static PotentialSpec resonance_plus(double delta)
    {
        PotentialSpec p;
        p.family = Family::exampleResonancePlus;
        p.delta = delta;
        return p;
    }
    static PotentialSpec resonance_minus(double delta)
    {
        PotentialSpec p;
        p.family = Family::exampleResonanceMinus;
        p.delta = delta;
        return p;
    }
    static PotentialSpec gaussian(const Mat2& a, double width)
    {
        PotentialSpec p;
        p.family = Family::gaussianMatrix;
        p.amplitudes = {a};
        p.widths = {width};
        return p;
    }
    static PotentialSpec scaled_of(const PotentialSpec& in, double factor)
    {
        PotentialSpec p;
        p.family = Family::scaled;
        p.inner = std::make_shared<PotentialSpec>(in);
        p.factor = factor;
        p.allowNonSelfAdjoint = in.allowNonSelfAdjoint;
        return p;
    }
    static PotentialSpec tabulated_file(const std::string& path)
    {
        PotentialSpec p;
        p.family = Family::tabulated;
        p.path = path;
        return p;
    }
};

/// Off-diagonal profile of the resonance examples: delta x <x>^{delta-2}.
inline double resonance_profile(double delta, double x)
{
    return delta * x * std::pow(jbracket(x), delta - 2.0);
}

/// Reads a tabulated potential; the file grid must match g node by node.
inline std::vector<Mat2> read_tabulated(const std::string& path, const Grid& g)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("tabulated potential: cannot open " + path);
    std::vector<Mat2> out;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
            continue;
        std::istringstream ss(line);
        double x = 0.0;
        double c[8];
        if (!(ss >> x))
            throw ConfigError("tabulated potential: malformed line " + std::to_string(lineNo));
        for (double& v : c)
            if (!(ss >> v))
                throw ConfigError("tabulated potential: expected 9 columns on line " + std::to_string(lineNo));
        std::string extra;
        if (ss >> extra)
            throw ConfigError("tabulated potential: extra columns on line " + std::to_string(lineNo));
        const int i = static_cast<int>(out.size());
        if (i >= g.n)
            throw ConfigError("tabulated potential: more rows than grid nodes");
        if (std::abs(x - g.node(i)) > 1e-12 * g.L)
            throw ConfigError("tabulated potential: node " + std::to_string(i) + " does not match the run grid");
        Mat2 v;
        v << cplx(c[0], c[1]), cplx(c[2], c[3]), cplx(c[4], c[5]), cplx(c[6], c[7]);
        out.push_back(v);
    }
    if (static_cast<int>(out.size()) != g.n)
        throw ConfigError("tabulated potential: row count differs from grid size");
    return out;
}

inline Mat2 potential_at(const PotentialSpec& p, double x)
{
    Mat2 v = Mat2::Zero();
    switch (p.family) {
    case PotentialSpec::Family::zero:
        break;
    case PotentialSpec::Family::exampleResonancePlus: {
        const double f = resonance_profile(p.delta, x);
        v(0, 1) = -I_unit * f;
        v(1, 0) = I_unit * f;
        break;
    }
    case PotentialSpec::Family::exampleResonanceMinus: {
        const double f = resonance_profile(p.delta, x);
        v(0, 1) = I_unit * f;
        v(1, 0) = -I_unit * f;
        break;
    }
    case PotentialSpec::Family::gaussianMatrix:
        if (p.amplitudes.size() != p.widths.size())
            throw ConfigError("gaussianMatrix: amplitudes and widths differ in length");
        for (std::size_t k = 0; k < p.amplitudes.size(); ++k)
            v += p.amplitudes[k] * std::exp(-x * x / (p.widths[k] * p.widths[k]));
        break;
    case PotentialSpec::Family::scaled:
        if (!p.inner)
            throw ConfigError("scaled potential without inner spec");
        v = p.factor * potential_at(*p.inner, x);
        break;
    case PotentialSpec::Family::tabulated:
        throw ConfigError("tabulated potential has no closed form");
    }
    return v;
}

inline bool is_hermitian(const Mat2& v, double tol = 1e-14)
{
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    return (v - v.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline std::vector<Mat2> eval_potential(const PotentialSpec& p, const Grid& g)
{
    std::vector<Mat2> out;
    if (p.family == PotentialSpec::Family::tabulated) {
        out = read_tabulated(p.path, g);
    } else if (p.family == PotentialSpec::Family::scaled && p.inner &&
               p.inner->family == PotentialSpec::Family::tabulated) {
        out = read_tabulated(p.inner->path, g);
        for (auto& v : out)
            v *= p.factor;
    } else {
        out.reserve(static_cast<std::size_t>(g.n));
        for (int i = 0; i < g.n; ++i)
            out.push_back(potential_at(p, g.node(i)));
    }
    for (int i = 0; i < g.n; ++i) {
        const Mat2& v = out[static_cast<std::size_t>(i)];
        if (!v.allFinite())
            throw ConfigError("potential: non-finite value at node " + std::to_string(i));
        if (!p.allowNonSelfAdjoint && !is_hermitian(v))
            throw ConfigError("potential: not self-adjoint at node " + std::to_string(i));
    }
    return out;
}

/// Warnings about truncation: max |V| on |x| > L/2 should stay below 1e-8.
inline std::vector<std::string> decay_warnings(const std::vector<Mat2>& V, const Grid& g)
{
    double outer = 0.0;
    for (int i = 0; i < g.n; ++i)
        if (std::abs(g.node(i)) > g.L / 2)
            outer = std::max(outer, V[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff());
    std::vector<std::string> w;
    if (outer >= 1e-8) {
        std::ostringstream os;
        os << "max |V| on |x| > L/2 is " << outer << " (box policy asks for < 1e-8)";
        w.push_back(os.str());
    }
    return w;
}

/// Pointwise V = v^* U v with v = diag(eta) B, eta_j = |lambda_j|^{1/2}.
struct Factorization {
    std::vector<Mat2> v;
    std::vector<Eigen::Vector2d> U;

    int size() const { return static_cast<int>(v.size()); }
    Mat2 reconstruct(int i) const
    {
        const auto& vi = v[static_cast<std::size_t>(i)];
        return vi.adjoint() * U[static_cast<std::size_t>(i)].cast<cplx>().asDiagonal() * vi;
    }
};

inline Factorization factorize(const std::vector<Mat2>& V)
{
    Factorization f;
    f.v.reserve(V.size());
    f.U.reserve(V.size());
    for (std::size_t i = 0; i < V.size(); ++i) {
        const Mat2& a = V[i];
        if (!is_hermitian(a, 1e-12))
            throw ConfigError("factorize: V is not Hermitian at node " + std::to_string(i));
        const Mat2 h = (a + a.adjoint()) / 2.0;
        const double scale = h.cwiseAbs().maxCoeff();
        Eigen::Vector2d lam;
        Mat2 vecs;
        if (std::abs(h(0, 1)) <= 1e-15 * scale && std::abs(h(0, 0) - h(1, 1)) <= 1e-15 * scale) {
            lam << h(0, 0).real(), h(1, 1).real();
            vecs.setIdentity();
        } else {
            Eigen::SelfAdjointEigenSolver<Mat2> es(h);
            // ascending from the solver, stored descending
            lam << es.eigenvalues()(1), es.eigenvalues()(0);
            vecs.col(0) = es.eigenvectors().col(1);
            vecs.col(1) = es.eigenvectors().col(0);
        }
        Mat2 vi;
        Eigen::Vector2d ui;
        for (int j = 0; j < 2; ++j) {
            Vec2 b = vecs.col(j);
            const int k = std::abs(b(1)) > std::abs(b(0)) * (1.0 + 1e-10) ? 1 : 0;
            if (std::abs(b(k)) > 0.0)
                b *= std::conj(b(k)) / std::abs(b(k));
            b(k) = std::abs(b(k));
            const double eta = std::sqrt(std::abs(lam(j)));
            vi.row(j) = eta * b.adjoint();
            ui(j) = lam(j) >= 0.0 ? 1.0 : -1.0;
        }
        f.v.push_back(vi);
        f.U.push_back(ui);
    }
    return f;
}

} // namespace dirac1d
