#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirac1d {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;
inline const cplx I_unit{0.0, 1.0};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Japanese bracket sqrt(1 + x^2).
inline double jbracket(double x) { return std::sqrt(1.0 + x * x); }

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Uniform lattice on [-L, L] with composite trapezoid weights.
struct Grid {
    double L = 0.0;
    int n = 0;
    double h = 0.0;
    std::vector<double> x;
    std::vector<double> w;

    double node(int i) const { return x[static_cast<std::size_t>(i)]; }
    double weight(int i) const { return w[static_cast<std::size_t>(i)]; }
    int dim() const { return 2 * n; }
};

inline Grid build_grid(double L, int n)
{
    if (!(L > 0.0) || !std::isfinite(L))
        throw ConfigError("grid: L must be positive, got " + std::to_string(L));
    if (n < 16)
        throw ConfigError("grid: n must be at least 16, got " + std::to_string(n));
    Grid g;
    g.L = L;
    g.n = n;
    g.h = 2.0 * L / (n - 1);
    g.x.resize(static_cast<std::size_t>(n));
    g.w.assign(static_cast<std::size_t>(n), g.h);
    for (int i = 0; i < n; ++i) {
        // fill from both ends so the node set is symmetric about 0
        const int j = n - 1 - i;
        g.x[static_cast<std::size_t>(i)] = i <= j ? -L + i * g.h : L - j * g.h;
    }
    g.w.front() = g.h / 2;
    g.w.back() = g.h / 2;
    return g;
}

/// Dirac matrices alpha = diag(-1, 1), beta = [[0,1],[1,0]] with mass m.
struct DiracAlgebra {
    double m = 1.0;
    Mat2 alpha;
    Mat2 beta;
    Mat2 id;

    explicit DiracAlgebra(double mass = 1.0) : m(mass)
    {
        if (!(mass > 0.0))
            throw ConfigError("mass must be positive");
        alpha << -1.0, 0.0, 0.0, 1.0;
        beta << 0.0, 1.0, 1.0, 0.0;
        id.setIdentity();
    }
};

/// Spinor samples; entry 2i+a is component a at node i.
struct SpinorField {
    VecX values;

    SpinorField() = default;
    explicit SpinorField(int n) : values(VecX::Zero(2 * n)) {}
    explicit SpinorField(VecX v) : values(std::move(v)) {}

    int size() const { return static_cast<int>(values.size() / 2); }
    Vec2 at(int i) const { return values.segment<2>(2 * i); }
    void set(int i, const Vec2& s) { values.segment<2>(2 * i) = s; }
};

inline double l2_norm(const SpinorField& f, const Grid& g)
{
    double s = 0.0;
    for (int i = 0; i < g.n; ++i)
        s += g.weight(i) * f.at(i).squaredNorm();
    return std::sqrt(s);
}

/// Kernel K(x_i, x_j) stored as a dense 2n x 2n matrix of 2x2 blocks.
/// weightFolded = false: (Kf)(x_i) = sum_j w_j K(x_i, x_j) f(x_j).
/// weightFolded = true: the quadrature weights are already inside the matrix.
struct BlockKernel {
    MatX data;
    bool weightFolded = false;

    BlockKernel() = default;
    explicit BlockKernel(int n) : data(MatX::Zero(2 * n, 2 * n)) {}
    BlockKernel(MatX d, bool folded) : data(std::move(d)), weightFolded(folded) {}

    int size() const { return static_cast<int>(data.rows() / 2); }
    Mat2 block(int i, int j) const { return data.block<2, 2>(2 * i, 2 * j); }
    void set_block(int i, int j, const Mat2& b) { data.block<2, 2>(2 * i, 2 * j) = b; }
};

/// Kernel of the identity operator: blocks I / w_i on the diagonal.
inline BlockKernel identity_kernel(const Grid& g)
{
    BlockKernel k(g.n);
    for (int i = 0; i < g.n; ++i)
        k.set_block(i, i, Mat2::Identity() / g.weight(i));
    return k;
}

inline VecX sqrt_weights(const Grid& g)
{
    VecX s(2 * g.n);
    for (int i = 0; i < g.n; ++i)
        s(2 * i) = s(2 * i + 1) = std::sqrt(g.weight(i));
    return s;
}

/// Action matrix A with (Kf)_i = sum_j A_ij f_j.
inline MatX action_matrix(const BlockKernel& k, const Grid& g)
{
    if (k.size() != g.n)
        throw ConfigError("kernel and grid dimensions differ");
    if (k.weightFolded)
        return k.data;
    MatX a = k.data;
    for (int j = 0; j < g.n; ++j)
        a.middleCols<2>(2 * j) *= g.weight(j);
    return a;
}

/// Matrix of the operator in the weighted-orthonormal basis sqrt(w_i) delta_i:
/// W^{1/2} A W^{-1/2}. Adjoints and norms in L^2 become plain matrix ones.
inline MatX symmetric_matrix(const BlockKernel& k, const Grid& g)
{
    if (k.size() != g.n)
        throw ConfigError("kernel and grid dimensions differ");
    const VecX s = sqrt_weights(g);
    if (k.weightFolded)
        return s.asDiagonal() * k.data * s.cwiseInverse().asDiagonal();
    return s.asDiagonal() * k.data * s.asDiagonal();
}

inline BlockKernel kernel_from_symmetric(const MatX& m, const Grid& g)
{
    const VecX s = sqrt_weights(g).cwiseInverse();
    return BlockKernel(s.asDiagonal() * m * s.asDiagonal(), false);
}

inline SpinorField apply_kernel(const BlockKernel& k, const SpinorField& f, const Grid& g)
{
    if (f.size() != g.n || k.size() != g.n)
        throw ConfigError("apply_kernel: dimension mismatch");
    return SpinorField(VecX(action_matrix(k, g) * f.values));
}

inline BlockKernel compose(const BlockKernel& a, const BlockKernel& b, const Grid& g)
{
    return kernel_from_symmetric(symmetric_matrix(a, g) * symmetric_matrix(b, g), g);
}

/// Kernel of the L^2 adjoint: K*(x,y) = K(y,x)^*.
inline BlockKernel adjoint(const BlockKernel& k, const Grid& g)
{
    return kernel_from_symmetric(symmetric_matrix(k, g).adjoint(), g);
}

inline double spectral_norm(const MatX& m)
{
    if (m.size() == 0)
        return 0.0;
    Eigen::BDCSVD<MatX> svd(m);
    return svd.singularValues()(0);
}

/// Discrete L^2 -> L^2 norm of <x>^{-sigma} K <x>^{-sigma}.
inline double weighted_op_norm(const BlockKernel& k, double sigma, const Grid& g)
{
    if (sigma < 0.0)
        throw ConfigError("weighted_op_norm: sigma must be nonnegative");
    if (!k.data.allFinite())
        throw NumericalError("weighted_op_norm: non-finite kernel entries");
    MatX m = symmetric_matrix(k, g);
    VecX wt(2 * g.n);
    for (int i = 0; i < g.n; ++i)
        wt(2 * i) = wt(2 * i + 1) = std::pow(jbracket(g.node(i)), -sigma);
    m = wt.asDiagonal() * m * wt.asDiagonal();
    return spectral_norm(m);
}

} // namespace dirac1d
