#pragma once

#include "dirac1d/factorization.hpp"
#include "dirac1d/lattice.hpp"

namespace dirac1d {

// Kernels jump (sgn) or kink (|x-y|) on the diagonal. The plain
// trapezoid rule is then O(h^2); subtracting the Euler-Maclaurin term
// (h^2/12)(g'(x-) - g'(x+)) with third-order one-sided differences gives O(h^4).
namespace detail {
inline constexpr double kink_diag = -11.0 / 72.0;
inline constexpr double kink_off[4] = {0.0, 18.0 / 72.0, -9.0 / 72.0, 2.0 / 72.0};

inline bool kink_row(const Grid& g, int i) { return i >= 3 && i <= g.n - 4; }
} // namespace detail

/// Extra weight on the pair (i, j), |i-j| <= 3, from the diagonal kink correction.
inline double kink_weight(const Grid& g, int i, int j)
{
    const int k = std::abs(i - j);
    if (k == 0 || k > 3)
        return 0.0;
    if (!detail::kink_row(g, i) && !detail::kink_row(g, j))
        return 0.0;
    return g.h * detail::kink_off[k];
}

/// Matrix of f -> int K(x,y) f(y) dy in the sqrt(w) basis.
/// kern(i, j, s) returns the 2x2 kernel block at (x_i, x_j) using s for sgn(x_i - x_j).
template <class Kern>
MatX nystrom_symmetric(const Grid& g, Kern&& kern)
{
    MatX out(2 * g.n, 2 * g.n);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double s = i > j ? 1.0 : (i < j ? -1.0 : 0.0);
            const double wij = std::sqrt(g.weight(i) * g.weight(j)) + kink_weight(g, i, j);
            if (i == j && detail::kink_row(g, i)) {
                const Mat2 k0 = kern(i, i, 0.0);
                const Mat2 kl = kern(i, i, 1.0);
                const Mat2 kr = kern(i, i, -1.0);
                out.block<2, 2>(2 * i, 2 * j) = wij * k0 + g.h * detail::kink_diag * (kl + kr);
            } else {
                out.block<2, 2>(2 * i, 2 * j) = wij * kern(i, j, s);
            }
        }
    }
    return out;
}

/// Rows of the action matrix for the listed row nodes: (Kf)(x_r) = sum_j A_rj f_j.
template <class Kern>
MatX nystrom_rows(const Grid& g, const std::vector<int>& rows, Kern&& kern)
{
    MatX out(2 * static_cast<int>(rows.size()), 2 * g.n);
    for (std::size_t p = 0; p < rows.size(); ++p) {
        const int i = rows[p];
        const int r = 2 * static_cast<int>(p);
        for (int j = 0; j < g.n; ++j) {
            const double s = i > j ? 1.0 : (i < j ? -1.0 : 0.0);
            const double wij = g.weight(j) + kink_weight(g, i, j);
            if (i == j && detail::kink_row(g, i)) {
                out.block<2, 2>(r, 2 * j) = wij * kern(i, i, 0.0) +
                                           g.h * detail::kink_diag * (kern(i, i, 1.0) + kern(i, i, -1.0));
            } else {
                out.block<2, 2>(r, 2 * j) = wij * kern(i, j, s);
            }
        }
    }
    return out;
}

inline std::vector<int> all_nodes(const Grid& g)
{
    std::vector<int> r(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i)
        r[static_cast<std::size_t>(i)] = i;
    return r;
}

/// U as a diagonal of the 2n-dimensional space.
inline VecX sign_diagonal(const Factorization& f)
{
    VecX d(2 * f.size());
    for (int i = 0; i < f.size(); ++i) {
        d(2 * i) = f.U[static_cast<std::size_t>(i)](0);
        d(2 * i + 1) = f.U[static_cast<std::size_t>(i)](1);
    }
    return d;
}

} // namespace dirac1d
