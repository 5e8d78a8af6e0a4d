#pragma once

#include "dirac1d/lattice.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace dirac1d {

inline constexpr int panel_order = 20;

struct QuadNode {
    double z;
    double w;
};

/// 20-point Gauss-Legendre rule on [-1, 1], ascending.
inline const std::array<QuadNode, panel_order>& gl_reference()
{
    static const std::array<QuadNode, panel_order> rule = [] {
        using GL = boost::math::quadrature::gauss<double, panel_order>;
        const auto& a = GL::abscissa();
        const auto& w = GL::weights();
        std::array<QuadNode, panel_order> r{};
        const int half = panel_order / 2;
        for (int k = 0; k < half; ++k) {
            r[static_cast<std::size_t>(half + k)] = {a[static_cast<std::size_t>(k)], w[static_cast<std::size_t>(k)]};
            r[static_cast<std::size_t>(half - 1 - k)] = {-a[static_cast<std::size_t>(k)], w[static_cast<std::size_t>(k)]};
        }
        return r;
    }();
    return rule;
}

/// Composite Gauss-Legendre nodes on [a, b] with the given number of panels.
inline std::vector<QuadNode> gl_composite(double a, double b, int panels)
{
    std::vector<QuadNode> out;
    if (!(b > a) || panels < 1)
        return out;
    out.reserve(static_cast<std::size_t>(panels * panel_order));
    const double len = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * len;
        const double mid = lo + len / 2;
        for (const auto& q : gl_reference())
            out.push_back({mid + q.z * len / 2, q.w * len / 2});
    }
    return out;
}

/// Node policy for oscillatory z-integrals: one 20-node panel per
/// phasePerPanel radians of total phase variation, at least minPanels.
struct QuadConfig {
    double phasePerPanel = 4.0 * pi;
    int minPanels = 2;
    double tolerance = 1e-8;

    int panels_for(double phase) const
    {
        const int p = 1 + static_cast<int>(std::ceil(std::abs(phase) / phasePerPanel));
        return std::max(minPanels, p);
    }

    QuadConfig refined() const
    {
        QuadConfig q = *this;
        q.phasePerPanel /= 2;
        q.minPanels *= 2;
        return q;
    }
};

/// Smooth even plateau: 1 on |s| <= 1, 0 on |s| >= 2.
inline double plateau(double s)
{
    const double a = std::abs(s);
    if (a <= 1.0)
        return 1.0;
    if (a >= 2.0)
        return 0.0;
    auto bump = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    const double p = bump(2.0 - a);
    const double q = bump(a - 1.0);
    return p / (p + q);
}

/// Frequency cut-offs in the reduced variable z.
struct FrequencyCutoff {
    enum class Kind { lowEnergy, dyadic, band };
    Kind kind = Kind::lowEnergy;
    double z0 = 0.5;
    int j = 0;

    static FrequencyCutoff low_energy(double z0)
    {
        FrequencyCutoff c;
        c.kind = Kind::lowEnergy;
        c.z0 = z0;
        return c;
    }
    static FrequencyCutoff dyadic_block(int j)
    {
        FrequencyCutoff c;
        c.kind = Kind::dyadic;
        c.j = j;
        return c;
    }
    /// Band limit chi(z / 2^jmax): equal to 1 on |z| <= 2^jmax, 0 beyond zmax = 2^(jmax+1).
    static FrequencyCutoff band_limit(int jmax)
    {
        FrequencyCutoff c;
        c.kind = Kind::band;
        c.j = jmax;
        return c;
    }

    double value(double z) const
    {
        switch (kind) {
        case Kind::lowEnergy:
            return plateau(2.0 * z / z0);
        case Kind::dyadic:
            return plateau(z / std::ldexp(1.0, j)) - plateau(z / std::ldexp(1.0, j - 1));
        case Kind::band:
            return plateau(z / std::ldexp(1.0, j));
        }
        return 0.0;
    }

    /// Positive z-interval outside which the profile vanishes.
    std::pair<double, double> support() const
    {
        switch (kind) {
        case Kind::lowEnergy:
            return {0.0, z0};
        case Kind::dyadic:
            return {std::ldexp(1.0, j - 1), std::ldexp(1.0, j + 1)};
        case Kind::band:
            return {0.0, std::ldexp(1.0, j + 1)};
        }
        return {0.0, 0.0};
    }

    double zmax() const { return support().second; }
};

/// Quadrature nodes covering supp(chi) on both half-lines, weights include chi.
/// Nodes never sit at z = 0; |z| < zHole is dropped.
inline std::vector<QuadNode> cutoff_nodes(const FrequencyCutoff& c, double m, double t, double rmax,
                                          const QuadConfig& q, double zHole = 1e-4)
{
    const auto [lo, hi] = c.support();
    const double dlam = std::sqrt(hi * hi + m * m) - std::sqrt(lo * lo + m * m);
    const double phase = std::abs(t) * dlam + rmax * (hi - lo);
    const int panels = q.panels_for(phase);
    std::vector<QuadNode> out;
    for (const auto& nd : gl_composite(lo, hi, panels)) {
        const double chi = c.value(nd.z);
        if (chi == 0.0 || nd.z < zHole)
            continue;
        out.push_back({-nd.z, nd.w * chi});
        out.push_back({nd.z, nd.w * chi});
    }
    std::sort(out.begin(), out.end(), [](const QuadNode& a, const QuadNode& b) { return a.z < b.z; });
    return out;
}

} // namespace dirac1d
