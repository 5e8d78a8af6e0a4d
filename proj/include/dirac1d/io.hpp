#pragma once

#include "dirac1d/evolution.hpp"
#include "dirac1d/lap.hpp"
#include "dirac1d/minverse.hpp"
#include "dirac1d/threshold.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dirac1d {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; identical across runs and thread counts.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline Json to_json(cplx c) { return Json::array({c.real(), c.imag()}); }

inline Json to_json(const VecX& v)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(to_json(v(i)));
    return a;
}

inline Json to_json(const Mat2& m)
{
    return Json::array({Json::array({to_json(m(0, 0)), to_json(m(0, 1))}),
                        Json::array({to_json(m(1, 0)), to_json(m(1, 1))})});
}

inline Json to_json(const LinearFit& f)
{
    return Json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

inline std::string threshold_name(Branch b) { return b == Branch::positive ? "+m" : "-m"; }

inline Json to_json(const ThresholdReport& r)
{
    Json j;
    j["whichThreshold"] = threshold_name(r.whichThreshold);
    j["classification"] = r.regular ? "regular" : "resonant";
    j["rankOne"] = r.rankOne;
    j["h"] = r.h;
    j["epsRes"] = r.epsRes;
    j["sigmaMin"] = r.sigmaMin;
    j["sigmaSecond"] = r.sigmaSecond;
    j["normVe"] = r.norm;
    j["cP"] = to_json(r.cP);
    if (!r.regular) {
        j["kappa0"] = to_json(r.kappa0);
        j["kappa0Alt"] = to_json(r.kappa0Alt);
        j["kappa1"] = to_json(r.kappa1);
        j["u"] = Json::array({to_json(r.u(0)), to_json(r.u(1))});
        j["scriptD"] = to_json(r.scriptD);
        j["traceS1M1S1"] = to_json(r.traceS1M1S1);
        j["nondegeneracyLhs"] = to_json(r.nondegeneracyLhs);
        j["nondegeneracyRhs"] = r.nondegeneracy;
        j["volterra"] = to_json(r.volterra);
        if (r.phi)
            j["phi"] = to_json(r.phi->values);
        if (r.psi)
            j["psi"] = to_json(r.psi->values);
    }
    return j;
}

/// Minimal CSV writer: header row, then rows of numbers.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(const std::vector<double>& row)
    {
        if (row.size() != header_.size())
            throw ConfigError("csv: row width differs from header");
        rows_.push_back(row);
    }

    std::size_t size() const { return rows_.size(); }

    std::string str() const
    {
        std::ostringstream os;
        for (std::size_t k = 0; k < header_.size(); ++k)
            os << (k ? "," : "") << header_[k];
        os << '\n';
        for (const auto& r : rows_) {
            for (std::size_t k = 0; k < r.size(); ++k)
                os << (k ? "," : "") << format_double(r[k]);
            os << '\n';
        }
        return os.str();
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

inline CsvTable order_scan_csv(const OrderScan& s)
{
    CsvTable t({"z", "normMinv", "residual_after_leading", "fitted_order"});
    for (const auto& r : s.rows)
        t.add({r.z, r.normMinv, r.residual, r.fittedOrder});
    return t;
}

inline CsvTable decay_scan_csv(const DecayScan& s)
{
    CsvTable t({"t", "sup_norm", "weighted_sup_norm", "sup_after_subtraction"});
    for (const auto& r : s.rows)
        t.add({r.t, r.supNorm, r.weightedSupNorm, r.supAfterSubtraction});
    return t;
}

inline CsvTable lap_csv(const LapTable& s)
{
    CsvTable t({"re_lambda", "im_lambda", "sigma", "weighted_norm", "condition_estimate"});
    for (const auto& r : s.rows)
        t.add({r.lambda.real(), r.lambda.imag(), r.sigma, r.weightedNorm, r.condition});
    return t;
}

inline CsvTable envelope_csv(const std::vector<EnvelopeRow>& rows)
{
    CsvTable t({"j", "t", "sup", "envelope", "ratio", "weighted_sup", "weighted_envelope", "weighted_ratio",
                "curvature_ratio"});
    for (const auto& r : rows)
        t.add({static_cast<double>(r.j), r.t, r.sup, r.envelope, r.ratio, r.weightedSup, r.weightedEnvelope,
               r.weightedRatio, r.curvatureRatio});
    return t;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError("cannot open " + path + " for writing");
    out << text;
    if (!out)
        throw ConfigError("write failed: " + path);
}

inline std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace dirac1d
