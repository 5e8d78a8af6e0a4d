#pragma once

#include "dirac1d/evolution.hpp"
#include "dirac1d/io.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dirac1d {

inline constexpr const char* code_version = "dirac1d 1.0.0";

/// Fully resolved run configuration. Every field has a default; the JSON form
/// written to manifests lists all of them.
struct RunConfig {
    std::string command;

    struct Potential {
        std::string family = "zero";
        double delta = -4.0;
        Mat2 amplitude = Mat2::Zero();
        double width = 1.0;
        double scale = 1.0;
        std::string path;
        bool allowNonSelfAdjoint = false;
    } potential;

    double L = 16.0;
    int n = 321;
    double mass = 1.0;
    std::string threshold = "+m";
    double epsResCal = 0.5;
    std::optional<double> epsRes;
    long long seed = 0;
    std::string outputDir = "dirac1d_out";

    struct Decay {
        std::vector<double> times{16, 32, 64, 128, 256};
        std::string weight = "none";
        std::string subtract = "none";
        std::string cutoff = "low-energy";
        double z0 = 1.0;
        int j = 1;
        std::string branches = "positive";
        double phasePerPanel = 8.0 * pi;
        int probeStride = 4;
        double zHole = 1e-4;
    } decay;

    struct Lap {
        double sigma = 1.5;
        std::string mode = "real";
        int count = 40;
        double lambdaMin = 0.0;
        double lambdaMax = 0.0;
        double sectorR0 = 3.0;
        double sectorR1 = 6.0;
        double sectorDelta = 0.1;
        double eta = 1e-6;
    } lap;

    struct Minv {
        std::string mode = "auto";
        int zCount = 8;
    } minv;

    struct Free {
        std::vector<int> j{1, 2, 3, 4, 5};
        std::vector<double> t{4, 16, 64};
        int samplesPerWavelength = 8;
    } free;
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

inline void check_choice(const std::string& v, const std::set<std::string>& allowed, const std::string& where)
{
    if (!allowed.count(v)) {
        std::string list;
        for (const auto& a : allowed)
            list += (list.empty() ? "" : ", ") + a;
        throw ConfigError(where + ": '" + v + "' is not one of {" + list + "}");
    }
}

template <class T>
void read_field(const Json& obj, const char* key, T& out, const std::string& where)
{
    if (!obj.contains(key))
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

inline cplx read_complex(const Json& v, const std::string& where)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(where + ": expected a number or [re, im]");
}

} // namespace detail

inline RunConfig config_from_json(const Json& j)
{
    using detail::read_field;
    RunConfig c;
    detail::reject_unknown(j,
                           {"command", "version", "potential", "grid", "mass", "threshold", "epsRes", "seed",
                            "outputDir", "decay", "lap", "minv", "free"},
                           "config");
    read_field(j, "command", c.command, "config");
    read_field(j, "mass", c.mass, "config");
    read_field(j, "threshold", c.threshold, "config");
    read_field(j, "seed", c.seed, "config");
    read_field(j, "outputDir", c.outputDir, "config");
    if (j.contains("potential")) {
        const Json& p = j["potential"];
        detail::reject_unknown(p, {"family", "delta", "amplitude", "width", "scale", "path", "allowNonSelfAdjoint"},
                               "potential");
        read_field(p, "family", c.potential.family, "potential");
        read_field(p, "delta", c.potential.delta, "potential");
        read_field(p, "width", c.potential.width, "potential");
        read_field(p, "scale", c.potential.scale, "potential");
        read_field(p, "path", c.potential.path, "potential");
        read_field(p, "allowNonSelfAdjoint", c.potential.allowNonSelfAdjoint, "potential");
        if (p.contains("amplitude")) {
            const Json& a = p["amplitude"];
            if (!a.is_array() || a.size() != 2 || !a[0].is_array() || !a[1].is_array() || a[0].size() != 2 ||
                a[1].size() != 2)
                throw ConfigError("potential.amplitude: expected a 2x2 array");
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s)
                    c.potential.amplitude(r, s) = detail::read_complex(a[r][s], "potential.amplitude");
        }
    }
    if (j.contains("grid")) {
        const Json& g = j["grid"];
        detail::reject_unknown(g, {"L", "n"}, "grid");
        read_field(g, "L", c.L, "grid");
        read_field(g, "n", c.n, "grid");
    }
    if (j.contains("epsRes")) {
        const Json& e = j["epsRes"];
        detail::reject_unknown(e, {"cCal", "value"}, "epsRes");
        read_field(e, "cCal", c.epsResCal, "epsRes");
        if (e.contains("value") && !e["value"].is_null())
            c.epsRes = e["value"].get<double>();
    }
    if (j.contains("decay")) {
        const Json& d = j["decay"];
        detail::reject_unknown(d,
                               {"times", "weight", "subtract", "cutoff", "z0", "j", "branches", "phasePerPanel",
                                "probeStride", "zHole"},
                               "decay");
        read_field(d, "times", c.decay.times, "decay");
        read_field(d, "weight", c.decay.weight, "decay");
        read_field(d, "subtract", c.decay.subtract, "decay");
        read_field(d, "cutoff", c.decay.cutoff, "decay");
        read_field(d, "z0", c.decay.z0, "decay");
        read_field(d, "j", c.decay.j, "decay");
        read_field(d, "branches", c.decay.branches, "decay");
        read_field(d, "phasePerPanel", c.decay.phasePerPanel, "decay");
        read_field(d, "probeStride", c.decay.probeStride, "decay");
        read_field(d, "zHole", c.decay.zHole, "decay");
    }
    if (j.contains("lap")) {
        const Json& l = j["lap"];
        detail::reject_unknown(l,
                               {"sigma", "mode", "count", "lambdaMin", "lambdaMax", "sectorR0", "sectorR1",
                                "sectorDelta", "eta"},
                               "lap");
        read_field(l, "sigma", c.lap.sigma, "lap");
        read_field(l, "mode", c.lap.mode, "lap");
        read_field(l, "count", c.lap.count, "lap");
        read_field(l, "lambdaMin", c.lap.lambdaMin, "lap");
        read_field(l, "lambdaMax", c.lap.lambdaMax, "lap");
        read_field(l, "sectorR0", c.lap.sectorR0, "lap");
        read_field(l, "sectorR1", c.lap.sectorR1, "lap");
        read_field(l, "sectorDelta", c.lap.sectorDelta, "lap");
        read_field(l, "eta", c.lap.eta, "lap");
    }
    if (j.contains("minv")) {
        const Json& m = j["minv"];
        detail::reject_unknown(m, {"mode", "zCount"}, "minv");
        read_field(m, "mode", c.minv.mode, "minv");
        read_field(m, "zCount", c.minv.zCount, "minv");
    }
    if (j.contains("free")) {
        const Json& f = j["free"];
        detail::reject_unknown(f, {"j", "t", "samplesPerWavelength"}, "free");
        read_field(f, "j", c.free.j, "free");
        read_field(f, "t", c.free.t, "free");
        read_field(f, "samplesPerWavelength", c.free.samplesPerWavelength, "free");
    }
    return c;
}

/// Value checks that do not need a grid.
inline void validate(const RunConfig& c)
{
    detail::check_choice(c.potential.family, {"zero", "example-res-plus", "example-res-minus", "gaussian", "tabulated"},
                         "potential.family");
    detail::check_choice(c.threshold, {"+m", "-m", "both"}, "threshold");
    detail::check_choice(c.decay.weight, {"none", "xy", "xmy"}, "decay.weight");
    detail::check_choice(c.decay.subtract, {"none", "ft0", "ftplus"}, "decay.subtract");
    detail::check_choice(c.decay.cutoff, {"low-energy", "dyadic", "band"}, "decay.cutoff");
    detail::check_choice(c.decay.branches, {"positive", "negative", "both"}, "decay.branches");
    detail::check_choice(c.lap.mode, {"real", "sector"}, "lap.mode");
    detail::check_choice(c.minv.mode, {"auto", "regular", "resonant"}, "minv.mode");
    if (c.potential.family == "tabulated" && c.potential.path.empty())
        throw ConfigError("potential.path: required for a tabulated potential");
    if (!(c.potential.width > 0.0))
        throw ConfigError("potential.width: must be positive");
    if (!(c.mass > 0.0))
        throw ConfigError("mass: must be positive");
    if (c.decay.probeStride < 1)
        throw ConfigError("decay.probeStride: must be >= 1");
    if (!(c.decay.phasePerPanel > 0.0))
        throw ConfigError("decay.phasePerPanel: must be positive");
    if (c.lap.count < 2)
        throw ConfigError("lap.count: must be >= 2");
    if (c.minv.zCount < 3)
        throw ConfigError("minv.zCount: must be >= 3");
    if (c.free.samplesPerWavelength < 2)
        throw ConfigError("free.samplesPerWavelength: must be >= 2");
    if (c.outputDir.empty())
        throw ConfigError("outputDir: must not be empty");
}

inline Json config_to_json(const RunConfig& c)
{
    Json j;
    j["command"] = c.command;
    j["version"] = code_version;
    Json a = Json::array();
    for (int r = 0; r < 2; ++r)
        a.push_back(Json::array({to_json(c.potential.amplitude(r, 0)), to_json(c.potential.amplitude(r, 1))}));
    j["potential"] = Json{{"family", c.potential.family},
                          {"delta", c.potential.delta},
                          {"amplitude", a},
                          {"width", c.potential.width},
                          {"scale", c.potential.scale},
                          {"path", c.potential.path},
                          {"allowNonSelfAdjoint", c.potential.allowNonSelfAdjoint}};
    j["grid"] = Json{{"L", c.L}, {"n", c.n}};
    j["mass"] = c.mass;
    j["threshold"] = c.threshold;
    j["epsRes"] = Json{{"cCal", c.epsResCal}, {"value", c.epsRes ? Json(*c.epsRes) : Json(nullptr)}};
    j["seed"] = c.seed;
    j["outputDir"] = c.outputDir;
    j["decay"] = Json{{"times", c.decay.times},
                      {"weight", c.decay.weight},
                      {"subtract", c.decay.subtract},
                      {"cutoff", c.decay.cutoff},
                      {"z0", c.decay.z0},
                      {"j", c.decay.j},
                      {"branches", c.decay.branches},
                      {"phasePerPanel", c.decay.phasePerPanel},
                      {"probeStride", c.decay.probeStride},
                      {"zHole", c.decay.zHole}};
    j["lap"] = Json{{"sigma", c.lap.sigma},
                    {"mode", c.lap.mode},
                    {"count", c.lap.count},
                    {"lambdaMin", c.lap.lambdaMin},
                    {"lambdaMax", c.lap.lambdaMax},
                    {"sectorR0", c.lap.sectorR0},
                    {"sectorR1", c.lap.sectorR1},
                    {"sectorDelta", c.lap.sectorDelta},
                    {"eta", c.lap.eta}};
    j["minv"] = Json{{"mode", c.minv.mode}, {"zCount", c.minv.zCount}};
    j["free"] = Json{{"j", c.free.j}, {"t", c.free.t}, {"samplesPerWavelength", c.free.samplesPerWavelength}};
    return j;
}

/// Hash of the resolved config without outputDir, so a rerun elsewhere keeps its filenames.
inline std::string config_hash(const RunConfig& c)
{
    Json j = config_to_json(c);
    j.erase("outputDir");
    return hex64(fnv1a(j.dump()));
}

inline PotentialSpec potential_spec(const RunConfig& c)
{
    PotentialSpec p;
    const auto& q = c.potential;
    if (q.family == "zero")
        p = PotentialSpec::zero();
    else if (q.family == "example-res-plus")
        p = PotentialSpec::resonance_plus(q.delta);
    else if (q.family == "example-res-minus")
        p = PotentialSpec::resonance_minus(q.delta);
    else if (q.family == "gaussian")
        p = PotentialSpec::gaussian(q.amplitude, q.width);
    else
        p = PotentialSpec::tabulated_file(q.path);
    p.allowNonSelfAdjoint = q.allowNonSelfAdjoint;
    if (q.scale != 1.0)
        p = PotentialSpec::scaled_of(p, q.scale);
    return p;
}

inline std::vector<Branch> thresholds_of(const RunConfig& c)
{
    if (c.threshold == "+m")
        return {Branch::positive};
    if (c.threshold == "-m")
        return {Branch::negative};
    return {Branch::positive, Branch::negative};
}

inline FrequencyCutoff decay_cutoff(const RunConfig& c)
{
    if (c.decay.cutoff == "low-energy")
        return FrequencyCutoff::low_energy(c.decay.z0);
    if (c.decay.cutoff == "dyadic")
        return FrequencyCutoff::dyadic_block(c.decay.j);
    return FrequencyCutoff::band_limit(c.decay.j);
}

inline BranchPolicy decay_branches(const RunConfig& c)
{
    if (c.decay.branches == "positive")
        return BranchPolicy::positiveSpectrum;
    if (c.decay.branches == "negative")
        return BranchPolicy::negativeSpectrum;
    return BranchPolicy::both;
}

inline DecayWeight decay_weight_of(const std::string& s)
{
    return s == "xy" ? DecayWeight::xy : (s == "xmy" ? DecayWeight::xmy : DecayWeight::none);
}

inline Subtraction subtraction_of(const std::string& s)
{
    return s == "ft0" ? Subtraction::ft0 : (s == "ftplus" ? Subtraction::ftPlus : Subtraction::none);
}

} // namespace dirac1d
