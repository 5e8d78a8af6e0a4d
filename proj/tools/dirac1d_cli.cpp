#include "dirac1d/config.hpp"
#include "dirac1d/io.hpp"
#include "dirac1d/lap.hpp"
#include "dirac1d/minverse.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

using namespace dirac1d;

namespace {

constexpr int exit_regular = 0;
constexpr int exit_error = 1;
constexpr int exit_resonant = 2;
constexpr int exit_inconclusive = 3;

/// Flags shared by every subcommand; a flag given on the command line overrides the config file.
struct CommonFlags {
    std::string configPath;
    std::string outputDir;
    long long seed = 0;
    std::string potential;
    double delta = 0.0;
    double L = 0.0;
    int n = 0;
    double mass = 0.0;
    std::string threshold;
    double epsRes = 0.0;
    std::map<std::string, CLI::Option*> opts;

    void attach(CLI::App* app)
    {
        opts["config"] = app->add_option("--config", configPath, "JSON config or manifest");
        opts["output-dir"] = app->add_option("--output-dir", outputDir, "output directory");
        opts["seed"] = app->add_option("--seed", seed, "probe decimation offset seed");
        opts["potential"] = app->add_option("--potential", potential, "zero|example-res-plus|example-res-minus|gaussian|tabulated");
        opts["delta"] = app->add_option("--delta", delta, "exponent of the resonance examples");
        opts["L"] = app->add_option("--L", L, "box half-width");
        opts["n"] = app->add_option("--n", n, "node count");
        opts["mass"] = app->add_option("--mass", mass, "mass m");
        opts["threshold"] = app->add_option("--threshold", threshold, "+m|-m|both");
        opts["eps-res"] = app->add_option("--eps-res", epsRes, "resonance threshold override");
    }

    bool given(const std::string& k) const { return opts.at(k)->count() > 0; }

    RunConfig resolve(const std::string& command) const
    {
        RunConfig c;
        if (given("config"))
            c = config_from_json(parse_json(read_text(configPath), configPath));
        if (!c.command.empty() && c.command != command)
            throw ConfigError("config was written by '" + c.command + "', not '" + command + "'");
        c.command = command;
        if (given("output-dir"))
            c.outputDir = outputDir;
        if (given("seed"))
            c.seed = seed;
        if (given("potential"))
            c.potential.family = potential;
        if (given("delta"))
            c.potential.delta = delta;
        if (given("L"))
            c.L = L;
        if (given("n"))
            c.n = n;
        if (given("mass"))
            c.mass = mass;
        if (given("threshold"))
            c.threshold = threshold;
        if (given("eps-res"))
            c.epsRes = epsRes;
        return c;
    }

    static Json parse_json(const std::string& text, const std::string& where)
    {
        try {
            return Json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
};

struct Setup {
    Grid grid;
    DiracAlgebra alg;
    std::vector<Mat2> V;
    bool zero = true;
    double epsRes = 0.0;
    std::vector<std::string> warnings;
};

Setup build_setup(const RunConfig& c)
{
    Setup s{build_grid(c.L, c.n), DiracAlgebra(c.mass), {}, true, 0.0, {}};
    s.V = eval_potential(potential_spec(c), s.grid);
    for (const auto& v : s.V)
        if (v.cwiseAbs().maxCoeff() != 0.0)
            s.zero = false;
    s.warnings = decay_warnings(s.V, s.grid);
    if (c.potential.family == "tabulated")
        s.warnings.push_back("tabulated potential: decay hypotheses are not checked");
    s.epsRes = c.epsRes ? *c.epsRes : default_eps_res(s.grid, c.epsResCal);
    return s;
}

struct Output {
    std::string dir;
    std::string stem;

    std::string path(const std::string& suffix) const { return (std::filesystem::path(dir) / (stem + suffix)).string(); }
};

Output prepare_output(const RunConfig& c)
{
    std::filesystem::create_directories(c.outputDir);
    Output o{c.outputDir, c.command + "-" + config_hash(c)};
    write_text(o.path(".manifest.json"), config_to_json(c).dump(2) + "\n");
    return o;
}

Json warnings_json(const std::vector<std::string>& w)
{
    Json a = Json::array();
    for (const auto& s : w)
        a.push_back(s);
    return a;
}

void print_warnings(const std::vector<std::string>& w)
{
    for (const auto& s : w)
        std::cerr << "warning: " << s << "\n";
}

int cmd_classify(const RunConfig& c)
{
    const Setup s = build_setup(c);
    const Factorization f = factorize(s.V);
    const Output out = prepare_output(c);
    Json doc;
    doc["config"] = config_to_json(c);
    doc["warnings"] = warnings_json(s.warnings);
    doc["reports"] = Json::array();
    bool resonant = false;
    for (Branch b : thresholds_of(c)) {
        const ThresholdReport rep = classify_threshold(f, s.grid, s.alg, b, s.epsRes);
        resonant = resonant || !rep.regular;
        doc["reports"].push_back(to_json(rep));
        std::cout << "threshold " << threshold_name(b) << ": " << (rep.regular ? "regular" : "resonant")
                  << "  sigmaMin=" << format_double(rep.sigmaMin) << "  sigmaSecond=" << format_double(rep.sigmaSecond)
                  << "  epsRes=" << format_double(rep.epsRes) << "\n";
    }
    write_text(out.path(".json"), doc.dump(2) + "\n");
    print_warnings(s.warnings);
    std::cout << "wrote " << out.path(".json") << "\n";
    return resonant ? exit_resonant : exit_regular;
}

int cmd_decay_scan(const RunConfig& c)
{
    check_decay_times(c.decay.times);
    const Setup s = build_setup(c);
    const Factorization f = s.zero ? Factorization{} : factorize(s.V);
    PropagatorConfig pc;
    pc.times = c.decay.times;
    pc.cutoffs = {decay_cutoff(c)};
    pc.branches = decay_branches(c);
    pc.quad.phasePerPanel = c.decay.phasePerPanel;
    pc.zHole = c.decay.zHole;
    DecayOptions opt;
    opt.weight = decay_weight_of(c.decay.weight);
    opt.subtract = subtraction_of(c.decay.subtract);
    opt.probeStride = c.decay.probeStride;
    opt.probeOffset = static_cast<int>(((c.seed % c.decay.probeStride) + c.decay.probeStride) % c.decay.probeStride);
    std::optional<ThresholdReport> rep;
    if (opt.subtract == Subtraction::ftPlus) {
        if (pc.branches == BranchPolicy::both)
            throw ConfigError("decay.subtract = ftplus needs a single spectral branch");
        const Branch b = pc.branches == BranchPolicy::positiveSpectrum ? Branch::positive : Branch::negative;
        rep = classify_threshold(f, s.grid, s.alg, b, s.epsRes);
        if (rep->regular)
            throw ConfigError("decay.subtract = ftplus: the threshold " + threshold_name(b) + " is regular");
    }
    const Output out = prepare_output(c);
    const DecayScan scan = decay_scan(pc, s.zero ? nullptr : &f, s.grid, s.alg, opt, rep ? &*rep : nullptr);
    write_text(out.path(".csv"), decay_scan_csv(scan).str());
    std::vector<std::string> warnings = s.warnings;
    warnings.insert(warnings.end(), scan.warnings.begin(), scan.warnings.end());
    Json doc;
    doc["fit"] = to_json(scan.fit);
    doc["inconclusive"] = scan.inconclusive;
    doc["probeOffset"] = opt.probeOffset;
    doc["quadratureNodes"] = scan.nodes;
    doc["skippedNodes"] = scan.skipped;
    doc["warnings"] = warnings_json(warnings);
    doc["config"] = config_to_json(c);
    write_text(out.path(".json"), doc.dump(2) + "\n");
    for (const auto& r : scan.rows)
        std::cout << "t=" << format_double(r.t) << "  sup=" << format_double(r.supNorm)
                  << "  weighted=" << format_double(r.weightedSupNorm)
                  << "  after_subtraction=" << format_double(r.supAfterSubtraction) << "\n";
    std::cout << "slope " << format_double(scan.fit.slope) << "  r2 " << format_double(scan.fit.r2)
              << (scan.inconclusive ? "  (inconclusive)" : "") << "\n";
    print_warnings(warnings);
    std::cout << "wrote " << out.path(".csv") << "\n";
    return scan.inconclusive ? exit_inconclusive : exit_regular;
}

int cmd_lap_scan(const RunConfig& c)
{
    const Setup s = build_setup(c);
    const Output out = prepare_output(c);
    LapTable tab;
    Json doc;
    if (c.lap.mode == "real") {
        const Factorization f = s.zero ? Factorization{} : factorize(s.V);
        const auto lambdas = lap_lambda_grid(s.alg.m, c.lap.count, c.lap.lambdaMin > 0.0 ? c.lap.lambdaMin : -1.0,
                                             c.lap.lambdaMax > 0.0 ? c.lap.lambdaMax : -1.0);
        tab = lap_scan(lambdas, c.lap.sigma, &f, s.grid, s.alg);
        Json bias = Json::array();
        for (double l : {lambdas.front(), lambdas.back()})
            bias.push_back(Json{{"lambda", l}, {"eta", c.lap.eta}, {"relativeBias", eta_bias(l, s.V, s.grid, s.alg, c.lap.eta)}});
        doc["etaBias"] = bias;
    } else {
        tab = complex_scan(sector_grid(s.alg.m, c.lap.sectorR0, c.lap.sectorR1, c.lap.sectorDelta), c.lap.sigma, s.V,
                           s.grid, s.alg);
    }
    write_text(out.path(".csv"), lap_csv(tab).str());
    std::vector<std::string> warnings = s.warnings;
    warnings.insert(warnings.end(), tab.warnings.begin(), tab.warnings.end());
    doc["rows"] = tab.rows.size();
    doc["maxWeightedNorm"] = tab.maxNorm;
    doc["warnings"] = warnings_json(warnings);
    doc["config"] = config_to_json(c);
    write_text(out.path(".json"), doc.dump(2) + "\n");
    std::cout << tab.rows.size() << " rows, max weighted norm " << format_double(tab.maxNorm) << "\n";
    print_warnings(warnings);
    std::cout << "wrote " << out.path(".csv") << "\n";
    return exit_regular;
}

int cmd_minv_check(const RunConfig& c)
{
    const Setup s = build_setup(c);
    const Factorization f = factorize(s.V);
    const Output out = prepare_output(c);
    Json doc;
    doc["config"] = config_to_json(c);
    doc["thresholds"] = Json::array();
    bool resonant = false;
    for (Branch b : thresholds_of(c)) {
        const ThresholdParts parts = assemble_T_P_Q(f, s.grid, s.alg, b);
        const ThresholdReport rep = classify_threshold(f, s.grid, s.alg, b, s.epsRes, &parts);
        const std::string cls = rep.regular ? "regular" : "resonant";
        if (c.minv.mode != "auto" && c.minv.mode != cls)
            throw ConfigError("minv-check: threshold " + threshold_name(b) + " is " + cls + ", mode " + c.minv.mode +
                              " was requested");
        resonant = resonant || !rep.regular;
        const FeshbachCheck fc = feshbach_check(f, s.grid, s.alg, parts, rep);
        const OrderScan os = expansion_order_scan(f, s.grid, s.alg, parts, rep, order_scan_grid(fc.z0, c.minv.zCount));
        const std::string tag = b == Branch::positive ? "-plus" : "-minus";
        write_text(out.path(tag + ".csv"), order_scan_csv(os).str());
        Json t;
        t["threshold"] = threshold_name(b);
        t["classification"] = cls;
        t["z0"] = fc.z0;
        Json rows = Json::array();
        for (const auto& r : fc.rows)
            rows.push_back(Json{{"z", r.z}, {"relDeviation", r.relDeviation}, {"hAbs", r.hAbs}, {"condition", r.condition}});
        t["feshbachVsDense"] = rows;
        t["hFit"] = to_json(fc.hFit);
        if (fc.resonant)
            t["residueDeviation"] = fc.residueDeviation;
        t["orderFit"] = to_json(os.fit);
        t["orderInconclusive"] = os.inconclusive;
        t["linearP"] = to_json(os.linearP);
        t["cP"] = to_json(os.cP);
        doc["thresholds"].push_back(t);
        std::cout << "threshold " << threshold_name(b) << ": " << cls << "  z0=" << format_double(fc.z0) << "\n";
        for (const auto& r : fc.rows)
            std::cout << "  z=" << format_double(r.z) << "  feshbach vs dense " << format_double(r.relDeviation)
                      << "  |h|=" << format_double(r.hAbs) << "\n";
        std::cout << "  |h| slope " << format_double(fc.hFit.slope) << "\n";
        if (fc.resonant)
            std::cout << "  residue vs S1/(scriptD cP): " << format_double(fc.residueDeviation) << "\n";
        for (const auto& r : os.rows)
            std::cout << "  z=" << format_double(r.z) << "  |Minv|=" << format_double(r.normMinv)
                      << "  residual=" << format_double(r.residual) << "  order=" << format_double(r.fittedOrder) << "\n";
        std::cout << "  residual order fit " << format_double(os.fit.slope) << "\n";
    }
    write_text(out.path(".json"), doc.dump(2) + "\n");
    print_warnings(s.warnings);
    std::cout << "wrote " << out.path(".json") << "\n";
    return resonant ? exit_resonant : exit_regular;
}

int cmd_free_check(const RunConfig& c)
{
    const DiracAlgebra alg(c.mass);
    const Output out = prepare_output(c);
    const auto rows = free_envelope_scan(c.free.j, c.free.t, alg, {}, c.free.samplesPerWavelength);
    write_text(out.path(".csv"), envelope_csv(rows).str());
    double maxRatio = 0.0, maxWeighted = 0.0;
    for (const auto& r : rows) {
        maxRatio = std::max(maxRatio, r.ratio);
        maxWeighted = std::max(maxWeighted, r.weightedRatio);
        std::cout << "j=" << r.j << "  t=" << format_double(r.t) << "  sup=" << format_double(r.sup)
                  << "  ratio=" << format_double(r.ratio) << "  weighted_ratio=" << format_double(r.weightedRatio)
                  << "  curvature_ratio=" << format_double(r.curvatureRatio) << "\n";
    }
    Json doc;
    doc["maxRatio"] = maxRatio;
    doc["maxWeightedRatio"] = maxWeighted;
    doc["config"] = config_to_json(c);
    write_text(out.path(".json"), doc.dump(2) + "\n");
    std::cout << "max ratio " << format_double(maxRatio) << ", max weighted ratio " << format_double(maxWeighted)
              << "\n";
    std::cout << "wrote " << out.path(".csv") << "\n";
    return exit_regular;
}

int run(const RunConfig& c)
{
    validate(c);
    if (c.command == "classify")
        return cmd_classify(c);
    if (c.command == "decay-scan")
        return cmd_decay_scan(c);
    if (c.command == "lap-scan")
        return cmd_lap_scan(c);
    if (c.command == "minv-check")
        return cmd_minv_check(c);
    if (c.command == "free-check")
        return cmd_free_check(c);
    throw ConfigError("unknown command '" + c.command + "'");
}

std::vector<double> parse_times(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--times: cannot parse '" + item + "'");
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral toolkit for the one-dimensional massive Dirac operator"};
    app.require_subcommand(1);

    auto* classify = app.add_subcommand("classify", "classify the thresholds +m / -m");
    auto* decay = app.add_subcommand("decay-scan", "sup-norm decay of the band-limited propagator");
    auto* lap = app.add_subcommand("lap-scan", "weighted resolvent norms on the real axis or a complex sector");
    auto* minv = app.add_subcommand("minv-check", "Feshbach inverse of M(z) and threshold expansion orders");
    auto* freec = app.add_subcommand("free-check", "dyadic free propagator against its envelope");
    auto* replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");

    std::map<CLI::App*, CommonFlags> common;
    for (CLI::App* sub : {classify, decay, lap, minv, freec})
        common[sub].attach(sub);

    std::string weight, subtract, times;
    auto* oWeight = decay->add_option("--weight", weight, "none|xy|xmy");
    auto* oSubtract = decay->add_option("--subtract", subtract, "none|ft0|ftplus");
    auto* oTimes = decay->add_option("--times", times, "comma-separated times");
    double sigma = 0.0;
    bool sector = false;
    auto* oSigma = lap->add_option("--sigma", sigma, "weight exponent");
    auto* oSector = lap->add_flag("--sector", sector, "scan the complex sector instead of the real axis");
    std::string mode;
    auto* oMode = minv->add_option("--mode", mode, "auto|regular|resonant");
    std::string manifest, replayDir;
    replay->add_option("manifest", manifest, "manifest written by an earlier run")->required();
    auto* oReplayDir = replay->add_option("--output-dir", replayDir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_error;
    }

    try {
        RunConfig c;
        if (replay->parsed()) {
            c = config_from_json(CommonFlags::parse_json(read_text(manifest), manifest));
            if (oReplayDir->count())
                c.outputDir = replayDir;
        } else {
            CLI::App* sub = app.get_subcommands().front();
            c = common.at(sub).resolve(sub->get_name());
            if (oWeight->count())
                c.decay.weight = weight;
            if (oSubtract->count())
                c.decay.subtract = subtract;
            if (oTimes->count())
                c.decay.times = parse_times(times);
            if (oSigma->count())
                c.lap.sigma = sigma;
            if (oSector->count())
                c.lap.mode = sector ? "sector" : "real";
            if (oMode->count())
                c.minv.mode = mode;
        }
        return run(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return exit_error;
}
