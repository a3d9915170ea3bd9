#include "filamenta/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "filamenta/abc_infer.hpp"
#include "filamenta/error.hpp"
#include "filamenta/field.hpp"
#include "filamenta/filament_search.hpp"
#include "filamenta/geometry.hpp"
#include "filamenta/pfp_sim.hpp"
#include "filamenta/point_io.hpp"
#include "filamenta/reproduce.hpp"
#include "filamenta/triad_stats.hpp"

namespace filamenta {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Config access with schema checks

void allowKeys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
        throw InvalidInput(where + ": expected an object");
    }
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
            throw InvalidInput(where + ": unknown key '" + k + "'");
        }
    }
}

const json& need(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        throw InvalidInput(where + ": missing required key '" + key + "'");
    }
    return j.at(key);
}

double number(const json& j, const char* key, const std::string& where, std::optional<double> def = {}) {
    if (!j.contains(key) || j.at(key).is_null()) {
        if (def) {
            return *def;
        }
        throw InvalidInput(where + ": missing required key '" + key + "'");
    }
    const json& v = j.at(key);
    if (v.is_string() && (v == "inf" || v == "infinity")) {
        return std::numeric_limits<double>::infinity();
    }
    if (!v.is_number()) {
        throw InvalidInput(where + "." + key + ": expected a number");
    }
    return v.get<double>();
}

std::size_t count(const json& j, const char* key, const std::string& where, std::optional<std::size_t> def = {}) {
    if (!j.contains(key)) {
        if (def) {
            return *def;
        }
        throw InvalidInput(where + ": missing required key '" + key + "'");
    }
    const json& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw InvalidInput(where + "." + key + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::string text(const json& j, const char* key, const std::string& where, std::optional<std::string> def = {}) {
    if (!j.contains(key)) {
        if (def) {
            return *def;
        }
        throw InvalidInput(where + ": missing required key '" + key + "'");
    }
    if (!j.at(key).is_string()) {
        throw InvalidInput(where + "." + key + ": expected a string");
    }
    return j.at(key).get<std::string>();
}

bool flag(const json& j, const char* key, const std::string& where, bool def) {
    if (!j.contains(key)) {
        return def;
    }
    if (!j.at(key).is_boolean()) {
        throw InvalidInput(where + "." + key + ": expected true or false");
    }
    return j.at(key).get<bool>();
}

Point pair(const json& j, const char* key, const std::string& where, std::optional<Point> def = {}) {
    if (!j.contains(key)) {
        if (def) {
            return *def;
        }
        throw InvalidInput(where + ": missing required key '" + key + "'");
    }
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw InvalidInput(where + "." + key + ": expected [number, number]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

Region parseRegion(const json& j) {
    const std::string where = "region";
    const std::string type = text(j, "type", where);
    if (type == "rect") {
        allowKeys(j, where, {"type", "width", "height", "origin"});
        return Region::rect(number(j, "width", where), number(j, "height", where),
                            pair(j, "origin", where, Point{0.0, 0.0}));
    }
    if (type == "disc") {
        allowKeys(j, where, {"type", "center", "radius"});
        return Region::disc(pair(j, "center", where), number(j, "radius", where));
    }
    if (type == "cap") {
        allowKeys(j, where, {"type", "center", "radius"});
        return Region::cap(pair(j, "center", where), number(j, "radius", where));
    }
    if (type == "band") {
        allowKeys(j, where, {"type", "latMin", "latMax", "cyclic"});
        return Region::latLonBand(number(j, "latMin", where), number(j, "latMax", where),
                                  flag(j, "cyclic", where, true));
    }
    throw InvalidInput("region.type must be rect, disc, cap or band");
}

TriadParams parseTriad(const json& cfg, double defaultD0) {
    if (!cfg.contains("triad")) {
        return TriadParams::make(degToRad(15.0), defaultD0);
    }
    const json& j = cfg.at("triad");
    allowKeys(j, "triad", {"epsilonDeg", "d0"});
    return TriadParams::make(degToRad(number(j, "epsilonDeg", "triad", 15.0)),
                             number(j, "d0", "triad", defaultD0));
}

SizeLaw parseSize(const json& j, const std::string& where, SizeLaw def) {
    if (j.is_null()) {
        return def;
    }
    const std::string law = text(j, "law", where);
    if (law == "three-plus-poisson") {
        allowKeys(j, where, {"law", "mu"});
        return SizeLaw::threePlusPoisson(number(j, "mu", where));
    }
    if (law == "uniform") {
        allowKeys(j, where, {"law", "lo", "hi"});
        return SizeLaw::uniformInt(static_cast<int>(count(j, "lo", where)),
                                   static_cast<int>(count(j, "hi", where)));
    }
    if (law == "fixed") {
        allowKeys(j, where, {"law", "size"});
        return SizeLaw::fixed(static_cast<int>(count(j, "size", where)));
    }
    throw InvalidInput(where + ".law must be three-plus-poisson, uniform or fixed");
}

TurnLaw parseTurn(const json& j, const std::string& where, TurnLaw def) {
    if (j.is_null()) {
        return def;
    }
    const std::string law = text(j, "law", where);
    allowKeys(j, where, {"law", "scaleDeg"});
    if (law == "uniform") {
        return TurnLaw::uniform(degToRad(number(j, "scaleDeg", where)));
    }
    if (law == "wrapped-normal") {
        return TurnLaw::wrappedNormal(degToRad(number(j, "scaleDeg", where)));
    }
    if (law == "zero") {
        return TurnLaw::zero();
    }
    throw InvalidInput(where + ".law must be uniform, wrapped-normal or zero");
}

LengthLaw parseLength(const json& j, const std::string& where, LengthLaw def) {
    if (j.is_null()) {
        return def;
    }
    allowKeys(j, where, {"lo", "hi"});
    return {number(j, "lo", where, def.lo), number(j, "hi", where, def.hi)};
}

json sub(const json& j, const char* key) { return j.contains(key) ? j.at(key) : json(); }

// ---------------------------------------------------------------------------
// Output helpers

struct Bundle {
    fs::path dir;
    std::set<std::string> files;

    std::ofstream open(const std::string& name) {
        files.insert(name);
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + (dir / name).string());
        }
        return f;
    }
    void writeJson(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
    void writePoints(const std::string& name, const PointTable& t) {
        files.insert(name);
        writePointsCsv((dir / name).string(), t);
    }
};

json finite(double v) { return std::isfinite(v) ? json(v) : json(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf")); }

json nullReportJson(const NullTestReport& r) {
    json j{{"mode", r.mode}, {"observed", r.observed}, {"expected", finite(r.expected)},
           {"variance", finite(r.variance)}, {"cv", finite(r.cv)}, {"z", finite(r.z)},
           {"pValue", finite(r.pValue)}};
    if (r.mode == "simulation") {
        j["nSim"] = r.nSim;
        j["exceedances"] = r.exceedances;
    }
    return j;
}

struct Context {
    json config;
    fs::path configDir;
    const CommandOptions& opts;
    Bundle& bundle;
    std::ostream& out;
    std::ostream& err;
    std::vector<std::string> warnings;

    std::uint64_t seed() const {
        if (!opts.seed) {
            throw InvalidInput("--seed is required for '" + opts.command + "'");
        }
        return *opts.seed;
    }
    std::string path(const std::string& p) const {
        const fs::path q(p);
        return q.is_absolute() ? q.string() : (configDir / q).string();
    }
    PointTable points(const Region& region) const {
        PointTable t = readPointsCsv(path(text(config, "points", "config")));
        const Metric metric = region.naturalMetric();
        for (const auto& p : t.points) {
            validatePoint(metric, p);
        }
        return t;
    }
};

// ---------------------------------------------------------------------------
// Commands

int cmdDiagnose(Context& c) {
    allowKeys(c.config, "config", {"points", "region", "triad", "mode", "nPairs", "nSim"});
    const Region region = parseRegion(need(c.config, "region", "config"));
    const TriadParams params = parseTriad(c.config, std::numeric_limits<double>::infinity());
    const std::string mode = text(c.config, "mode", "config", "both");
    if (mode != "theory" && mode != "simulation" && mode != "both") {
        throw InvalidInput("config.mode must be theory, simulation or both");
    }
    const PointTable table = c.points(region);
    const Metric metric = region.naturalMetric();
    const Rng rng(c.seed());
    const unsigned workers = c.opts.workers;

    TriadCensus census = countBluntTriads(table.points, params, metric, workers);
    const std::size_t tetrads = countAlignedTetrads(census);
    json report{{"n", table.points.size()},
                {"epsilonDeg", radToDeg(params.epsilon)},
                {"d0", finite(params.d0)},
                {"observedTriads", census.triads.size()},
                {"observedTetrads", tetrads}};
    if (mode != "simulation") {
        const auto m = estimateMoments(region, params, count(c.config, "nPairs", "config", 100000),
                                       rng.child(0), {100, workers});
        const auto tm = triadCountMoments(table.points.size(), params.epsilon, m);
        json th = nullReportJson(poissonNullTheory(census.triads.size(), tm));
        th["seExpected"] = tm.seExpected;
        th["seCv"] = tm.seCv;
        th["alpha"] = m.alpha;
        th["beta"] = m.beta;
        th["gamma"] = m.gamma;
        for (const auto& w : tm.warnings) {
            c.warnings.push_back(w);
        }
        report["theory"] = th;
    }
    if (mode != "theory") {
        const std::size_t nSim = count(c.config, "nSim", "config", 199);
        const auto r = poissonNullSimulation(census.triads.size(), table.points.size(), region, params,
                                             nSim, rng.child(1), workers);
        report["simulation"] = nullReportJson(r);
        const auto sims = simulateNullCounts(table.points.size(), region, params, nSim, rng.child(1), workers);
        double mean = 0.0, ss = 0.0;
        std::size_t exceed = 0;
        for (double t : sims.tetrads) {
            mean += t;
            exceed += t >= static_cast<double>(tetrads);
        }
        mean /= static_cast<double>(nSim);
        for (double t : sims.tetrads) {
            ss += (t - mean) * (t - mean);
        }
        const double sd = std::sqrt(ss / (static_cast<double>(nSim) - 1.0));
        report["simulationTetrads"] = {{"observed", tetrads},
                                       {"expected", mean},
                                       {"cv", mean > 0.0 ? finite(sd / mean) : json(0.0)},
                                       {"pValue", (exceed + 1.0) / (static_cast<double>(nSim) + 1.0)}};
    }
    report["warnings"] = c.warnings;
    c.bundle.writeJson("diagnose.json", report);
    c.out << "triads " << census.triads.size() << ", tetrads " << tetrads << '\n';
    return kExitOk;
}

int cmdSimulate(Context& c) {
    allowKeys(c.config, "config", {"preset", "region", "model", "lambda0", "lambda1", "size", "length",
                                   "turn", "noise", "fixedNoise", "nTot", "w", "n", "meanCount",
                                   "dispersionRadius"});
    const std::string preset = text(c.config, "preset", "config", "none");
    json cfg = c.config;
    if (preset == "mixture") {
        // Fixed-total mixture scenario on the 150 x 360 rectangle.
        json defaults{{"region", {{"type", "rect"}, {"width", 150}, {"height", 360}}},
                      {"model", "fixed-total"},
                      {"nTot", 697},
                      {"w", 0.5},
                      {"size", {{"law", "uniform"}, {"lo", 3}, {"hi", 8}}},
                      {"length", {{"lo", 2}, {"hi", 10}}},
                      {"turn", {{"law", "uniform"}, {"scaleDeg", 15}}}};
        defaults.update(cfg);
        cfg = defaults;
        cfg.erase("preset");
    } else if (preset != "none") {
        throw InvalidInput("config.preset must be 'mixture' when given");
    }
    const Region region = parseRegion(need(cfg, "region", "config"));
    const std::string model = text(cfg, "model", "config");
    const SizeLaw size = parseSize(sub(cfg, "size"), "size", SizeLaw::threePlusPoisson(2.0));
    const LengthLaw length = parseLength(sub(cfg, "length"), "length", LengthLaw{});
    const TurnLaw turn = parseTurn(sub(cfg, "turn"), "turn", TurnLaw{});
    Rng rng(c.seed());

    Realisation r;
    if (model == "pfp") {
        PFPParams p;
        p.lambda0 = number(cfg, "lambda0", "config", p.lambda0);
        p.lambda1 = number(cfg, "lambda1", "config", p.lambda1);
        p.size = size;
        p.length = length;
        p.turn = turn;
        const std::string noise = text(cfg, "noise", "config", "poisson");
        if (noise == "fixed") {
            p.noiseMode = PFPParams::NoiseMode::FixedCount;
            p.fixedNoise = count(cfg, "fixedNoise", "config");
        } else if (noise != "poisson") {
            throw InvalidInput("config.noise must be poisson or fixed");
        }
        r = simulatePFP(p, region, rng);
    } else if (model == "fixed-total") {
        r = simulateFixedTotal(count(cfg, "nTot", "config"), number(cfg, "w", "config"), size, length,
                               turn, region, rng);
    } else if (model == "pcp") {
        const double radius = number(cfg, "dispersionRadius", "config", defaultDispersionRadius(length));
        r = simulatePCP(count(cfg, "nTot", "config"), number(cfg, "w", "config"), size, radius, region, rng);
    } else if (model == "poisson") {
        if (cfg.contains("meanCount")) {
            r = simulatePoissonIntensity(number(cfg, "meanCount", "config"), region, rng);
        } else {
            r = simulatePoisson(count(cfg, "n", "config"), region, rng);
        }
    } else {
        throw InvalidInput("config.model must be pfp, fixed-total, pcp or poisson");
    }

    PointTable table{r.points, std::nullopt, region.spherical()};
    c.bundle.writePoints("points.csv", table);
    json truth{{"nPoints", r.points.size()},
               {"filaments", r.trueFilaments},
               {"labels", r.labels},
               {"parents", r.parents},
               {"warnings", r.warnings}};
    c.bundle.writeJson("truth.json", truth);
    c.out << r.points.size() << " points, " << r.trueFilaments.size() << " groups\n";
    return kExitOk;
}

int cmdSearch(Context& c) {
    json& cfg = c.config;
    if (c.opts.method) {
        cfg["method"] = *c.opts.method;
    }
    allowKeys(cfg, "config", {"points", "region", "triad", "method", "exclusive", "linearityTest"});
    const Region region = parseRegion(need(cfg, "region", "config"));
    const TriadParams params = parseTriad(cfg, 10.0);
    const std::string method = text(cfg, "method", "config", "as");
    const PointTable table = c.points(region);
    const Metric metric = region.naturalMetric();
    FilamentSet set;
    if (method == "as") {
        set = arcSearch(table.points, params, metric, flag(cfg, "exclusive", "config", false), c.opts.workers);
    } else if (method == "mst") {
        set = mstFilaments(table.points, params, metric);
        if (flag(cfg, "exclusive", "config", false)) {
            set = makeExclusive(table.points, metric, set);
        }
    } else {
        throw InvalidInput("config.method must be as or mst");
    }
    {
        auto f = c.bundle.open("filaments.csv");
        writeFilamentsCsv(f, set);
    }
    json list = json::array();
    for (const auto& f : set.filaments) {
        list.push_back({{"points", f.pointIndices},
                        {"edgeLengths", f.edgeLengths},
                        {"interiorAngles", f.interiorAngles},
                        {"linearity", finite(linearity(f, table.points, metric))}});
    }
    c.bundle.writeJson("filaments.json", {{"method", method},
                                          {"exclusive", set.exclusive},
                                          {"nPoints", table.points.size()},
                                          {"nFilaments", set.filaments.size()},
                                          {"filaments", list}});
    if (cfg.contains("linearityTest")) {
        const json& lt = cfg.at("linearityTest");
        allowKeys(lt, "linearityTest", {"nullSims", "sigLevel"});
        const auto rep = linearityTest(table.points, region, params, count(lt, "nullSims", "linearityTest", 100),
                                       number(lt, "sigLevel", "linearityTest", 0.05), Rng(c.seed()),
                                       c.opts.workers);
        json per = json::array();
        for (double v : rep.perFilament) {
            per.push_back(finite(v));
        }
        c.bundle.writeJson("linearity.json", {{"perFilament", per},
                                              {"median", finite(rep.median)},
                                              {"criticalValue", finite(rep.criticalValue)},
                                              {"pValue", rep.pValue},
                                              {"reject", rep.decision},
                                              {"inconclusive", rep.inconclusive},
                                              {"nullMedians", rep.nullMedians},
                                              {"warnings", rep.warnings}});
    }
    c.out << set.filaments.size() << " filaments\n";
    return kExitOk;
}

int cmdAbc(Context& c) {
    allowKeys(c.config, "config", {"points", "region", "triad", "priors", "abc"});
    const Region region = parseRegion(need(c.config, "region", "config"));
    ABCConfig cfg;
    cfg.search = parseTriad(c.config, 10.0);
    cfg.workers = c.opts.workers;
    Priors priors;
    if (c.config.contains("priors")) {
        const json& p = c.config.at("priors");
        allowKeys(p, "priors", {"lambda0", "lambda1", "mu"});
        auto range = [&](const char* key, double& lo, double& hi) {
            if (p.contains(key)) {
                const Point r = pair(p, key, "priors");
                lo = r.x;
                hi = r.y;
            }
        };
        range("lambda0", priors.lambda0Lo, priors.lambda0Hi);
        range("lambda1", priors.lambda1Lo, priors.lambda1Hi);
        double muLo = std::exp(priors.logMuLo), muHi = std::exp(priors.logMuHi);
        range("mu", muLo, muHi);
        if (!(muLo > 0.0)) {
            throw InvalidInput("priors.mu bounds must be positive");
        }
        priors.logMuLo = std::log(muLo);
        priors.logMuHi = std::log(muHi);
    }
    if (c.config.contains("abc")) {
        const json& a = c.config.at("abc");
        allowKeys(a, "abc", {"iterations", "threshold", "acceptOnEqual", "length", "turn", "noise", "zipSigLevel"});
        cfg.iterations = count(a, "iterations", "abc", cfg.iterations);
        cfg.threshold = number(a, "threshold", "abc", cfg.threshold);
        cfg.acceptOnEqual = flag(a, "acceptOnEqual", "abc", true);
        cfg.zipSigLevel = number(a, "zipSigLevel", "abc", cfg.zipSigLevel);
        cfg.length = parseLength(sub(a, "length"), "abc.length", LengthLaw{2.0, cfg.search.d0});
        cfg.turn = parseTurn(sub(a, "turn"), "abc.turn", TurnLaw::uniform(cfg.search.epsilon));
        const std::string noise = text(a, "noise", "abc", "poisson");
        if (noise == "fixed") {
            cfg.noiseMode = PFPParams::NoiseMode::FixedCount;
        } else if (noise != "poisson") {
            throw InvalidInput("abc.noise must be poisson or fixed");
        }
    } else {
        cfg.length = LengthLaw{2.0, cfg.search.d0};
        cfg.turn = TurnLaw::uniform(cfg.search.epsilon);
    }
    const PointTable table = c.points(region);
    const auto post = rejectionABC(table.points, priors, cfg, region, Rng(c.seed()));

    {
        auto f = c.bundle.open("accepted.csv");
        f << "iteration,lambda0,lambda1,mu,distance\n";
        for (const auto& d : post.accepted) {
            f << d.iteration << ',' << formatReal(d.theta.lambda0) << ',' << formatReal(d.theta.lambda1) << ','
              << formatReal(d.theta.mu) << ',' << formatReal(d.distance) << '\n';
        }
    }
    json summary{{"iterations", post.iterations},
                 {"accepted", post.accepted.size()},
                 {"acceptanceRate", post.acceptanceRate},
                 {"threshold", finite(cfg.threshold)},
                 {"observedFeatures",
                  {{"totalPoints", post.observed.totalPoints},
                   {"nonFilamentPoints", post.observed.nonFilamentPoints},
                   {"nFilaments", post.observed.nFilaments},
                   {"residualBluntTriads", post.observed.residualBluntTriads}}},
                 {"warnings", post.warnings}};
    if (post.summary) {
        const auto& s = *post.summary;
        auto param = [&](const char* name, const ParamSummary& p) {
            summary["posterior"][name] = {{"mean", p.mean}, {"median", p.median}, {"sd", p.sd}};
            auto f = c.bundle.open(std::string("density_") + name + ".csv");
            f << "value,density\n";
            for (std::size_t i = 0; i < p.grid.size(); ++i) {
                f << formatReal(p.grid[i]) << ',' << formatReal(p.density[i]) << '\n';
            }
        };
        param("lambda0", s.lambda0);
        param("lambda1", s.lambda1);
        param("mu", s.mu);
        summary["posterior"]["medianFilamentLength"] = s.medianFilamentLength;
    }
    c.bundle.writeJson("posterior.json", summary);
    c.out << post.accepted.size() << " of " << post.iterations << " draws accepted\n";
    if (post.accepted.empty()) {
        c.err << "error: no ABC draws accepted; raise abc.threshold or the iteration count\n";
        return kExitNoAccepted;
    }
    return kExitOk;
}

int cmdIngest(Context& c) {
    allowKeys(c.config, "config", {"source", "grid", "catalogue"});
    const std::string source = text(c.config, "source", "config");
    if (source == "catalogue") {
        const json& j = need(c.config, "catalogue", "config");
        allowKeys(j, "catalogue", {"file", "center", "radius"});
        PointTable in = readPointsCsv(c.path(text(j, "file", "catalogue")));
        const Point centre = pair(j, "center", "catalogue", Point{0.0, 0.0});
        const double radius = number(j, "radius", "catalogue", 10.0);
        const Metric metric = Metric::greatCircle(kDegreeSphereRadius);
        PointTable out{{}, in.labels ? std::optional<std::vector<int>>(std::vector<int>{}) : std::nullopt, true};
        for (std::size_t i = 0; i < in.points.size(); ++i) {
            Point p = in.points[i];
            validatePoint(metric, p);
            p.x = normaliseLongitude(p.x);
            if (distance(metric, centre, p) <= radius * (1.0 + 1e-12)) {
                out.points.push_back(p);
                if (out.labels) {
                    out.labels->push_back((*in.labels)[i]);
                }
            }
        }
        c.bundle.writePoints("points.csv", out);
        c.bundle.writeJson("ingest.json", {{"source", source}, {"input", in.points.size()}, {"kept", out.points.size()}});
        c.out << out.points.size() << " of " << in.points.size() << " catalogue points kept\n";
        return kExitOk;
    }
    if (source != "grid") {
        throw InvalidInput("config.source must be grid or catalogue");
    }
    const json& j = need(c.config, "grid", "config");
    allowKeys(j, "grid", {"axis", "replications", "latMin", "latMax", "cyclic", "select"});
    const std::string axis = c.path(text(j, "axis", "grid"));
    const json& reps = need(j, "replications", "grid");
    if (!reps.is_array() || reps.empty()) {
        throw InvalidInput("grid.replications must be a non-empty list of files");
    }
    std::vector<GridField> fields;
    for (const auto& r : reps) {
        if (!r.is_string()) {
            throw InvalidInput("grid.replications entries must be file names");
        }
        fields.push_back(readGridCsv(c.path(r.get<std::string>()), axis));
        if (fields.back().rows != fields.front().rows || fields.back().cols != fields.front().cols) {
            throw InvalidInput("inconsistent grid shapes across replications");
        }
    }
    const double latMin = number(j, "latMin", "grid", -90.0);
    const double latMax = number(j, "latMax", "grid", 90.0);
    const bool cyclic = flag(j, "cyclic", "grid", true);
    auto standardised = standardiseAcrossReplications(fields);
    for (const auto& w : standardised.warnings) {
        c.warnings.push_back(w);
    }
    std::vector<std::size_t> chosen;
    if (j.contains("select")) {
        chosen.push_back(count(j, "select", "grid"));
        if (chosen.front() >= fields.size()) {
            throw InvalidInput("grid.select is out of range");
        }
    } else {
        for (std::size_t k = 0; k < fields.size(); ++k) {
            chosen.push_back(k);
        }
    }
    json counts = json::array();
    for (std::size_t k : chosen) {
        // Minima are found on the full grid so that band-edge rows keep
        // their neighbours, then filtered to the band.
        PointSet all = localMinima(standardised.fields[k], cyclic);
        PointTable out{{}, std::nullopt, true};
        for (const auto& p : all) {
            if (p.y >= latMin && p.y <= latMax) {
                out.points.push_back({normaliseLongitude(p.x), p.y});
            }
        }
        c.bundle.writePoints("points_" + std::to_string(k) + ".csv", out);
        counts.push_back({{"replication", k}, {"points", out.points.size()}});
    }
    c.bundle.writeJson("ingest.json", {{"source", source},
                                       {"replications", fields.size()},
                                       {"zeroVarianceCells", standardised.zeroVarianceCells.size()},
                                       {"outputs", counts},
                                       {"warnings", c.warnings}});
    c.out << chosen.size() << " point sets written\n";
    return kExitOk;
}

json reportJson(const ReproReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"label", row.label},
                        {"computed", finite(row.computed)},
                        {"lo", finite(row.lo)},
                        {"hi", finite(row.hi)},
                        {"published", finite(row.published)},
                        {"checked", row.checked},
                        {"pass", row.pass()}});
    }
    return {{"table", r.name}, {"pass", r.pass()}, {"notes", r.notes}, {"rows", rows}};
}

int cmdReproduce(Context& c, double& seconds) {
    json& cfg = c.config;
    if (c.opts.table) {
        cfg["table"] = *c.opts.table;
    }
    if (c.opts.scale) {
        cfg["scale"] = *c.opts.scale;
    }
    allowKeys(cfg, "config", {"table", "scale", "abcIterations", "abcScenarios", "wLevels", "momentPairs"});
    ReproOptions ro;
    ro.seed = c.seed();
    ro.workers = c.opts.workers;
    ro.scale = number(cfg, "scale", "config", 1.0);
    ro.abcIterations = count(cfg, "abcIterations", "config", ro.abcIterations);
    ro.abcScenarios = count(cfg, "abcScenarios", "config", ro.abcScenarios);
    ro.momentPairs = count(cfg, "momentPairs", "config", ro.momentPairs);
    if (cfg.contains("wLevels")) {
        for (const auto& w : cfg.at("wLevels")) {
            ro.wLevels.push_back(w.get<double>());
        }
    }
    const std::string tableName = text(cfg, "table", "config");
    std::vector<std::string> tables;
    if (tableName == "all") {
        tables = reproductionTables();
    } else {
        tables.push_back(tableName);
    }
    bool ok = true;
    for (const auto& t : tables) {
        const ReproReport rep = reproduce(t, ro);
        seconds += rep.seconds;
        ok = ok && rep.pass();
        c.bundle.writeJson("reproduce_" + t + ".json", reportJson(rep));
        auto f = c.bundle.open("reproduce_" + t + ".txt");
        for (const auto& n : rep.notes) {
            f << "# " << n << '\n';
        }
        for (const auto& row : rep.rows) {
            char line[256];
            std::snprintf(line, sizeof line, "%-44s %12.5g  [%10.4g, %10.4g]  published %8.4g  %s\n",
                          row.label.c_str(), row.computed, row.lo, row.hi, row.published,
                          !row.checked ? "info" : (row.pass() ? "ok" : "MISS"));
            f << line;
            c.out << line;
        }
        c.out << t << ": " << (rep.pass() ? "all checks within tolerance" : "some checks outside tolerance")
              << '\n';
    }
    return ok ? kExitOk : kExitChecksFailed;
}

} // namespace

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> commandNames() { return {"diagnose", "simulate", "search", "abc", "ingest", "reproduce"}; }

int runCommand(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto names = commandNames();
    if (std::find(names.begin(), names.end(), opts.command) == names.end()) {
        err << "error: unknown command '" << opts.command << "'\n";
        return kExitInvalid;
    }
    Bundle bundle;
    bundle.dir = opts.outDir;
    int code = kExitOk;
    double reproSeconds = 0.0;
    json effective;
    std::optional<std::string> failure;
    try {
        json config = json::object();
        fs::path configDir = fs::current_path();
        if (!opts.configPath.empty()) {
            std::ifstream in(opts.configPath);
            if (!in) {
                throw InvalidInput("cannot open config file " + opts.configPath);
            }
            try {
                config = json::parse(in, nullptr, true, /*ignore_comments=*/true);
            } catch (const json::parse_error& e) {
                throw ParseError(opts.configPath, e.byte, e.what());
            }
            configDir = fs::absolute(opts.configPath).parent_path();
        } else if (opts.command != "reproduce") {
            throw InvalidInput("--config is required for '" + opts.command + "'");
        }
        if (opts.points) {
            config["points"] = *opts.points;
        }
        if (opts.workers == 0) {
            throw InvalidInput("--workers must be at least 1");
        }
        fs::create_directories(bundle.dir);
        Context ctx{config, configDir, opts, bundle, out, err, {}};
        if (opts.command == "diagnose") code = cmdDiagnose(ctx);
        else if (opts.command == "simulate") code = cmdSimulate(ctx);
        else if (opts.command == "search") code = cmdSearch(ctx);
        else if (opts.command == "abc") code = cmdAbc(ctx);
        else if (opts.command == "ingest") code = cmdIngest(ctx);
        else code = cmdReproduce(ctx, reproSeconds);
        effective = ctx.config;
    } catch (const json::exception& e) {
        failure = std::string("invalid configuration: ") + e.what();
        code = kExitInvalid;
    } catch (const InvalidInput& e) {
        failure = e.what();
        code = kExitInvalid;
    } catch (const Error& e) {
        failure = e.what();
        code = kExitInvalid;
    } catch (const std::exception& e) {
        failure = e.what();
        code = kExitFailure;
    }
    if (failure) {
        err << "error: " << *failure << '\n';
    }

    // The manifest is written even when the command fails.
    try {
        fs::create_directories(bundle.dir);
        const std::string canonical = effective.dump();
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json timing{{"wallSeconds", wall}, {"workers", opts.workers}};
        if (opts.command == "reproduce") {
            timing["tableSeconds"] = reproSeconds;
        }
        bundle.writeJson("timing.json", timing);
        json manifest{{"tool", "filamenta"},
                      {"version", kVersion},
                      {"command", opts.command},
                      {"seed", opts.seed ? json(*opts.seed) : json()},
                      {"configHash", hash},
                      {"config", effective},
                      {"exitCode", code},
                      {"error", failure ? json(*failure) : json()}};
        std::set<std::string> files = bundle.files;
        files.insert("manifest.json");
        manifest["files"] = files;
        bundle.writeJson("manifest.json", manifest);
    } catch (const std::exception& e) {
        err << "error: could not write manifest: " << e.what() << '\n';
        if (code == kExitOk) {
            code = kExitFailure;
        }
    }
    return code;
}

} // namespace filamenta
