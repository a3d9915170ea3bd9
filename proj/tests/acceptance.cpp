// Acceptance suite: one line per criterion, tolerances fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bundle.hpp"
#include "filamenta/abc_infer.hpp"
#include "filamenta/commands.hpp"
#include "filamenta/filament_search.hpp"
#include "filamenta/pfp_sim.hpp"
#include "filamenta/point_io.hpp"
#include "filamenta/reproduce.hpp"
#include "filamenta/triad_stats.hpp"
#include "oracles.hpp"

using namespace filamenta;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict = Verdict::Pass;
    std::vector<std::string> details;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            verdict = Verdict::Fail;
            details.push_back("FAILED " + what);
        }
    }
    void note(const std::string& what) { details.push_back(what); }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

/// Checks every row of a report against its own interval and records misses.
void requireRows(Outcome& o, const ReproReport& rep, const std::function<bool(const CheckRow&)>& select) {
    for (const auto& row : rep.rows) {
        if (!row.checked || !select(row)) {
            continue;
        }
        o.require(row.pass(), row.label + " = " + fmt("%.4g", row.computed) + " outside [" + fmt("%.4g", row.lo) +
                                  ", " + fmt("%.4g", row.hi) + "]");
    }
}

double rowValue(Outcome& o, const ReproReport& rep, const std::string& label) {
    const CheckRow* r = rep.find(label);
    if (r == nullptr) {
        o.require(false, "missing row '" + label + "'");
        return std::nan("");
    }
    return r->computed;
}

void band(Outcome& o, const std::string& what, double v, double lo, double hi) {
    const bool ok = v >= lo && v <= hi;
    const std::string line = what + " = " + fmt("%.4g", v) + " in [" + fmt("%.4g", lo) + ", " + fmt("%.4g", hi) + "]";
    o.require(ok, line);
    if (ok) {
        o.note(line);
    }
}

// ---------------------------------------------------------------------------

Outcome momentTheory() {
    Outcome o;
    ReproOptions opts;
    opts.momentPairs = 100000;
    const auto rep = reproduceMomentTheory(opts);
    requireRows(o, rep, [](const CheckRow&) { return true; });
    o.require(rep.seconds < 60.0, "runtime " + fmt("%.1f", rep.seconds) + " s over 60 s");
    o.note(std::to_string(rep.rows.size()) + " values, " + fmt("%.1f", rep.seconds) + " s");
    return o;
}

Outcome momentSimulation() {
    Outcome o;
    ReproOptions opts;
    opts.scale = 1.0;
    const auto rep = reproduceMomentSimulation(opts);
    requireRows(o, rep, [](const CheckRow&) { return true; });
    o.require(rep.seconds < 600.0, "runtime " + fmt("%.1f", rep.seconds) + " s over 600 s");
    o.note(std::to_string(rep.rows.size()) + " values from 1000 patterns per cell, " + fmt("%.1f", rep.seconds) + " s");
    return o;
}

Outcome oracleEquivalence() {
    Outcome o;
    Rng rng(2024);
    std::size_t triadMismatch = 0, tetradMismatch = 0, mstMismatch = 0, totalTriads = 0, totalTetrads = 0;
    for (int t = 0; t < 200; ++t) {
        Rng r = rng.child(t);
        const bool sphere = t % 2 == 1;
        const Region region = sphere ? Region::cap({r.uniform(-180, 180), r.uniform(-60, 60)}, r.uniform(3, 20))
                                     : Region::rect(r.uniform(1, 10), r.uniform(1, 10));
        const auto n = static_cast<std::size_t>(r.uniformInt(3, 80));
        PointSet pts(n);
        for (auto& p : pts) p = sampleUniform(region, r);
        const double eps = degToRad(r.uniform(2, 45));
        const double d0 = t % 4 == 0 ? std::numeric_limits<double>::infinity() : r.uniform(0.2, 5);
        auto census = countBluntTriads(pts, TriadParams::make(eps, d0), region.naturalMetric(), 2);
        std::vector<oracle::TriadKey> got;
        for (const auto& tr : census.triads) got.push_back({tr.points, tr.apex});
        const auto expect = oracle::bruteTriads(pts, eps, d0, {sphere});
        triadMismatch += got != expect;
        totalTriads += expect.size();
        countAlignedTetrads(census);
        auto tet = census.tetrads;
        std::sort(tet.begin(), tet.end());
        const auto expectTet = oracle::bruteTetrads(pts, eps, d0, {sphere});
        tetradMismatch += tet != expectTet;
        totalTetrads += expectTet.size();
    }
    for (int t = 0; t < 100; ++t) {
        Rng r = rng.child(1000 + t);
        const bool sphere = t % 2 == 1;
        const Region region = sphere ? Region::cap({0, 0}, 15) : Region::rect(30, 30);
        PointSet pts(static_cast<std::size_t>(r.uniformInt(2, 200)));
        for (auto& p : pts) p = sampleUniform(region, r);
        const auto expect = oracle::kruskal(pts, {sphere});
        std::vector<std::pair<std::size_t, std::size_t>> got;
        for (const auto& e : minimumSpanningTree(pts, region.naturalMetric())) {
            got.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
        }
        std::sort(got.begin(), got.end());
        mstMismatch += got != expect;
    }
    o.require(triadMismatch == 0, std::to_string(triadMismatch) + " triad censuses differ");
    o.require(tetradMismatch == 0, std::to_string(tetradMismatch) + " tetrad censuses differ");
    o.require(mstMismatch == 0, std::to_string(mstMismatch) + " spanning trees differ");
    o.note("200 census instances (" + std::to_string(totalTriads) + " triads, " + std::to_string(totalTetrads) +
           " tetrads), 100 trees");
    return o;
}

Outcome powerTable() {
    Outcome o;
    ReproOptions opts;
    opts.scale = 0.2;
    const auto rep = reproducePowerTable(opts);
    band(o, "Poisson-null power at w=0.10", rowValue(o, rep, "w=0.10 PP triads"), 0.87 - 0.07, 0.87 + 0.07);
    for (const char* w : {"0.00", "0.05", "0.10", "0.15", "0.20", "0.25"}) {
        const double v = rowValue(o, rep, std::string("w=") + w + " PCP triads");
        o.require(v <= 0.10, std::string("cluster-null power at w=") + w + " = " + fmt("%.3f", v) + " above 0.10");
    }
    o.require(rep.seconds < 1800.0, "runtime over 30 minutes");
    o.note("200 replicates per cell, " + fmt("%.0f", rep.seconds) + " s");
    return o;
}

Outcome recovery() {
    Outcome o;
    ReproOptions opts;
    opts.scale = 0.2;
    opts.wLevels = {0.5};
    const auto rep = reproduceRecovery(opts);
    band(o, "median capture AS", rowValue(o, rep, "w=0.5 capture AS"), 0.87, 0.97);
    band(o, "median capture MST", rowValue(o, rep, "w=0.5 capture MST"), 0.63, 0.73);
    band(o, "median sensitivity AS", rowValue(o, rep, "w=0.5 sensitivity AS"), 0.93, 0.99);
    band(o, "median sensitivity MST", rowValue(o, rep, "w=0.5 sensitivity MST"), 0.64, 0.74);
    band(o, "share of replicates with AS sensitivity above MST", rowValue(o, rep, "w=0.5 AS sensitivity above MST"),
         0.95, 1.0);
    return o;
}

Outcome linearityPower() {
    Outcome o;
    ReproOptions opts;
    opts.scale = 1.0;
    const auto rep = reproduceLinearityPower(opts);
    band(o, "size at w=0", rowValue(o, rep, "w=0.0 PFP"), 0.01, 0.09);
    for (int k = 1; k < 10; ++k) {
        const std::string w = fmt("%.1f", k / 10.0);
        const double f = rowValue(o, rep, "w=" + w + " PFP");
        if (k >= 3) {
            o.require(f >= 0.8, "filament power at w=" + w + " = " + fmt("%.2f", f) + " below 0.8");
        }
    }
    for (int k = 0; k < 10; ++k) {
        const std::string w = fmt("%.1f", k / 10.0);
        const double c = rowValue(o, rep, "w=" + w + " PCP");
        o.require(c <= 0.15, "cluster power at w=" + w + " = " + fmt("%.2f", c) + " above 0.15");
    }
    std::string curve = "filament power:";
    for (int k = 0; k < 10; ++k) curve += " " + fmt("%.2f", rowValue(o, rep, "w=" + fmt("%.1f", k / 10.0) + " PFP"));
    o.note(curve);
    return o;
}

Outcome abcRecovery() {
    Outcome o;
    ReproOptions opts;
    opts.scale = 0.1;
    opts.abcIterations = 2000;
    opts.abcScenarios = 1;
    const auto rep = reproduceAbcRecovery(opts);
    const std::string tag = "theta=(60,350,2)";
    band(o, "mean posterior mean lambda0", rowValue(o, rep, tag + " mean lambda0"), 48.0, 72.0);
    band(o, "mean posterior mean mu", rowValue(o, rep, tag + " mean mu"), 1.6, 2.4);
    band(o, "mean posterior mean lambda1", rowValue(o, rep, tag + " mean lambda1"), 313.0, 387.0);
    const double rate = rowValue(o, rep, tag + " min acceptance rate");
    o.require(rate > 0.0, "a run accepted no draws");
    o.note("10 datasets x 2000 iterations, min acceptance " + fmt("%.4f", rate) + ", " + fmt("%.0f", rep.seconds) + " s");
    return o;
}

Outcome properties() {
    Outcome o;
    // H(P,Q)
    {
        Rng rng(1);
        bool ok = true;
        for (int i = 0; i < 20000; ++i) {
            const double t = rng.uniform(0, 4), u = rng.uniform(0, 4), v = rng.uniform(0, 4), d0 = rng.uniform(0.05, 2);
            const double h = wedgeLensArea({t, u, v, d0});
            ok = ok && h >= 0 && std::abs(h - wedgeLensArea({t, v, u, d0})) < 1e-12;
            if (t < d0) ok = ok && std::abs(h - (std::pow(std::min(u, d0), 2) + t * t / 3 + std::pow(std::min(v, d0), 2))) < 1e-12;
            else if (t <= 2 * d0) ok = ok && std::abs(h - (2 * d0 * d0 - t * t / 3 - 4 * d0 * d0 * d0 / (3 * t))) < 1e-12;
            else ok = ok && h == 0.0;
            const double lens = wedgeLensArea({d0 * (1 - 1e-9), 0, 0, d0}) - wedgeLensArea({d0 * (1 + 1e-9), 0, 0, d0});
            const double tail = wedgeLensArea({2 * d0 * (1 - 1e-9), u, v, d0});
            ok = ok && std::abs(lens) < 1e-6 && std::abs(tail) < 1e-6;
        }
        o.require(ok, "H(P,Q) branch, continuity or symmetry");
    }
    // Filament invariants on search outputs
    {
        const Region region = Region::rect(150, 360);
        const Metric m = region.naturalMetric();
        const auto params = TriadParams::make(degToRad(15), 10);
        std::size_t bad = 0, checked = 0;
        for (int s = 0; s < 20; ++s) {
            Rng rng(500 + s);
            const auto r = simulateFixedTotal(697, 0.05 * s, SizeLaw::uniformInt(3, 8), {2, 10}, TurnLaw{}, region, rng);
            for (const auto& set : {arcSearch(r.points, params, m), arcSearch(r.points, params, m, true),
                                    mstFilaments(r.points, params, m)}) {
                std::set<std::size_t> claimed;
                for (const auto& f : set.filaments) {
                    ++checked;
                    bool ok = isValidFilament(f, params);
                    std::set<std::size_t> own(f.pointIndices.begin(), f.pointIndices.end());
                    ok = ok && own.size() == f.size();
                    if (set.exclusive) {
                        for (std::size_t i : f.pointIndices) ok = ok && claimed.insert(i).second;
                    }
                    bad += !ok;
                }
            }
        }
        o.require(bad == 0, std::to_string(bad) + " of " + std::to_string(checked) + " filaments break invariants");
    }
    // ABC monotonicity and prior recovery
    {
        const Region region = Region::rect(150, 360);
        Rng gen(3);
        const auto obs = simulatePFP(PFPParams{}, region, gen);
        ABCConfig cfg;
        cfg.iterations = 60;
        std::vector<std::set<std::size_t>> acceptedAt;
        for (double thr : {0.2, 0.4, 0.8, 1.6}) {
            cfg.threshold = thr;
            std::set<std::size_t> ids;
            for (const auto& d : rejectionABC(obs.points, Priors{}, cfg, region, Rng(8)).accepted) ids.insert(d.iteration);
            acceptedAt.push_back(ids);
        }
        bool mono = true;
        for (std::size_t k = 1; k < acceptedAt.size(); ++k) {
            mono = mono && std::includes(acceptedAt[k].begin(), acceptedAt[k].end(), acceptedAt[k - 1].begin(),
                                         acceptedAt[k - 1].end());
        }
        o.require(mono, "accepted sets not nested as the threshold grows");

        cfg.iterations = 2000;
        cfg.threshold = std::numeric_limits<double>::infinity();
        const Priors pr;
        const auto post = rejectionABC(obs.points, pr, cfg, region, Rng(9));
        std::vector<double> a, b, c;
        for (const auto& d : post.accepted) {
            a.push_back(d.theta.lambda0);
            b.push_back(d.theta.lambda1);
            c.push_back(std::log(d.theta.mu));
        }
        auto cdf = [](double lo, double hi) { return [=](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); }; };
        const double pa = oracle::ksPValue(a, cdf(pr.lambda0Lo, pr.lambda0Hi));
        const double pb = oracle::ksPValue(b, cdf(pr.lambda1Lo, pr.lambda1Hi));
        const double pc = oracle::ksPValue(c, cdf(pr.logMuLo, pr.logMuHi));
        o.require(pa > 0.01 && pb > 0.01 && pc > 0.01,
                  "prior recovery KS p-values " + fmt("%.3f", pa) + " " + fmt("%.3f", pb) + " " + fmt("%.3f", pc));
    }
    // zipPrune against a grid-search likelihood maximiser
    {
        double worst = 0.0;
        for (int s = 0; s < 20; ++s) {
            Rng rng(70 + s);
            const Region region = Region::rect(150, 360);
            const auto r = simulateFixedTotal(697, 0.3, SizeLaw::threePlusPoisson(1.5), {2, 10}, TurnLaw{}, region, rng);
            const auto set = arcSearch(r.points, TriadParams::make(degToRad(15), 10), region.naturalMetric(), true);
            const auto pruned = zipPrune(set, rng);
            std::vector<int> counts;
            for (const auto& f : pruned.set.filaments) counts.push_back(static_cast<int>(f.size()) - 3);
            if (counts.empty()) continue;
            const auto [bp, bm] = oracle::zipGrid(counts);
            worst = std::max({worst, std::abs(pruned.finalFit.pi0 - bp), std::abs(pruned.finalFit.mu - bm)});
        }
        o.require(worst < 1e-3, "ZIP fit differs from the grid maximiser by " + fmt("%.2g", worst));
    }
    // Bundle determinism under repeated runs and different worker counts
    {
        bundle::TempDir d("acceptance");
        bundle::run("simulate", d.write("sim.json", R"({"preset": "mixture", "w": 0.4})"), 99, d / "sim");
        const std::string base = R"("points": "sim/points.csv", "region": {"type": "rect", "width": 150, "height": 360})";
        const std::vector<std::pair<std::string, std::string>> cmds{
            {"simulate", d.write("s.json", R"({"preset": "mixture", "w": 0.6})")},
            {"diagnose", d.write("d.json", "{" + base + R"(, "triad": {"epsilonDeg": 15, "d0": 10}, "nSim": 99})")},
            {"search", d.write("f.json", "{" + base + R"(, "linearityTest": {"nullSims": 99}})")},
            {"abc", d.write("a.json", "{" + base + R"(, "abc": {"iterations": 24, "threshold": 0.8}})")},
            {"reproduce", d.write("r.json", R"({"table": "t1", "momentPairs": 20000})")}};
        for (const auto& [cmd, cfg] : cmds) {
            std::map<std::string, std::string> first;
            bool same = true;
            int runIdx = 0;
            for (unsigned workers : {1u, 1u, 4u}) {
                const std::string out = d / (cmd + std::to_string(runIdx++));
                bundle::run(cmd, cfg, 17, out, workers);
                const auto c = bundle::contents(out);
                if (first.empty()) first = c;
                else same = same && c == first;
            }
            o.require(same && first.count("manifest.json") && first.size() >= 2, cmd + " bundle differs between runs");
        }
    }
    if (o.verdict == Verdict::Pass) {
        o.note("H(P,Q), filament invariants, ABC nesting and prior recovery, ZIP oracle, bundle determinism");
    }
    return o;
}

Outcome applicationSmoke() {
    Outcome o;
    const Region cap = Region::cap({0, 0}, 10);
    const Metric m = cap.naturalMetric();
    const auto params = TriadParams::make(degToRad(15), std::sqrt(2.0));
    const std::size_t n = 162;
    const auto tm = triadCountMoments(n, params.epsilon, estimateMoments(cap, params, 100000, Rng(1)));
    std::size_t inside = 0;
    for (int s = 0; s < 200; ++s) {
        Rng rng(Rng(77).child(s));
        const auto pts = simulatePoisson(n, cap, rng).points;
        const auto census = countBluntTriads(pts, params, m);
        inside += std::abs(poissonNullTheory(census.triads.size(), tm).z) < 3.0;
    }
    band(o, "share of Poisson stand-ins with |z| < 3", inside / 200.0, 0.99, 1.0);

    const char* catalogue = std::getenv("FILAMENTA_COLD_CLUMPS");
    if (catalogue == nullptr) {
        o.note("catalogue check SKIPPED: set FILAMENTA_COLD_CLUMPS to a lon,lat CSV");
        if (o.verdict == Verdict::Pass) o.verdict = Verdict::Skip;
        return o;
    }
    PointTable t = readPointsCsv(catalogue);
    PointSet kept;
    for (auto p : t.points) {
        if (distance(m, {0, 0}, p) <= 10.0 * (1 + 1e-12)) kept.push_back({normaliseLongitude(p.x), p.y});
    }
    auto census = countBluntTriads(kept, params, m);
    const std::size_t tetrads = countAlignedTetrads(census);
    o.require(census.triads.size() == 126, "catalogue triads " + std::to_string(census.triads.size()) + " != 126");
    o.require(tetrads == 34, "catalogue tetrads " + std::to_string(tetrads) + " != 34");
    o.note("catalogue: " + std::to_string(kept.size()) + " points, " + std::to_string(census.triads.size()) +
           " triads, " + std::to_string(tetrads) + " tetrads");
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"moment theory, 8 configurations at n=40", momentTheory},
        {"moment simulation cross-check", momentSimulation},
        {"census and spanning-tree oracle equivalence", oracleEquivalence},
        {"count-test power, 200 replicates", powerTable},
        {"filament recovery at w=0.5, 100 replicates", recovery},
        {"linearity-test power curve, 100 replicates", linearityPower},
        {"ABC recovery, 10 datasets", abcRecovery},
        {"property suites", properties},
        {"application smoke tests", applicationSmoke},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.verdict = Verdict::Fail;
            o.details.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        std::cout << "[" << tag << "] criterion " << i + 1 << ": " << criteria[i].first << " (" << fmt("%.1f", secs)
                  << " s)\n";
        for (const auto& d : o.details) std::cout << "       " << d << '\n';
        std::cout.flush();
        failed += o.verdict == Verdict::Fail;
    }
    std::cout << (failed == 0 ? "all criteria met" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
