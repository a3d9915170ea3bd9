#include "filamenta/reproduce.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>

#include "filamenta/abc_infer.hpp"
#include "filamenta/error.hpp"
#include "filamenta/filament_search.hpp"
#include "filamenta/parallel.hpp"
#include "filamenta/pfp_sim.hpp"
#include "filamenta/triad_stats.hpp"
#include "reference_targets.hpp"

namespace filamenta {

namespace {

namespace ref = reference;

struct Sample {
    double mean = 0.0;
    double sd = 0.0;
    double cv = 0.0;
    double seMean = 0.0;
    double seCv = 0.0;
};

Sample describe(const std::vector<double>& x) {
    Sample s;
    const double n = static_cast<double>(x.size());
    s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m3 /= n;
    m4 /= n;
    const double var = m2 / (n - 1.0);
    s.sd = std::sqrt(var);
    s.seMean = s.sd / std::sqrt(n);
    if (s.mean > 0.0 && var > 0.0) {
        s.cv = s.sd / s.mean;
        const double m = s.mean;
        const double v = var * var / (m * m * m * m) + (m4 - var * var) / (4.0 * var * m * m) - m3 / (m * m * m);
        s.seCv = std::sqrt(std::max(0.0, v) / n);
    }
    return s;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::size_t scaled(std::size_t full, double scale, std::size_t minimum = 1) {
    const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(full) * scale));
    return std::max(minimum, n);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string d0Label(double d0) { return std::isinf(d0) ? "inf" : fmt("%g", d0); }

CheckRow within(std::string label, double computed, double centre, double tol, double published) {
    return {std::move(label), computed, centre - tol, centre + tol, published, true};
}

CheckRow info(std::string label, double computed, double published = std::nan("")) {
    CheckRow r;
    r.label = std::move(label);
    r.computed = computed;
    r.published = published;
    r.checked = false;
    return r;
}

void validate(const ReproOptions& opts) {
    if (!(opts.scale > 0.0 && opts.scale <= 1.0)) {
        throw InvalidInput("scale must lie in (0, 1]");
    }
}

template <class Fn>
ReproReport timed(const char* name, const ReproOptions& opts, Fn&& body) {
    validate(opts);
    const auto t0 = std::chrono::steady_clock::now();
    ReproReport rep;
    rep.name = name;
    body(rep);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// Mixture scenario shared by the power, recovery and linearity runs.
struct Mixture {
    Region region = Region::rect(150.0, 360.0);
    std::size_t nTot = 697;
    TriadParams params = TriadParams::make(degToRad(15.0), 10.0);
    SizeLaw size = SizeLaw::uniformInt(3, 8);
    LengthLaw length{2.0, 10.0};
    TurnLaw turn = TurnLaw::uniform(degToRad(15.0));
    double radius = defaultDispersionRadius(LengthLaw{2.0, 10.0});

    Realisation filaments(double w, Rng& rng) const {
        return simulateFixedTotal(nTot, w, size, length, turn, region, rng);
    }
    Realisation clusters(double w, Rng& rng) const {
        return simulatePCP(nTot, w, size, radius, region, rng);
    }
};

// Upper-tail Monte Carlo test: (#null >= x + 1) / (N + 1) <= 0.05.
double rejectionRate(std::vector<double> null, const std::vector<double>& alt) {
    std::sort(null.begin(), null.end());
    std::size_t rejected = 0;
    for (double a : alt) {
        const auto ge = static_cast<double>(null.end() - std::lower_bound(null.begin(), null.end(), a));
        rejected += (ge + 1.0) / (static_cast<double>(null.size()) + 1.0) <= 0.05;
    }
    return static_cast<double>(rejected) / static_cast<double>(alt.size());
}

std::array<std::vector<double>, 2> countsOf(std::size_t reps, unsigned workers, const TriadParams& params,
                                            const Metric& metric,
                                            const std::function<PointSet(Rng&)>& gen, const Rng& rng) {
    std::array<std::vector<double>, 2> out{std::vector<double>(reps), std::vector<double>(reps)};
    parallelFor(reps, workers, [&](std::size_t i) {
        Rng r = rng.child(i);
        const PointSet pts = gen(r);
        auto census = countBluntTriads(pts, params, metric);
        out[1][i] = static_cast<double>(countAlignedTetrads(census));
        out[0][i] = static_cast<double>(census.triads.size());
    });
    return out;
}

TriadCountMoments momentCell(const ref::MomentCell& c, const ReproOptions& opts, const Rng& rng) {
    const double eps = degToRad(c.arcminutes / 60.0);
    const auto params = TriadParams::make(eps, c.d0);
    const auto m = estimateMoments(Region::rect(c.side, 1.0), params, opts.momentPairs, rng,
                                   {100, opts.workers});
    return triadCountMoments(ref::kMomentPoints, eps, m);
}

std::string cellLabel(const ref::MomentCell& c) {
    return "A=" + fmt("%g", c.arcminutes) + " s=" + fmt("%g", c.side) + " d0=" + d0Label(c.d0);
}

std::vector<double> levelsOr(const ReproOptions& opts, std::vector<double> fallback) {
    return opts.wLevels.empty() ? fallback : opts.wLevels;
}

} // namespace

bool ReproReport::pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass(); });
}

const CheckRow* ReproReport::find(const std::string& label) const {
    for (const auto& r : rows) {
        if (r.label == label) {
            return &r;
        }
    }
    return nullptr;
}

ReproReport reproduceMomentTheory(const ReproOptions& opts) {
    return timed("t1", opts, [&](ReproReport& rep) {
        const Rng master = Rng(opts.seed).child(1);
        rep.notes.push_back("angle threshold A read in arcminutes; tolerance 3 SE + half a printed unit");
        for (std::size_t k = 0; k < ref::kMomentCells.size(); ++k) {
            const auto& c = ref::kMomentCells[k];
            const auto tm = momentCell(c, opts, master.child(k));
            rep.rows.push_back(within(cellLabel(c) + " E[N]", tm.expected, c.theoryMean,
                                      3.0 * tm.seExpected + 0.005, c.theoryMean));
            rep.rows.push_back(within(cellLabel(c) + " CV", tm.cv, c.theoryCv, 3.0 * tm.seCv + 0.005,
                                      c.theoryCv));
        }
    });
}

ReproReport reproduceMomentSimulation(const ReproOptions& opts) {
    return timed("t1-sim", opts, [&](ReproReport& rep) {
        const Rng master = Rng(opts.seed).child(1);
        const std::size_t reps = scaled(1000, opts.scale, 20);
        rep.notes.push_back(std::to_string(reps) + " Poisson patterns per cell, compared with the computed theory");
        for (std::size_t k = 0; k < ref::kMomentCells.size(); ++k) {
            const auto& c = ref::kMomentCells[k];
            const auto tm = momentCell(c, opts, master.child(k));
            const double eps = degToRad(c.arcminutes / 60.0);
            const auto sims = simulateNullCounts(ref::kMomentPoints, Region::rect(c.side, 1.0),
                                                 TriadParams::make(eps, c.d0), reps,
                                                 master.child(100 + k), opts.workers);
            const Sample s = describe(sims.triads);
            rep.rows.push_back(within(cellLabel(c) + " sim E[N]", s.mean, tm.expected,
                                      3.0 * std::hypot(s.seMean, tm.seExpected), c.simMean));
            rep.rows.push_back(within(cellLabel(c) + " sim CV", s.cv, tm.cv,
                                      3.0 * std::hypot(s.seCv, tm.seCv), c.simCv));
        }
    });
}

ReproReport reproduceApplicationNull(const ReproOptions& opts) {
    return timed("t2-sim", opts, [&](ReproReport& rep) {
        const Rng master = Rng(opts.seed).child(2);
        const std::size_t reps = scaled(1000, opts.scale, 20);
        const double eps = degToRad(15.0);
        // The published simulation rows carry their own Monte Carlo error
        // from 1000 replicates; it is added to ours.
        auto simRows = [&](const std::string& name, const ref::ApplicationCell& cell,
                           const SimulatedCounts& sims) {
            const Sample t = describe(sims.triads);
            const Sample q = describe(sims.tetrads);
            const double k = std::sqrt(static_cast<double>(reps) / 1000.0);
            rep.rows.push_back(within(name + " sim triads mean", t.mean, cell.simMean,
                                      3.0 * std::hypot(t.seMean, k * t.seMean) + 0.05, cell.simMean));
            rep.rows.push_back(within(name + " sim triads CV", t.cv, cell.simCv,
                                      3.0 * std::hypot(t.seCv, k * t.seCv) + 0.005, cell.simCv));
            rep.rows.push_back(within(name + " sim tetrads mean", q.mean, cell.simTetradMean,
                                      3.0 * std::hypot(q.seMean, k * q.seMean) + 0.05,
                                      cell.simTetradMean));
            rep.rows.push_back(within(name + " sim tetrads CV", q.cv, cell.simTetradCv,
                                      3.0 * std::hypot(q.seCv, k * q.seCv) + 0.005, cell.simTetradCv));
        };

        {
            const Region disc = Region::cap({0.0, 0.0}, 10.0);
            const auto params = TriadParams::make(eps, std::sqrt(2.0));
            const auto m = estimateMoments(disc, params, opts.momentPairs, master.child(0),
                                           {100, opts.workers});
            std::size_t n = 3;
            while (std::abs(expectedTriads(n + 1, eps, m.alpha) - ref::kColdClumps.theoryMean) <
                   std::abs(expectedTriads(n, eps, m.alpha) - ref::kColdClumps.theoryMean)) {
                ++n;
            }
            const auto tm = triadCountMoments(n, eps, m);
            rep.notes.push_back("cold-clump point count solved from the published mean: n = " +
                                std::to_string(n));
            rep.rows.push_back(info("cold clumps n", static_cast<double>(n)));
            rep.rows.push_back(info("cold clumps theory E[N]", tm.expected, ref::kColdClumps.theoryMean));
            rep.rows.push_back(within("cold clumps theory CV", tm.cv, ref::kColdClumps.theoryCv,
                                      3.0 * tm.seCv + 0.005, ref::kColdClumps.theoryCv));
            simRows("cold clumps", ref::kColdClumps,
                    simulateNullCounts(n, disc, params, reps, master.child(1), opts.workers));
        }
        {
            // The published precipitation properties agree with a planar
            // 150 x 360 degree rectangle; the spherical band is reported
            // alongside.
            const auto params = TriadParams::make(eps, 10.0);
            const std::size_t n = ref::kPrecipitationPoints;
            const Region plane = Region::rect(150.0, 360.0);
            const auto m = estimateMoments(plane, params, opts.momentPairs, master.child(2),
                                           {100, opts.workers});
            const auto tm = triadCountMoments(n, eps, m);
            rep.rows.push_back(within("precipitation theory E[N]", tm.expected,
                                      ref::kPrecipitation.theoryMean, 3.0 * tm.seExpected + 0.05,
                                      ref::kPrecipitation.theoryMean));
            rep.rows.push_back(within("precipitation theory CV", tm.cv, ref::kPrecipitation.theoryCv,
                                      3.0 * tm.seCv + 0.005, ref::kPrecipitation.theoryCv));
            simRows("precipitation", ref::kPrecipitation,
                    simulateNullCounts(n, plane, params, reps, master.child(3), opts.workers));

            const Region band = Region::latLonBand(-62.0, 72.0, true);
            const auto mb = estimateMoments(band, params, opts.momentPairs, master.child(4),
                                            {100, opts.workers});
            const auto tb = triadCountMoments(n, eps, mb);
            rep.rows.push_back(info("precipitation sphere band theory E[N]", tb.expected,
                                    ref::kPrecipitation.theoryMean));
            rep.rows.push_back(info("precipitation sphere band theory CV", tb.cv,
                                    ref::kPrecipitation.theoryCv));
        }
    });
}

ReproReport reproducePowerTable(const ReproOptions& opts) {
    return timed("t3", opts, [&](ReproReport& rep) {
        const Rng master = Rng(opts.seed).child(3);
        const Mixture mix;
        const Metric metric = mix.region.naturalMetric();
        const std::size_t reps = scaled(1000, opts.scale, 20);
        rep.notes.push_back(std::to_string(reps) + " replicates per cell; cluster radius " +
                            fmt("%g", mix.radius));
        const auto pp = countsOf(reps, opts.workers, mix.params, metric,
                                 [&](Rng& r) { return simulatePoisson(mix.nTot, mix.region, r).points; },
                                 master.child(0));
        for (std::size_t k = 0; k < ref::kPowerRows.size(); ++k) {
            const auto& row = ref::kPowerRows[k];
            const double w = row.w;
            const auto alt = countsOf(reps, opts.workers, mix.params, metric,
                                      [&](Rng& r) { return mix.filaments(w, r).points; },
                                      master.child(10 + k));
            const auto pcp = countsOf(reps, opts.workers, mix.params, metric,
                                      [&](Rng& r) { return mix.clusters(w, r).points; },
                                      master.child(20 + k));
            const std::string tag = "w=" + fmt("%.2f", w);
            const double ppTriads = rejectionRate(pp[0], alt[0]);
            if (w == 0.0) {
                rep.rows.push_back(within(tag + " PP triads", ppTriads, 0.05, 0.04, row.ppTriads));
            } else {
                rep.rows.push_back(within(tag + " PP triads", ppTriads, row.ppTriads, 0.07, row.ppTriads));
            }
            rep.rows.push_back(info(tag + " PP tetrads", rejectionRate(pp[1], alt[1]), row.ppTetrads));
            CheckRow pcpRow = info(tag + " PCP triads", rejectionRate(pcp[0], alt[0]), row.pcpTriads);
            pcpRow.checked = true;
            pcpRow.hi = 0.10;
            rep.rows.push_back(pcpRow);
            rep.rows.push_back(info(tag + " PCP tetrads", rejectionRate(pcp[1], alt[1]), row.pcpTetrads));
        }
    });
}

ReproReport reproduceRecovery(const ReproOptions& opts) {
    return timed("t5t6", opts, [&](ReproReport& rep) {
        const Rng master = Rng(opts.seed).child(5);
        const Mixture mix;
        const Metric metric = mix.region.naturalMetric();
        const std::size_t reps = scaled(500, opts.scale, 10);
        rep.notes.push_back(std::to_string(reps) + " replicates per level");
        const auto levels = levelsOr(opts, {0.1, 0.3, 0.5, 0.7, 0.9});
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const double w = levels[k];
            const auto* published = std::find_if(ref::kRecoveryRows.begin(), ref::kRecoveryRows.end(),
                                                 [&](const auto& r) { return std::abs(r.w - w) < 1e-9; });
            std::vector<std::array<double, 6>> m(reps);
            parallelFor(reps, opts.workers, [&](std::size_t i) {
                Rng r = master.child(k).child(i);
                const Realisation re = mix.filaments(w, r);
                const auto as = evaluate(re.trueFilaments, arcSearch(re.points, mix.params, metric),
                                         re.points.size());
                const auto ms = evaluate(re.trueFilaments, mstFilaments(re.points, mix.params, metric),
                                         re.points.size());
                m[i] = {as.captureRate.value_or(0), ms.captureRate.value_or(0), as.sensitivity.value_or(0),
                        ms.sensitivity.value_or(0), as.specificity.value_or(1), ms.specificity.value_or(1)};
            });
            auto col = [&](std::size_t j) {
                std::vector<double> v;
                for (const auto& row : m) {
                    v.push_back(row[j]);
                }
                return median(v);
            };
            const std::string tag = "w=" + fmt("%.1f", w);
            const bool known = published != ref::kRecoveryRows.end();
            auto add = [&](const std::string& what, double value, double target, double tol) {
                if (known) {
                    rep.rows.push_back(within(tag + " " + what, value, target, tol, target));
                } else {
                    rep.rows.push_back(info(tag + " " + what, value));
                }
            };
            add("capture AS", col(0), known ? published->captureAs : 0, 0.05);
            add("capture MST", col(1), known ? published->captureMst : 0, 0.05);
            add("sensitivity AS", col(2), known ? published->sensitivityAs : 0, 0.03);
            add("sensitivity MST", col(3), known ? published->sensitivityMst : 0, 0.05);
            rep.rows.push_back(info(tag + " specificity AS", col(4), known ? published->specificityAs : std::nan("")));
            rep.rows.push_back(info(tag + " specificity MST", col(5), known ? published->specificityMst : std::nan("")));
            const auto wins = std::count_if(m.begin(), m.end(), [](const auto& row) { return row[2] > row[3]; });
            CheckRow dom = info(tag + " AS sensitivity above MST", static_cast<double>(wins) / reps);
            dom.checked = true;
            dom.lo = 0.95;
            rep.rows.push_back(dom);
        }
    });
}

ReproReport reproduceLinearityPower(const ReproOptions& opts) {
    return timed("fig4", opts, [&](ReproReport& rep) {
        const Rng master = Rng(opts.seed).child(4);
        const Mixture mix;
        const std::size_t reps = scaled(100, opts.scale, 10);
        const std::size_t nulls = scaled(100, opts.scale, 99);
        const auto nullMedians =
            linearityNullMedians(mix.nTot, mix.region, mix.params, nulls, master.child(0), opts.workers);
        rep.notes.push_back(std::to_string(reps) + " replicates per level, " +
                            std::to_string(nullMedians.size()) + " null medians");
        const auto levels = levelsOr(opts, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const double w = levels[k];
            std::vector<char> pfp(reps), pcp(reps);
            parallelFor(reps, opts.workers, [&](std::size_t i) {
                Rng a = master.child(10 + k).child(i);
                Rng b = master.child(100 + k).child(i);
                const auto f = mix.filaments(w, a);
                const auto c = mix.clusters(w, b);
                pfp[i] = linearityTest(f.points, mix.region, mix.params, nullMedians, 0.05).decision;
                pcp[i] = linearityTest(c.points, mix.region, mix.params, nullMedians, 0.05).decision;
            });
            const double powF = std::accumulate(pfp.begin(), pfp.end(), 0.0) / reps;
            const double powC = std::accumulate(pcp.begin(), pcp.end(), 0.0) / reps;
            const std::string tag = "w=" + fmt("%.1f", w);
            if (w == 0.0) {
                rep.rows.push_back(within(tag + " PFP", powF, 0.05, 0.04, std::nan("")));
            } else {
                CheckRow r = info(tag + " PFP", powF);
                if (w >= 0.3 - 1e-9) {
                    r.checked = true;
                    r.lo = 0.8;
                }
                rep.rows.push_back(r);
            }
            CheckRow c = info(tag + " PCP", powC);
            c.checked = true;
            c.hi = 0.15;
            rep.rows.push_back(c);
        }
    });
}

ReproReport reproduceAbcRecovery(const ReproOptions& opts) {
    return timed("t4", opts, [&](ReproReport& rep) {
        const Rng master = Rng(opts.seed).child(6);
        const Region region = Region::rect(150.0, 360.0);
        const std::size_t datasets = scaled(100, opts.scale, 1);
        const std::size_t nScen = std::min(opts.abcScenarios, ref::kAbcScenarios.size());
        rep.notes.push_back(std::to_string(datasets) + " datasets per scenario, " +
                            std::to_string(opts.abcIterations) + " iterations each");
        ABCConfig cfg;
        cfg.iterations = opts.abcIterations;
        cfg.workers = opts.workers;
        for (std::size_t s = 0; s < nScen; ++s) {
            const auto& sc = ref::kAbcScenarios[s];
            std::vector<double> l0, mu, l1;
            double minRate = 1.0;
            for (std::size_t d = 0; d < datasets; ++d) {
                Rng gen = master.child(s).child(2 * d);
                PFPParams p;
                p.lambda0 = sc.lambda0;
                p.lambda1 = sc.lambda1;
                p.size = SizeLaw::threePlusPoisson(sc.mu);
                p.length = cfg.length;
                p.turn = cfg.turn;
                const auto obs = simulatePFP(p, region, gen);
                const auto post = rejectionABC(obs.points, Priors{}, cfg, region,
                                               master.child(s).child(2 * d + 1));
                minRate = std::min(minRate, post.acceptanceRate);
                if (post.summary) {
                    l0.push_back(post.summary->lambda0.mean);
                    mu.push_back(post.summary->mu.mean);
                    l1.push_back(post.summary->lambda1.mean);
                }
            }
            const std::string tag = "theta=(" + fmt("%g", sc.lambda0) + "," + fmt("%g", sc.lambda1) + "," +
                                    fmt("%g", sc.mu) + ")";
            const double root = std::sqrt(static_cast<double>(datasets));
            auto add = [&](const std::string& what, const std::vector<double>& v, double truth,
                           double sd, double published) {
                if (v.empty()) {
                    rep.rows.push_back(within(tag + " mean " + what, std::nan(""), truth, 0.0, published));
                    return;
                }
                const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
                rep.rows.push_back(within(tag + " mean " + what, mean, truth, 2.0 * sd / root, published));
                rep.rows.push_back(info(tag + " SD " + what, v.size() > 1 ? describe(v).sd : 0.0, sd));
            };
            add("lambda0", l0, sc.lambda0, sc.sdLambda0, sc.meanLambda0);
            add("mu", mu, sc.mu, sc.sdMu, sc.meanMu);
            add("lambda1", l1, sc.lambda1, sc.sdLambda1, sc.meanLambda1);
            CheckRow rate = info(tag + " min acceptance rate", minRate);
            rate.checked = true;
            rate.lo = 1e-300;
            rep.rows.push_back(rate);
        }
    });
}

std::vector<std::string> reproductionTables() { return {"t1", "t1-sim", "t2-sim", "t3", "t5t6", "fig4", "t4"}; }

ReproReport reproduce(const std::string& table, const ReproOptions& opts) {
    if (table == "t1") return reproduceMomentTheory(opts);
    if (table == "t1-sim") return reproduceMomentSimulation(opts);
    if (table == "t2-sim") return reproduceApplicationNull(opts);
    if (table == "t3") return reproducePowerTable(opts);
    if (table == "t5t6") return reproduceRecovery(opts);
    if (table == "fig4") return reproduceLinearityPower(opts);
    if (table == "t4") return reproduceAbcRecovery(opts);
    throw InvalidInput("unknown reproduction table '" + table + "'");
}

} // namespace filamenta
