#include "filamenta/abc_infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "filamenta/error.hpp"
#include "filamenta/parallel.hpp"

namespace filamenta {

namespace {

constexpr std::uint64_t kObservedStream = ~std::uint64_t{0};
constexpr std::size_t kGridPoints = 512;

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ParamSummary summariseParam(std::vector<double> v, double lo, double hi) {
    ParamSummary s;
    const double n = static_cast<double>(v.size());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) {
        ss += (x - s.mean) * (x - s.mean);
    }
    s.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(v.begin(), v.end());
    s.median = quantile(v, 0.5);

    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    double spread = s.sd;
    if (iqr > 0.0) {
        spread = std::min(spread, iqr / 1.34);
    }
    double h = 0.9 * spread * std::pow(n, -0.2);
    if (!(h > 0.0)) {
        h = (hi - lo) / 100.0;
    }
    s.grid.resize(kGridPoints);
    s.density.assign(kGridPoints, 0.0);
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * kPi));
    for (std::size_t g = 0; g < kGridPoints; ++g) {
        const double x = lo + (hi - lo) * static_cast<double>(g) / (kGridPoints - 1);
        s.grid[g] = x;
        double sum = 0.0;
        for (double xi : v) {
            const double z = (x - xi) / h;
            sum += std::exp(-0.5 * z * z);
        }
        s.density[g] = norm * sum;
    }
    return s;
}

} // namespace

double zipLogLik(std::span<const int> counts, double pi0, double mu) {
    const double e = std::exp(-mu);
    double ll = 0.0;
    for (int y : counts) {
        if (y == 0) {
            ll += std::log(pi0 + (1.0 - pi0) * e);
        } else {
            if (mu <= 0.0 || pi0 >= 1.0) {
                return -std::numeric_limits<double>::infinity();
            }
            ll += std::log1p(-pi0) + y * std::log(mu) - mu - std::lgamma(y + 1.0);
        }
    }
    return ll;
}

ZipFit fitZip(std::span<const int> counts, double sigLevel) {
    ZipFit fit;
    if (counts.empty()) {
        return fit;
    }
    const double n = static_cast<double>(counts.size());
    double sum = 0.0;
    std::size_t zeros = 0;
    for (int y : counts) {
        if (y < 0) {
            throw InvalidInput("ZIP counts must be non-negative");
        }
        sum += y;
        zeros += y == 0;
    }
    const double mean = sum / n;
    fit.mu = mean;
    fit.logLikPoisson = zipLogLik(counts, 0.0, mean);
    fit.logLik = fit.logLikPoisson;
    if (zeros == 0 || zeros == counts.size()) {
        return fit;
    }
    const double p0 = static_cast<double>(zeros) / n;
    const double target = mean / (1.0 - p0);
    double lo = 1e-12;
    double hi = target + 10.0;
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (mid / -std::expm1(-mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double mu = 0.5 * (lo + hi);
    const double e = std::exp(-mu);
    const double pi0 = (p0 - e) / (1.0 - e);
    if (pi0 > 0.0 && pi0 < 1.0) {
        const double ll = zipLogLik(counts, pi0, mu);
        if (ll > fit.logLik) {
            fit.pi0 = pi0;
            fit.mu = mu;
            fit.logLik = ll;
        }
    }
    fit.lrStat = std::max(0.0, 2.0 * (fit.logLik - fit.logLikPoisson));
    fit.pValue = fit.lrStat > 0.0 ? 0.5 * std::erfc(std::sqrt(fit.lrStat / 2.0)) : 1.0;
    fit.significant = fit.pValue < sigLevel;
    return fit;
}

ZipPruneResult zipPrune(const FilamentSet& set, Rng& rng, double sigLevel) {
    if (!set.exclusive) {
        throw InvalidInput("ZIP pruning needs an exclusive filament set");
    }
    ZipPruneResult out;
    out.set = set;
    auto& fs = out.set.filaments;
    while (true) {
        std::vector<int> counts;
        counts.reserve(fs.size());
        for (const auto& f : fs) {
            counts.push_back(static_cast<int>(f.size()) - 3);
        }
        out.finalFit = fitZip(counts, sigLevel);
        if (!out.finalFit.significant) {
            break;
        }
        std::vector<std::size_t> threes;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            if (fs[i].size() == 3) {
                threes.push_back(i);
            }
        }
        if (threes.empty()) {
            out.warnings.push_back("significant zero inflation but no 3-point filaments to delete");
            break;
        }
        const auto pick = threes[static_cast<std::size_t>(
            rng.uniformInt(0, static_cast<std::int64_t>(threes.size()) - 1))];
        fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(pick));
        ++out.deletions;
    }
    return out;
}

void Priors::validate() const {
    auto ok = [](double lo, double hi) { return std::isfinite(lo) && std::isfinite(hi) && lo < hi; };
    if (!ok(lambda0Lo, lambda0Hi) || !ok(lambda1Lo, lambda1Hi) || !ok(logMuLo, logMuHi)) {
        throw InvalidInput("prior bounds must be finite with lo < hi");
    }
    if (lambda0Lo < 0.0 || lambda1Lo < 0.0) {
        throw InvalidInput("lambda priors must be non-negative");
    }
}

Theta Priors::draw(Rng& rng) const {
    Theta t;
    t.lambda0 = rng.uniform(lambda0Lo, lambda0Hi);
    t.lambda1 = rng.uniform(lambda1Lo, lambda1Hi);
    t.mu = std::exp(rng.uniform(logMuLo, logMuHi));
    return t;
}

bool Priors::contains(const Theta& t) const {
    const double lm = std::log(t.mu);
    return t.lambda0 >= lambda0Lo && t.lambda0 <= lambda0Hi && t.lambda1 >= lambda1Lo &&
           t.lambda1 <= lambda1Hi && lm >= logMuLo - 1e-12 && lm <= logMuHi + 1e-12;
}

void ABCConfig::validate() const {
    if (iterations < 1) {
        throw InvalidInput("ABC needs at least one iteration");
    }
    if (!(threshold > 0.0)) {
        throw InvalidInput("ABC threshold must be positive");
    }
    search.validate();
    if (!(length.lo > 0.0 && length.hi >= length.lo)) {
        throw InvalidInput("edge-length law needs 0 < lo <= hi");
    }
}

FeatureVector summarise(std::span<const Point> points, const Metric& metric,
                        const ABCConfig& cfg, Rng& rng) {
    const FilamentSet set = arcSearch(points, cfg.search, metric, /*exclusive=*/true);
    const ZipPruneResult pruned = zipPrune(set, rng, cfg.zipSigLevel);
    std::vector<char> taken(points.size(), 0);
    for (const auto& f : pruned.set.filaments) {
        for (std::size_t p : f.pointIndices) {
            taken[p] = 1;
        }
    }
    PointSet rest;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!taken[i]) {
            rest.push_back(points[i]);
        }
    }
    FeatureVector fv;
    fv.totalPoints = static_cast<double>(points.size());
    fv.nonFilamentPoints = static_cast<double>(rest.size());
    fv.nFilaments = static_cast<double>(pruned.set.filaments.size());
    fv.residualBluntTriads =
        static_cast<double>(countBluntTriads(rest, cfg.search, metric).triads.size());
    return fv;
}

DistanceResult abcDistance(const FeatureVector& sim, const FeatureVector& obs) {
    DistanceResult d;
    const auto s = sim.values();
    const auto o = obs.values();
    for (std::size_t i = 0; i < s.size(); ++i) {
        double denom = o[i];
        if (!(denom > 0.0)) {
            denom = 1.0;
            d.zeroFallback = true;
        }
        d.value += std::abs(s[i] - o[i]) / denom;
    }
    return d;
}

PosteriorSample rejectionABC(std::span<const Point> observed, const Priors& priors,
                             const ABCConfig& cfg, const Region& region, const Rng& rng) {
    priors.validate();
    cfg.validate();
    const Metric metric = region.naturalMetric();
    PosteriorSample out;
    out.iterations = cfg.iterations;
    {
        Rng obsRng = rng.child(kObservedStream);
        out.observed = summarise(observed, metric, cfg, obsRng);
    }
    const bool vacuous = std::isinf(cfg.threshold);
    if (vacuous) {
        out.warnings.push_back("infinite threshold: every draw accepted, simulations skipped");
    }

    std::vector<Draw> draws(cfg.iterations);
    parallelFor(cfg.iterations, cfg.workers, [&](std::size_t i) {
        Rng r = rng.child(i);
        Draw& d = draws[i];
        d.iteration = i;
        d.theta = priors.draw(r);
        if (vacuous) {
            return;
        }
        PFPParams p;
        p.lambda0 = d.theta.lambda0;
        p.lambda1 = d.theta.lambda1;
        p.size = SizeLaw::threePlusPoisson(d.theta.mu);
        p.length = cfg.length;
        p.turn = cfg.turn;
        p.noiseMode = cfg.noiseMode;
        p.fixedNoise = static_cast<std::size_t>(std::llround(d.theta.lambda1));
        const Realisation sim = simulatePFP(p, region, r);
        const FeatureVector fv = summarise(sim.points, metric, cfg, r);
        const DistanceResult dist = abcDistance(fv, out.observed);
        d.distance = dist.value;
        d.zeroFallback = dist.zeroFallback;
    });

    bool flagged = false;
    out.distances.reserve(draws.size());
    for (const auto& d : draws) {
        out.distances.push_back(d.distance);
        flagged = flagged || d.zeroFallback;
        const bool accept = vacuous || d.distance < cfg.threshold ||
                            (cfg.acceptOnEqual && d.distance == cfg.threshold);
        if (accept) {
            out.accepted.push_back(d);
        }
    }
    if (flagged) {
        out.warnings.push_back("observed summary has a zero component; distance used denominator 1");
    }
    out.acceptanceRate =
        static_cast<double>(out.accepted.size()) / static_cast<double>(cfg.iterations);
    if (out.accepted.empty()) {
        out.warnings.push_back("no draws accepted; consider raising the threshold");
    } else {
        out.summary = posteriorSummary(out.accepted, priors);
    }
    return out;
}

PosteriorSummary posteriorSummary(const std::vector<Draw>& accepted, const Priors& priors) {
    if (accepted.empty()) {
        throw InvalidInput("posterior summary needs at least one draw");
    }
    std::vector<double> l0, l1, mu;
    for (const auto& d : accepted) {
        l0.push_back(d.theta.lambda0);
        l1.push_back(d.theta.lambda1);
        mu.push_back(d.theta.mu);
    }
    PosteriorSummary s;
    s.lambda0 = summariseParam(std::move(l0), priors.lambda0Lo, priors.lambda0Hi);
    s.lambda1 = summariseParam(std::move(l1), priors.lambda1Lo, priors.lambda1Hi);
    s.mu = summariseParam(std::move(mu), std::exp(priors.logMuLo), std::exp(priors.logMuHi));
    s.medianFilamentLength = 3.0 + s.mu.median;
    return s;
}

} // namespace filamenta
