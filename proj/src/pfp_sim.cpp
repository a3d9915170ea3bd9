#include "filamenta/pfp_sim.hpp"

#include <cmath>
#include <optional>
#include <random>

#include "filamenta/error.hpp"

namespace filamenta {

namespace {

constexpr int kStepAttempts = 50;
constexpr int kRestartAttempts = 1000;

std::int64_t drawPoisson(double mean, Rng& rng) {
    if (!(mean > 0.0)) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

// Correlated random walk of `size` points from `start`; nullopt when the
// walk could not reach three points inside the region.
std::optional<PointSet> walk(Point start, int size, const LengthLaw& length, const TurnLaw& turn,
                             const Region& region, const Metric& metric, Rng& rng) {
    PointSet pts{start};
    double h = rng.uniform(0.0, 2.0 * kPi);
    for (int k = 1; k < size; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kStepAttempts; ++attempt) {
            double tryHeading;
            if (k == 1) {
                tryHeading = attempt == 0 ? h : rng.uniform(0.0, 2.0 * kPi);
            } else {
                tryHeading = h + turn.draw(rng);
            }
            const double len = length.draw(rng);
            const Step step = advance(metric, pts.back(), tryHeading, len);
            if (region.contains(step.position)) {
                pts.push_back(step.position);
                h = step.heading;
                placed = true;
                break;
            }
        }
        if (!placed) {
            if (pts.size() >= 3) {
                return pts;
            }
            return std::nullopt;
        }
    }
    return pts;
}

// A filament of the requested size, restarting from fresh parents when a
// walk is discarded.
std::optional<PointSet> filament(int size, const LengthLaw& length, const TurnLaw& turn,
                                 const Region& region, const Metric& metric, Rng& rng) {
    for (int attempt = 0; attempt < kRestartAttempts; ++attempt) {
        const Point parent = sampleUniform(region, rng);
        if (auto pts = walk(parent, size, length, turn, region, metric, rng)) {
            return pts;
        }
    }
    return std::nullopt;
}

void appendGroup(Realisation& r, const PointSet& pts) {
    const int id = static_cast<int>(r.trueFilaments.size());
    std::vector<std::size_t> chain;
    r.parents.push_back(r.points.size());
    for (const auto& p : pts) {
        chain.push_back(r.points.size());
        r.points.push_back(p);
        r.labels.push_back(id);
    }
    r.trueFilaments.push_back(std::move(chain));
}

void appendNoise(Realisation& r, std::size_t count, const Region& region, Rng& rng) {
    for (std::size_t i = 0; i < count; ++i) {
        r.points.push_back(sampleUniform(region, rng));
        r.labels.push_back(-1);
    }
}

void validateLaws(const LengthLaw& length, const TurnLaw& turn) {
    if (!(length.lo > 0.0) || !(length.hi >= length.lo) || !std::isfinite(length.hi)) {
        throw InvalidInput("edge-length law needs 0 < lo <= hi");
    }
    if (!(turn.scale >= 0.0) || !std::isfinite(turn.scale)) {
        throw InvalidInput("turn-law scale must be finite and non-negative");
    }
}

std::size_t targetCount(std::size_t nTot, double w) {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw InvalidInput("filament fraction w must lie in [0, 1]");
    }
    return static_cast<std::size_t>(std::llround(w * static_cast<double>(nTot)));
}

} // namespace

int SizeLaw::draw(Rng& rng) const {
    switch (kind) {
    case Kind::ThreePlusPoisson:
        return 3 + static_cast<int>(drawPoisson(mu, rng));
    case Kind::UniformInt:
        return static_cast<int>(rng.uniformInt(lo, hi));
    case Kind::Fixed:
        return lo;
    }
    return lo;
}

double SizeLaw::mean() const {
    switch (kind) {
    case Kind::ThreePlusPoisson:
        return 3.0 + mu;
    case Kind::UniformInt:
        return 0.5 * (lo + hi);
    case Kind::Fixed:
        return lo;
    }
    return lo;
}

int SizeLaw::minimum() const { return kind == Kind::ThreePlusPoisson ? 3 : lo; }

int SizeLaw::maximum() const {
    if (kind != Kind::ThreePlusPoisson) {
        return hi;
    }
    // Upper 1e-12 quantile of Poisson(mu).
    double pmf = std::exp(-mu);
    double cdf = pmf;
    int k = 0;
    while (1.0 - cdf > 1e-12 && k < 10000) {
        ++k;
        pmf *= mu / k;
        cdf += pmf;
    }
    return 3 + k;
}

double TurnLaw::draw(Rng& rng) const {
    switch (kind) {
    case Kind::Uniform:
        return rng.uniform(-scale, scale);
    case Kind::WrappedNormal: {
        std::normal_distribution<double> dist(0.0, scale);
        return wrapAngle(dist(rng));
    }
    case Kind::Zero:
        return 0.0;
    }
    return 0.0;
}

void PFPParams::validate() const {
    if (!(lambda0 >= 0.0) || !(lambda1 >= 0.0) || !std::isfinite(lambda0) || !std::isfinite(lambda1)) {
        throw InvalidInput("lambda0 and lambda1 must be finite and non-negative");
    }
    if (size.minimum() < 3) {
        throw InvalidInput("filament sizes must be at least 3");
    }
    if (size.kind == SizeLaw::Kind::ThreePlusPoisson && !(size.mu >= 0.0)) {
        throw InvalidInput("mu must be non-negative");
    }
    if (size.kind == SizeLaw::Kind::UniformInt && size.hi < size.lo) {
        throw InvalidInput("size law needs lo <= hi");
    }
    validateLaws(length, turn);
}

std::size_t Realisation::filamentPointCount() const {
    std::size_t n = 0;
    for (int l : labels) {
        if (l >= 0) {
            ++n;
        }
    }
    return n;
}

Realisation simulatePFP(const PFPParams& params, const Region& region, Rng& rng) {
    params.validate();
    const Metric metric = region.naturalMetric();
    Realisation r;
    const auto nFilaments = drawPoisson(params.lambda0, rng);
    for (std::int64_t f = 0; f < nFilaments; ++f) {
        const int size = params.size.draw(rng);
        if (auto pts = filament(size, params.length, params.turn, region, metric, rng)) {
            appendGroup(r, *pts);
        } else {
            r.warnings.push_back("could not place a filament inside the region; skipped");
        }
    }
    const std::size_t noise = params.noiseMode == PFPParams::NoiseMode::PoissonCount
                                  ? static_cast<std::size_t>(drawPoisson(params.lambda1, rng))
                                  : params.fixedNoise;
    appendNoise(r, noise, region, rng);
    return r;
}

Realisation simulateFixedTotal(std::size_t nTot, double w, const SizeLaw& size,
                               const LengthLaw& length, const TurnLaw& turn, const Region& region,
                               Rng& rng) {
    validateLaws(length, turn);
    if (size.minimum() < 3) {
        throw InvalidInput("filament sizes must be at least 3");
    }
    const std::size_t target = targetCount(nTot, w);
    const Metric metric = region.naturalMetric();
    Realisation r;
    if (w > 0.0 && target < 3) {
        r.warnings.push_back("w * nTot is below 3; no filaments generated");
    } else {
        std::size_t count = 0;
        while (count < target) {
            const int want = size.draw(rng);
            auto pts = filament(want, length, turn, region, metric, rng);
            if (!pts) {
                r.warnings.push_back("could not place a filament inside the region; stopping");
                break;
            }
            if (count + pts->size() > target) {
                const std::size_t keep = target - count;
                if (keep < 3) {
                    break;
                }
                pts->resize(keep);
            }
            count += pts->size();
            appendGroup(r, *pts);
        }
    }
    appendNoise(r, nTot - r.points.size(), region, rng);
    return r;
}

Realisation simulatePoisson(std::size_t n, const Region& region, Rng& rng) {
    Realisation r;
    appendNoise(r, n, region, rng);
    return r;
}

Realisation simulatePoissonIntensity(double meanCount, const Region& region, Rng& rng) {
    if (!(meanCount >= 0.0) || !std::isfinite(meanCount)) {
        throw InvalidInput("mean count must be finite and non-negative");
    }
    return simulatePoisson(static_cast<std::size_t>(drawPoisson(meanCount, rng)), region, rng);
}

double defaultDispersionRadius(const LengthLaw& length) {
    return length.hi / 2.0;
}

Realisation simulatePCP(std::size_t nTot, double w, const SizeLaw& clusterSize,
                        double dispersionRadius, const Region& region, Rng& rng) {
    if (!(dispersionRadius > 0.0) || !std::isfinite(dispersionRadius)) {
        throw InvalidInput("dispersion radius must be positive and finite");
    }
    if (clusterSize.minimum() < 1) {
        throw InvalidInput("cluster sizes must be at least 1");
    }
    const std::size_t target = targetCount(nTot, w);
    const bool spherical = region.spherical();
    const std::optional<Region> cap =
        spherical ? std::optional<Region>(Region::cap({0.0, 90.0}, dispersionRadius,
                                                      region.sphereRadius()))
                  : std::nullopt;
    const Metric metric = region.naturalMetric();
    Realisation r;
    std::size_t count = 0;
    while (count < target) {
        std::size_t k = static_cast<std::size_t>(clusterSize.draw(rng));
        k = std::min(k, target - count);
        const Point parent = sampleUniform(region, rng);
        PointSet pts;
        while (pts.size() < k) {
            bool placed = false;
            for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
                Point p;
                if (spherical) {
                    // Offset drawn on a polar cap, then carried to the parent.
                    const Point local = sampleUniform(*cap, rng);
                    const double dist = distance(metric, {0.0, 90.0}, local);
                    const double h = rng.uniform(0.0, 2.0 * kPi);
                    p = advance(metric, parent, h, dist).position;
                } else {
                    const double rad = dispersionRadius * std::sqrt(rng.uniform());
                    const double theta = rng.uniform(0.0, 2.0 * kPi);
                    p = {parent.x + rad * std::cos(theta), parent.y + rad * std::sin(theta)};
                }
                if (region.contains(p)) {
                    pts.push_back(p);
                    placed = true;
                }
            }
            if (!placed) {
                throw DomainError("cannot place cluster offspring inside the region");
            }
        }
        count += pts.size();
        appendGroup(r, pts);
    }
    appendNoise(r, nTot - r.points.size(), region, rng);
    return r;
}

} // namespace filamenta
