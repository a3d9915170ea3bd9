#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "filamenta/geometry.hpp"
#include "filamenta/rng.hpp"

namespace filamenta {

/// Law of the number of points in one filament (or cluster).
struct SizeLaw {
    enum class Kind { ThreePlusPoisson, UniformInt, Fixed };

    Kind kind = Kind::ThreePlusPoisson;
    double mu = 2.0; ///< ThreePlusPoisson: size = 3 + Poisson(mu)
    int lo = 3;      ///< UniformInt: size uniform on {lo, ..., hi}; Fixed: size = lo
    int hi = 8;

    static SizeLaw threePlusPoisson(double mu) { return {Kind::ThreePlusPoisson, mu, 3, 3}; }
    static SizeLaw uniformInt(int lo, int hi) { return {Kind::UniformInt, 0.0, lo, hi}; }
    static SizeLaw fixed(int size) { return {Kind::Fixed, 0.0, size, size}; }

    int draw(Rng& rng) const;
    double mean() const;
    int minimum() const;
    /// Largest size the law can produce (the 1e-12 upper quantile for Poisson).
    int maximum() const;
};

/// Edge-length law: Uniform(lo, hi) with lo > 0.
struct LengthLaw {
    double lo = 2.0;
    double hi = 10.0;

    double draw(Rng& rng) const { return rng.uniform(lo, hi); }
    double mean() const { return 0.5 * (lo + hi); }
};

/// Law of the change in direction between consecutive edges.
struct TurnLaw {
    enum class Kind { Uniform, WrappedNormal, Zero };

    Kind kind = Kind::Uniform;
    double scale = degToRad(15.0); ///< half-width (Uniform) or SD (WrappedNormal), radians

    static TurnLaw uniform(double halfWidth) { return {Kind::Uniform, halfWidth}; }
    static TurnLaw wrappedNormal(double sd) { return {Kind::WrappedNormal, sd}; }
    static TurnLaw zero() { return {Kind::Zero, 0.0}; }

    double draw(Rng& rng) const;
};

struct PFPParams {
    enum class NoiseMode { PoissonCount, FixedCount };

    double lambda0 = 60.0;  ///< mean number of filaments
    double lambda1 = 350.0; ///< mean number of noise points in the region
    SizeLaw size = SizeLaw::threePlusPoisson(2.0);
    LengthLaw length{};
    TurnLaw turn{};
    NoiseMode noiseMode = NoiseMode::PoissonCount;
    std::size_t fixedNoise = 0; ///< noise count when noiseMode == FixedCount

    void validate() const;
};

/// A generated pattern with its ground truth. Labels are a filament (or
/// cluster) id, or -1 for noise. Filament points come first, in walk order.
struct Realisation {
    PointSet points;
    std::vector<int> labels;
    std::vector<std::vector<std::size_t>> trueFilaments;
    std::vector<std::size_t> parents;
    std::vector<std::string> warnings;

    std::size_t filamentPointCount() const;
    std::size_t noiseCount() const { return points.size() - filamentPointCount(); }
};

/// Poisson filament process: Poisson(lambda0) parents uniform on the region,
/// each the start of a correlated random walk of size drawn from the size
/// law, plus uniform noise. Steps that would leave the region are redrawn up
/// to 50 times; then the walk is truncated if it already has 3 points, or
/// discarded and restarted from a new parent.
Realisation simulatePFP(const PFPParams& params, const Region& region, Rng& rng);

/// Fixed total of nTot points with a target fraction w in filaments.
/// Whole filaments are generated until round(w * nTot) filament points are
/// reached; the last one is trimmed to hit the target exactly, or dropped if
/// that would leave it with fewer than 3 points.
Realisation simulateFixedTotal(std::size_t nTot, double w, const SizeLaw& size,
                               const LengthLaw& length, const TurnLaw& turn, const Region& region,
                               Rng& rng);

/// Homogeneous Poisson pattern: exactly n points.
Realisation simulatePoisson(std::size_t n, const Region& region, Rng& rng);

/// Homogeneous Poisson pattern whose count is Poisson(meanCount); meanCount
/// is the expected number of points in the whole region.
Realisation simulatePoissonIntensity(double meanCount, const Region& region, Rng& rng);

/// Half the longest filament edge, so every pair in a cluster is within one
/// filament step of each other.
double defaultDispersionRadius(const LengthLaw& length);

/// Poisson cluster process with the fixed-total budget of simulateFixedTotal:
/// clusters are drawn from the same size law, each cluster's points iid
/// uniform in a disc (cap on the sphere) of dispersionRadius around a uniform
/// parent, conditioned on lying in the region. The last cluster is trimmed
/// to hit the target exactly.
Realisation simulatePCP(std::size_t nTot, double w, const SizeLaw& clusterSize,
                        double dispersionRadius, const Region& region, Rng& rng);

} // namespace filamenta
