#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "filamenta/filament_search.hpp"
#include "filamenta/pfp_sim.hpp"

namespace filamenta {

// ---------------------------------------------------------------------------
// Zero-inflated Poisson pruning

struct ZipFit {
    double pi0 = 0.0;
    double mu = 0.0;
    double logLik = 0.0;
    double logLikPoisson = 0.0; ///< at (0, sample mean)
    double lrStat = 0.0;
    double pValue = 1.0; ///< against 0.5 chi2_0 + 0.5 chi2_1
    bool significant = false;
};

double zipLogLik(std::span<const int> counts, double pi0, double mu);

/// Maximum-likelihood ZIP fit to non-negative counts. Given mu, pi0 matches
/// the zero frequency; mu solves mu / (1 - e^-mu) = mean / (1 - p0) by
/// bisection. Falls back to (0, mean) when that is at least as likely.
ZipFit fitZip(std::span<const int> counts, double sigLevel = 0.05);

struct ZipPruneResult {
    FilamentSet set;
    std::size_t deletions = 0;
    ZipFit finalFit;
    std::vector<std::string> warnings;
};

/// While the fit to (size - 3) shows significant zero inflation, deletes one
/// uniformly chosen 3-point filament and refits.
ZipPruneResult zipPrune(const FilamentSet& set, Rng& rng, double sigLevel = 0.05);

// ---------------------------------------------------------------------------
// Summaries and distance

struct FeatureVector {
    double totalPoints = 0.0;
    double nonFilamentPoints = 0.0;
    double nFilaments = 0.0;
    double residualBluntTriads = 0.0;

    std::array<double, 4> values() const {
        return {totalPoints, nonFilamentPoints, nFilaments, residualBluntTriads};
    }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct Theta {
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double mu = 0.0;
};

struct Priors {
    double lambda0Lo = 10.0, lambda0Hi = 110.0;
    double lambda1Lo = 100.0, lambda1Hi = 700.0;
    double logMuLo = -0.69314718055994530942, logMuHi = 1.6094379124341003746; ///< log 0.5, log 5

    void validate() const;
    Theta draw(Rng& rng) const;
    bool contains(const Theta& t) const;
};

struct ABCConfig {
    std::size_t iterations = 5000;
    double threshold = 0.5;
    bool acceptOnEqual = true; ///< accept at distance == threshold
    TriadParams search = TriadParams::make(degToRad(15.0), 10.0);
    LengthLaw length{2.0, 10.0};
    TurnLaw turn = TurnLaw::uniform(degToRad(15.0));
    PFPParams::NoiseMode noiseMode = PFPParams::NoiseMode::PoissonCount;
    double zipSigLevel = 0.05;
    unsigned workers = 1;

    void validate() const;
};

/// Exclusive arc search, ZIP pruning, then total points, points off
/// filaments, filament count and blunt triads among the points off filaments.
FeatureVector summarise(std::span<const Point> points, const Metric& metric,
                        const ABCConfig& cfg, Rng& rng);

struct DistanceResult {
    double value = 0.0;
    bool zeroFallback = false; ///< some observed component was 0 and used denominator 1
};

/// Sum over components of |sim - obs| / obs.
DistanceResult abcDistance(const FeatureVector& sim, const FeatureVector& obs);

// ---------------------------------------------------------------------------
// Rejection sampler

struct Draw {
    std::size_t iteration = 0;
    Theta theta;
    double distance = 0.0;
    bool zeroFallback = false;
};

struct ParamSummary {
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
    std::vector<double> grid;
    std::vector<double> density;
};

struct PosteriorSummary {
    ParamSummary lambda0;
    ParamSummary lambda1;
    ParamSummary mu;
    double medianFilamentLength = 0.0; ///< 3 + median mu
};

struct PosteriorSample {
    std::vector<Draw> accepted;
    std::vector<double> distances; ///< every iteration, in order
    std::size_t iterations = 0;
    double acceptanceRate = 0.0;
    FeatureVector observed;
    std::optional<PosteriorSummary> summary;
    std::vector<std::string> warnings;
};

/// Iteration i draws theta from the priors, simulates on the region with the
/// configured nuisance laws and summarises, all from rng.child(i); the
/// observed summary uses its own stream. Accepted draws are those within the
/// threshold.
PosteriorSample rejectionABC(std::span<const Point> observed, const Priors& priors,
                             const ABCConfig& cfg, const Region& region, const Rng& rng);

/// Mean, median, SD and a Gaussian kernel density (Silverman bandwidth) on a
/// 512-point grid spanning each prior support. Throws on an empty sample.
PosteriorSummary posteriorSummary(const std::vector<Draw>& accepted, const Priors& priors);

} // namespace filamenta
