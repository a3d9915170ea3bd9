#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "filamenta/geometry.hpp"
#include "filamenta/rng.hpp"

namespace filamenta {

/// Angle threshold and adjacent-edge cap defining an (epsilon, d0)-blunt triad.
struct TriadParams {
    double epsilon = degToRad(15.0); ///< radians, 0 < epsilon < pi/3
    double d0 = std::numeric_limits<double>::infinity();

    /// Validating constructor; d0 may be +infinity (no cap).
    static TriadParams make(double epsilon, double d0);
    void validate() const;
};

double choose(std::size_t n, std::size_t k);

// ---------------------------------------------------------------------------
// Moment theory

/// Chord PQ of length t with boundary secants u (beyond P) and v (beyond Q).
struct SecantGeometry {
    double t = 0.0;
    double u = 0.0;
    double v = 0.0;
    double d0 = std::numeric_limits<double>::infinity();
};

/// H(P, Q): first-order (in epsilon) area, divided by epsilon, of the set of
/// third points completing an (epsilon, d0)-blunt triad with P and Q.
///   t <  d0          : min(u,d0)^2 + t^2/3 + min(v,d0)^2   (two wedges and the lens)
///   d0 <= t <= 2 d0  : 2 d0^2 - t^2/3 - 4 d0^3 / (3 t)      (trimmed lens)
///   t >  2 d0        : 0
double wedgeLensArea(const SecantGeometry& g);

/// Monte Carlo estimates of the region functionals
///   alpha = E_P E_Q H / |K|,  beta = E_P[(E_Q H)^2] / |K|^2,  gamma = E_P E_Q H^2 / |K|^2.
struct MomentEstimates {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::size_t nPairs = 0;
    std::size_t outerDraws = 0;
    std::size_t innerDraws = 0;
    double seAlpha = 0.0;
    double seBeta = 0.0;
    double seGamma = 0.0;
    /// Sampling covariance of (alpha, beta, gamma) estimates.
    std::array<std::array<double, 3>, 3> covariance{};
};

struct MomentOptions {
    /// Q draws per outer P draw. beta uses the unbiased pairwise product
    /// within each batch, so it needs at least 2.
    std::size_t innerDraws = 100;
    unsigned workers = 1;
};

/// Draws nPairs / innerDraws outer points P, each with innerDraws points Q,
/// uniformly over the region; t, u, v are measured with the region's natural
/// metric. Throws UnsupportedRegion when d0 is infinite and the region has
/// unbounded secants (latitude bands), InvalidInput when nPairs < 1000.
MomentEstimates estimateMoments(const Region& region, const TriadParams& params, std::size_t nPairs,
                                const Rng& rng, const MomentOptions& options = {});

/// C(n,3) * alpha * epsilon; 0 for n < 3.
double expectedTriads(std::size_t n, double epsilon, double alpha);

struct TriadCountMoments {
    double expected = 0.0;
    double variance = 0.0;
    double cv = 0.0;
    double seExpected = 0.0;
    double seCv = 0.0;
    bool clamped = false;
    std::vector<std::string> warnings;
};

/// Var[N] = E[N](1 - alpha eps) + 3 C(n,3) C(n-3,2) (beta - alpha^2) eps^2
///        + 3 C(n,3) C(n-3,1) (gamma - alpha^2) eps^2,
/// clamped to E[N](1 - alpha eps) if sampling noise drives it below zero.
/// Standard errors for E[N] and the CV use the delta method on the moment
/// covariance.
TriadCountMoments triadCountMoments(std::size_t n, double epsilon, const MomentEstimates& m);

double varianceTriads(std::size_t n, double epsilon, const MomentEstimates& m);

// ---------------------------------------------------------------------------
// Census

struct Triad {
    /// Sorted point indices.
    std::array<std::size_t, 3> points;
    std::size_t apex;

    friend bool operator==(const Triad&, const Triad&) = default;
    friend auto operator<=>(const Triad&, const Triad&) = default;
};

/// Chain x - a - b - y stored as {x, a, b, y} with a < b.
using Tetrad = std::array<std::size_t, 4>;

struct TriadCensus {
    std::vector<Triad> triads; ///< sorted, unique
    std::vector<Tetrad> tetrads;
    std::size_t nPoints = 0;
};

/// All triples whose angle at some vertex exceeds pi - epsilon with both
/// adjacent edges shorter than d0. Points are bucketed on a grid of cell d0,
/// so each apex only pairs neighbours within d0. Zero-length edges never
/// count; duplicate points are otherwise treated as distinct.
TriadCensus countBluntTriads(std::span<const Point> points, const TriadParams& params,
                             const Metric& metric, unsigned workers = 1);

/// Aligned tetrads chained from the census: x-a-b-y is aligned when x-a-b
/// (apex a) and a-b-y (apex b) are both blunt triads. Each unordered chain
/// is reported once. Also stores the list in census.tetrads.
std::size_t countAlignedTetrads(TriadCensus& census);

// ---------------------------------------------------------------------------
// Null comparison

struct NullTestReport {
    std::size_t observed = 0;
    double expected = 0.0;
    double variance = 0.0;
    double cv = 0.0;
    double z = 0.0;
    /// Theory mode: one-sided normal tail. Simulation mode: (r + 1) / (nSim + 1).
    double pValue = 1.0;
    std::string mode;
    std::size_t nSim = 0;
    std::size_t exceedances = 0;
    std::vector<double> simulatedCounts;
};

/// z = (observed - E[N]) / sqrt(Var[N]).
NullTestReport poissonNullTheory(std::size_t observed, const TriadCountMoments& moments);

/// Counts blunt triads in nSim homogeneous Poisson patterns of n points.
/// Replicate i uses rng.child(i).
NullTestReport poissonNullSimulation(std::size_t observed, std::size_t n, const Region& region,
                                     const TriadParams& params, std::size_t nSim, const Rng& rng,
                                     unsigned workers = 1);

/// Mean and CV of blunt-triad and tetrad counts in nSim Poisson patterns.
struct SimulatedCounts {
    std::vector<double> triads;
    std::vector<double> tetrads;
};

SimulatedCounts simulateNullCounts(std::size_t n, const Region& region, const TriadParams& params,
                                   std::size_t nSim, const Rng& rng, unsigned workers = 1);

} // namespace filamenta
