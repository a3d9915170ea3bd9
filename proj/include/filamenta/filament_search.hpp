#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "filamenta/geometry.hpp"
#include "filamenta/rng.hpp"
#include "filamenta/triad_stats.hpp"

namespace filamenta {

/// An ordered chain of points. edgeLengths[k] joins points k and k+1;
/// interiorAngles[k] is the angle at point k+1.
struct Filament {
    std::vector<std::size_t> pointIndices;
    std::vector<double> edgeLengths;
    std::vector<double> interiorAngles;

    std::size_t size() const { return pointIndices.size(); }
};

struct FilamentSet {
    std::vector<Filament> filaments;
    bool exclusive = false;
    std::vector<std::string> warnings;

    /// Point indices covered by any filament, ascending.
    std::vector<std::size_t> coveredPoints() const;
};

/// Fills edge lengths and interior angles for a chain of indices.
Filament makeFilament(std::span<const Point> points, const Metric& metric,
                      std::vector<std::size_t> indices);

/// True when the chain has at least 3 distinct indices, every edge in
/// (0, d0] and every interior angle >= pi - epsilon.
bool isValidFilament(const Filament& f, const TriadParams& params);

/// Cleans candidate chains: drops chains shorter than 3, drops chains that
/// are a contiguous run (either direction) of another, then joins chains
/// sharing an end point when the junction is itself blunt, repeating until
/// stable. Output order is fixed by point coordinates, so it does not depend
/// on the labelling of the input.
FilamentSet rationalise(std::span<const Point> points, const TriadParams& params,
                        const Metric& metric, std::vector<std::vector<std::size_t>> chains);

/// Gives every point to at most one filament. Filaments are ranked by point
/// count (desc), linearity (asc), then input order; each keeps the maximal
/// runs of points not claimed by a higher-ranked filament that still have at
/// least 3 points.
FilamentSet makeExclusive(std::span<const Point> points, const Metric& metric,
                          const FilamentSet& set);

/// Arc search. Every point in turn seeds an edge to its nearest neighbour
/// within d0; the chain grows forward and then backward by taking, among
/// points within d0 of the current end whose turn keeps the angle at the end
/// >= pi - epsilon, the one closest to the projected line. Ties go to the
/// lowest index.
FilamentSet arcSearch(std::span<const Point> points, const TriadParams& params,
                      const Metric& metric, bool exclusive = false, unsigned workers = 1);

struct TreeEdge {
    std::size_t a;
    std::size_t b;
    double weight;
};

/// Minimum spanning tree under the metric (Prim, O(n^2)).
std::vector<TreeEdge> minimumSpanningTree(std::span<const Point> points, const Metric& metric);

/// Filaments along MST branches: the tree is cut into paths at vertices of
/// degree >= 3, each path is scanned for maximal runs whose edges are <= d0
/// and angles >= pi - epsilon, and the runs are rationalised. Runs of two
/// points take part in joining at junctions and are dropped only afterwards.
FilamentSet mstFilaments(std::span<const Point> points, const TriadParams& params,
                         const Metric& metric);

/// Sum of edge lengths over end-to-end distance; +infinity when the ends
/// coincide.
double linearity(const Filament& f, std::span<const Point> points, const Metric& metric);

struct LinearityReport {
    std::vector<double> perFilament;
    double median = 0.0;
    double criticalValue = 0.0;
    double pValue = 1.0;
    bool decision = false;
    bool inconclusive = false;
    std::vector<double> nullMedians;
    std::vector<std::string> warnings;
};

/// Median linearity of arc-search filaments in nSim Poisson patterns of n
/// points. Replicate i uses rng.child(i); patterns without filaments are
/// omitted.
std::vector<double> linearityNullMedians(std::size_t n, const Region& region,
                                         const TriadParams& params, std::size_t nSim,
                                         const Rng& rng, unsigned workers = 1);

/// One-sided test in the upper tail: rejects when the observed median
/// exceeds all but floor(sigLevel * (N + 1)) - 1 of the N null medians,
/// i.e. when (r + 1) / (N + 1) <= sigLevel with r null medians >= observed.
LinearityReport linearityTest(std::span<const Point> points, const Region& region,
                              const TriadParams& params, std::vector<double> nullMedians,
                              double sigLevel);

/// Convenience form that simulates the null first (nullSims >= 99).
LinearityReport linearityTest(std::span<const Point> points, const Region& region,
                              const TriadParams& params, std::size_t nullSims, double sigLevel,
                              const Rng& rng, unsigned workers = 1);

struct EvalMetrics {
    std::optional<double> captureRate;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

/// Capture rate: share of true filaments with more than half their points in
/// one estimated filament. Sensitivity: share of true-filament points on any
/// estimated filament. Specificity: share of other points on none.
EvalMetrics evaluate(const std::vector<std::vector<std::size_t>>& truth,
                     const FilamentSet& estimate, std::size_t nPoints);

/// filamentId,order,pointIndex rows.
void writeFilamentsCsv(std::ostream& out, const FilamentSet& set);

} // namespace filamenta
