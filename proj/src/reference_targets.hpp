#pragma once

// Published reference values the reproduction harness compares against.

#include <array>
#include <limits>

namespace filamenta::reference {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Blunt-triad count for n = 40 uniform points in an s x 1 rectangle. The
// angle threshold is given in arcminutes.
struct MomentCell {
    double arcminutes;
    double side;
    double d0;
    double theoryMean;
    double theoryCv;
    double simMean;
    double simCv;
};

inline constexpr std::size_t kMomentPoints = 40;

inline constexpr std::array<MomentCell, 12> kMomentCells{{
    {10, 1, kInf, 9.58, 0.33, 9.70, 0.34},
    {10, 1, 0.5, 5.12, 0.47, 5.26, 0.44},
    {10, 1, 0.25, 0.65, 1.26, 0.67, 1.27},
    {10, 3, kInf, 15.95, 0.27, 16.22, 0.26},
    {10, 3, 0.5, 0.91, 1.07, 0.87, 1.13},
    {10, 3, 0.25, 0.09, 3.44, 0.12, 2.72},
    {60, 1, kInf, 57.31, 0.15, 57.36, 0.15},
    {60, 1, 0.5, 30.57, 0.23, 30.07, 0.24},
    {60, 1, 0.25, 3.90, 0.57, 3.90, 0.53},
    {60, 3, kInf, 95.95, 0.15, 95.03, 0.14},
    {60, 3, 0.5, 5.44, 0.48, 5.70, 0.43},
    {60, 3, 0.25, 0.51, 1.44, 0.53, 1.38},
}};

// Application null properties: triads under a homogeneous Poisson process
// (theory and simulation) and tetrads (simulation only), with the counts
// observed in the catalogues.
struct ApplicationCell {
    const char* name;
    double observedTriads;
    double observedTetrads;
    double theoryMean;
    double theoryCv;
    double simMean;
    double simCv;
    double simTetradMean;
    double simTetradCv;
};

// Cold clumps: disc of radius 10 degrees at the galactic origin, d0 = sqrt 2.
inline constexpr ApplicationCell kColdClumps{"cold clumps", 126, 34, 63.0, 0.20, 62.6, 0.24, 17.0, 0.56};
// Precipitation minima: latitudes -62..72, all longitudes, d0 = 10, 697 points.
inline constexpr ApplicationCell kPrecipitation{"precipitation", 812, 428, 441.1, 0.10, 438.2, 0.08, 141.4, 0.18};
inline constexpr std::size_t kPrecipitationPoints = 697;

// Rejection rates of the count tests at level 0.05 on the 150 x 360 mixture
// scenario, 697 points, against a Poisson null and a matched cluster null.
struct PowerRow {
    double w;
    double ppTriads;
    double ppTetrads;
    double pcpTriads;
    double pcpTetrads;
};

inline constexpr std::array<PowerRow, 6> kPowerRows{{
    {0.0, 0.06, 0.05, 0.04, 0.03},
    {0.05, 0.45, 0.66, 0.01, 0.04},
    {0.1, 0.87, 0.97, 0.00, 0.05},
    {0.15, 0.99, 1.00, 0.00, 0.05},
    {0.2, 1.00, 1.00, 0.00, 0.04},
    {0.25, 1.00, 1.00, 0.00, 0.03},
}};

// Median recovery metrics for arc search and the spanning-tree baseline.
struct RecoveryRow {
    double w;
    double captureAs;
    double captureMst;
    double sensitivityAs;
    double sensitivityMst;
    double specificityAs;
    double specificityMst;
};

inline constexpr std::array<RecoveryRow, 5> kRecoveryRows{{
    {0.1, 0.92, 0.67, 0.96, 0.69, 0.42, 0.65},
    {0.3, 0.92, 0.67, 0.95, 0.69, 0.45, 0.68},
    {0.5, 0.92, 0.68, 0.96, 0.69, 0.47, 0.70},
    {0.7, 0.93, 0.69, 0.96, 0.70, 0.49, 0.72},
    {0.9, 0.93, 0.70, 0.96, 0.70, 0.51, 0.75},
}};

// ABC recovery: true parameters, mean of posterior means and their SD over
// repeated synthetic datasets.
struct AbcScenario {
    double lambda0, mu, lambda1;
    double meanLambda0, sdLambda0;
    double meanMu, sdMu;
    double meanLambda1, sdLambda1;
};

inline constexpr std::array<AbcScenario, 4> kAbcScenarios{{
    {60, 2, 350, 61.9, 18.5, 1.97, 0.59, 349.3, 56.6},
    {60, 3, 290, 61.6, 16.0, 2.87, 0.60, 294.2, 48.7},
    {80, 2, 250, 79.2, 18.5, 1.94, 0.52, 258.5, 51.8},
    {40, 2, 450, 43.1, 18.6, 1.97, 0.77, 454.0, 61.4},
}};

} // namespace filamenta::reference
