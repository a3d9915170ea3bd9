#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace filamenta {

/// One computed quantity with its acceptance interval. Rows with
/// checked == false are informational.
struct CheckRow {
    std::string label;
    double computed = 0.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double published = std::numeric_limits<double>::quiet_NaN();
    bool checked = true;

    bool pass() const { return !checked || (computed >= lo && computed <= hi); }
};

struct ReproReport {
    std::string name;
    std::vector<CheckRow> rows;
    std::vector<std::string> notes;
    double seconds = 0.0;

    bool pass() const;
    const CheckRow* find(const std::string& label) const;
};

struct ReproOptions {
    /// Fraction of the published replicate counts, in (0, 1].
    double scale = 1.0;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// Mixture levels for the recovery and linearity runs; empty = published set.
    std::vector<double> wLevels;
    /// ABC iterations per dataset and number of parameter scenarios to run.
    std::size_t abcIterations = 2000;
    std::size_t abcScenarios = 4;
    /// Monte Carlo pairs for the moment functionals.
    std::size_t momentPairs = 100000;
};

/// Theoretical mean and CV of the blunt-triad count at n = 40 in s x 1
/// rectangles; tolerance 3 Monte Carlo SE plus half a unit of the published
/// rounding.
ReproReport reproduceMomentTheory(const ReproOptions& opts);

/// Simulated Poisson patterns (1000 at full scale) against the computed
/// theory; tolerance 3 combined SE.
ReproReport reproduceMomentSimulation(const ReproOptions& opts);

/// Null properties for the two applications. The cold-clump point count is
/// solved from the published theoretical mean.
ReproReport reproduceApplicationNull(const ReproOptions& opts);

/// Size and power of the triad and tetrad tests on the mixture scenario
/// against Poisson and matched cluster nulls (1000 replicates at full scale).
ReproReport reproducePowerTable(const ReproOptions& opts);

/// Capture rate, sensitivity and specificity of arc search and the MST
/// baseline (500 replicates at full scale).
ReproReport reproduceRecovery(const ReproOptions& opts);

/// Power of the median-linearity test against the mixture and cluster
/// alternatives (100 replicates and 100 null patterns at full scale).
ReproReport reproduceLinearityPower(const ReproOptions& opts);

/// ABC parameter recovery on synthetic datasets (100 per scenario at full
/// scale).
ReproReport reproduceAbcRecovery(const ReproOptions& opts);

/// Dispatch on t1, t1-sim, t2-sim, t3, t5t6, fig4, t4.
ReproReport reproduce(const std::string& table, const ReproOptions& opts);

std::vector<std::string> reproductionTables();

} // namespace filamenta
