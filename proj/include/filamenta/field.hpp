#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "filamenta/geometry.hpp"

namespace filamenta {

/// Gridded field, row = latitude index, column = longitude index, row-major.
struct GridField {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<double> lat; ///< one entry per row (degrees)
    std::vector<double> lon; ///< one entry per column (degrees)

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// Cell centres strictly lower than all eight neighbours. Cells in the first
/// and last rows never qualify; edge columns qualify only when the longitude
/// axis wraps. Throws InvalidInput for NaN cells or grids smaller than 3x3.
PointSet localMinima(const GridField& grid, bool cyclicLongitude);

struct StandardisedFields {
    std::vector<GridField> fields;
    /// Row-major indices of cells whose replication variance is zero; those
    /// cells are set to 0 in every output field.
    std::vector<std::size_t> zeroVarianceCells;
    std::vector<std::string> warnings;
};

/// Point-wise standardisation by the mean and sample SD (n - 1) across replications.
StandardisedFields standardiseAcrossReplications(std::span<const GridField> fields);

/// Keeps rows whose latitude lies in the closed band [latMin, latMax].
GridField restrictLatitude(const GridField& grid, double latMin, double latMax);

/// Reads a field: `valuesCsv` holds one line per latitude row with comma
/// separated values per longitude column (no header); `axisCsv` has a header
/// line `axis,value` followed by `lat,<deg>` and `lon,<deg>` rows in order.
GridField readGridCsv(const std::string& valuesCsv, const std::string& axisCsv);

} // namespace filamenta
