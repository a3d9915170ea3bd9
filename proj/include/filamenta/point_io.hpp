#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "filamenta/geometry.hpp"

namespace filamenta {

/// Points read from or written to the `x,y[,label]` / `lon,lat[,label]` CSV layout.
struct PointTable {
    PointSet points;
    std::optional<std::vector<int>> labels;
    bool lonLat = false;
};

/// Line-numbered ParseError on malformed content; InvalidInput on an empty file.
PointTable readPointsCsv(std::istream& in, const std::string& sourceName = "<stream>");
PointTable readPointsCsv(const std::string& path);

void writePointsCsv(std::ostream& out, const PointTable& table);
void writePointsCsv(const std::string& path, const PointTable& table);

/// Shortest round-trip decimal representation of a double.
std::string formatReal(double v);

} // namespace filamenta
