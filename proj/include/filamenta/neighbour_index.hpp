#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "filamenta/geometry.hpp"

namespace filamenta {

struct Neighbour {
    std::size_t index;
    double distance;
};

/// Uniform-grid bucketing for fixed-radius queries. Points are embedded in
/// 3-D (the plane at z = 0, or the sphere of the metric's radius), so the
/// longitude seam needs no special handling. Cell size equals the query
/// radius; an infinite radius degenerates to a single bucket.
class NeighbourIndex {
public:
    NeighbourIndex(std::span<const Point> points, const Metric& metric, double radius);

    /// Points j != i with metric distance < radius (strict) or <= radius.
    /// Results are in ascending index order.
    std::vector<Neighbour> neighbours(std::size_t i, bool strict) const;

    /// Same for an arbitrary query location; no index is excluded.
    std::vector<Neighbour> within(Point q, bool strict) const;

    double radius() const { return radius_; }
    const Metric& metric() const { return metric_; }

private:
    using Key = std::array<std::int64_t, 3>;

    Key keyFor(const std::array<double, 3>& e) const;
    std::array<double, 3> embed(Point p) const;
    std::vector<Neighbour> query(Point q, std::size_t exclude, bool strict) const;

    std::span<const Point> points_;
    Metric metric_;
    double radius_;
    double cell_;
    bool single_;
    std::vector<std::array<double, 3>> embedded_;
    std::vector<Key> cellKeys_;           // sorted unique keys
    std::vector<std::size_t> cellStart_;  // CSR offsets into members_
    std::vector<std::size_t> members_;
};

} // namespace filamenta
