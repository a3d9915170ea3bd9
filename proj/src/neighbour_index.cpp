#include "filamenta/neighbour_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "filamenta/error.hpp"

namespace filamenta {

NeighbourIndex::NeighbourIndex(std::span<const Point> points, const Metric& metric, double radius)
    : points_(points), metric_(metric), radius_(radius) {
    if (!(radius > 0.0)) {
        throw InvalidInput("neighbour radius must be positive");
    }
    for (const auto& p : points) {
        validatePoint(metric, p);
    }
    embedded_.reserve(points.size());
    for (const auto& p : points) {
        embedded_.push_back(embed(p));
    }
    double chord = radius;
    if (metric.spherical()) {
        const double R = metric.sphereRadius();
        chord = radius >= kPi * R ? std::numeric_limits<double>::infinity()
                                  : 2.0 * R * std::sin(radius / (2.0 * R));
    }
    single_ = !std::isfinite(chord);
    cell_ = single_ ? 1.0 : chord * (1.0 + 1e-9);

    std::vector<std::pair<Key, std::size_t>> keyed;
    keyed.reserve(points.size());
    for (std::size_t i = 0; i < embedded_.size(); ++i) {
        keyed.emplace_back(keyFor(embedded_[i]), i);
    }
    std::sort(keyed.begin(), keyed.end());
    members_.reserve(keyed.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (i == 0 || keyed[i].first != keyed[i - 1].first) {
            cellKeys_.push_back(keyed[i].first);
            cellStart_.push_back(i);
        }
        members_.push_back(keyed[i].second);
    }
    cellStart_.push_back(keyed.size());
}

std::array<double, 3> NeighbourIndex::embed(Point p) const {
    if (!metric_.spherical()) {
        return {p.x, p.y, 0.0};
    }
    const double R = metric_.sphereRadius();
    const double lon = degToRad(p.x);
    const double lat = degToRad(p.y);
    return {R * std::cos(lat) * std::cos(lon), R * std::cos(lat) * std::sin(lon), R * std::sin(lat)};
}

NeighbourIndex::Key NeighbourIndex::keyFor(const std::array<double, 3>& e) const {
    if (single_) {
        return {0, 0, 0};
    }
    return {static_cast<std::int64_t>(std::floor(e[0] / cell_)),
            static_cast<std::int64_t>(std::floor(e[1] / cell_)),
            static_cast<std::int64_t>(std::floor(e[2] / cell_))};
}

std::vector<Neighbour> NeighbourIndex::query(Point q, std::size_t exclude, bool strict) const {
    std::vector<Neighbour> out;
    auto consider = [&](std::size_t j) {
        if (j == exclude) {
            return;
        }
        const double d = distance(metric_, q, points_[j]);
        if (strict ? d < radius_ : d <= radius_) {
            out.push_back({j, d});
        }
    };
    if (single_) {
        for (std::size_t j = 0; j < points_.size(); ++j) {
            consider(j);
        }
        return out;
    }
    const Key k = keyFor(embed(q));
    const int zSpan = metric_.spherical() ? 1 : 0;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dz = -zSpan; dz <= zSpan; ++dz) {
                const Key probe{k[0] + dx, k[1] + dy, k[2] + dz};
                const auto it = std::lower_bound(cellKeys_.begin(), cellKeys_.end(), probe);
                if (it == cellKeys_.end() || *it != probe) {
                    continue;
                }
                const auto c = static_cast<std::size_t>(it - cellKeys_.begin());
                for (std::size_t m = cellStart_[c]; m < cellStart_[c + 1]; ++m) {
                    consider(members_[m]);
                }
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Neighbour& a, const Neighbour& b) { return a.index < b.index; });
    return out;
}

std::vector<Neighbour> NeighbourIndex::neighbours(std::size_t i, bool strict) const {
    return query(points_[i], i, strict);
}

std::vector<Neighbour> NeighbourIndex::within(Point q, bool strict) const {
    return query(q, std::numeric_limits<std::size_t>::max(), strict);
}

} // namespace filamenta
