#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "filamenta/rng.hpp"

namespace filamenta {

inline constexpr double kPi = std::numbers::pi;

/// Sphere radius for which arc length is measured in degrees.
inline constexpr double kDegreeSphereRadius = 180.0 / kPi;

inline constexpr double degToRad(double deg) { return deg * kPi / 180.0; }
inline constexpr double radToDeg(double rad) { return rad * 180.0 / kPi; }

/// Planar (x, y) or spherical (longitude, latitude) in degrees.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

using PointSet = std::vector<Point>;

/// Tangent-plane direction, components (east, north) on the sphere.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

class Metric {
public:
    enum class Kind { Euclidean, GreatCircle };

    static Metric euclidean() { return Metric(Kind::Euclidean, 1.0); }
    static Metric greatCircle(double sphereRadius = kDegreeSphereRadius);

    Kind kind() const { return kind_; }
    bool spherical() const { return kind_ == Kind::GreatCircle; }
    double sphereRadius() const { return radius_; }

private:
    Metric(Kind kind, double radius) : kind_(kind), radius_(radius) {}

    Kind kind_;
    double radius_;
};

/// Throws InvalidInput on non-finite coordinates (or latitude outside
/// [-90, 90] for spherical metrics).
void validatePoint(const Metric& metric, Point p);

double distance(const Metric& metric, Point a, Point b);

/// Direction of travel from `from` towards `to`, as an angle counterclockwise
/// from the +x (east) axis. On the sphere this is the initial great-circle
/// heading in the local tangent plane.
double heading(const Metric& metric, Point from, Point to);

struct Step {
    Point position;
    /// Heading at the destination when continuing along the same path.
    double heading = 0.0;
};

/// Moves `length` along `headingRad` from `from` (a straight line or a
/// great circle). Longitudes are normalised to [-180, 180).
Step advance(const Metric& metric, Point from, double headingRad, double length);

/// Wrap an angle to (-pi, pi].
double wrapAngle(double a);

/// Longitude in degrees wrapped to [-180, 180).
double normaliseLongitude(double lon);

/// Interior angle at `apex` between the rays to `a` and `b`, in [0, pi].
/// Requires both rays to have non-zero length.
double angleAt(const Metric& metric, Point apex, Point a, Point b);

struct Triangle {
    std::array<Point, 3> vertices;
};

struct LargestAngle {
    double angle = 0.0;
    int vertex = 0;
};

/// Largest interior angle and its vertex; ties go to the lowest index.
/// Collinear triangles report pi. Throws DegenerateTriangle if two vertices
/// coincide.
LargestAngle largestAngle(const Triangle& t, const Metric& metric);

class Region {
public:
    enum class Kind { Rect, Disc, Cap, LatLonBand };

    /// Axis-aligned rectangle [origin.x, origin.x + width] x [origin.y, origin.y + height].
    static Region rect(double width, double height, Point origin = {});
    /// Planar disc.
    static Region disc(Point center, double radius);
    /// Spherical cap: points within great-circle distance `radius` of `center`.
    static Region cap(Point center, double radius, double sphereRadius = kDegreeSphereRadius);
    /// Closed latitude band; with `cyclic` the longitude seam is not a boundary.
    static Region latLonBand(double latMin, double latMax, bool cyclic = true,
                             double sphereRadius = kDegreeSphereRadius);

    Kind kind() const { return kind_; }
    bool spherical() const { return kind_ == Kind::Cap || kind_ == Kind::LatLonBand; }
    Metric naturalMetric() const;

    double area() const;
    bool contains(Point p) const;

    double width() const { return a_; }
    double height() const { return b_; }
    Point origin() const { return origin_; }
    Point center() const { return origin_; }
    double radius() const { return a_; }
    double latMin() const { return a_; }
    double latMax() const { return b_; }
    bool cyclic() const { return cyclic_; }
    double sphereRadius() const { return sphereRadius_; }

    /// Largest distance between two points of the region (used to bound
    /// secants that never meet the boundary).
    double diameter() const;

private:
    Region() = default;

    Kind kind_ = Kind::Rect;
    Point origin_{};
    double a_ = 0.0;
    double b_ = 0.0;
    bool cyclic_ = false;
    double sphereRadius_ = 1.0;
};

/// Distance from `p` to the region boundary along the ray with the given
/// heading (straight or great-circle, per the region's surface). Throws
/// DomainError if p is outside the region.
double boundarySecantLength(const Region& region, Point p, double headingRad);
double boundarySecantLength(const Region& region, Point p, Vec2 direction);

/// A point uniformly distributed over the region's surface area.
Point sampleUniform(const Region& region, Rng& rng);

} // namespace filamenta
