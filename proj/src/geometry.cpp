#include "filamenta/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "filamenta/error.hpp"

namespace filamenta {

namespace {

struct Vec3 {
    double x, y, z;
};

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

Vec3 toUnit(Point p) {
    const double lon = degToRad(p.x);
    const double lat = degToRad(p.y);
    return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

Point fromUnit(Vec3 v) {
    const double lat = std::atan2(v.z, std::hypot(v.x, v.y));
    const double lon = std::atan2(v.y, v.x);
    return {normaliseLongitude(radToDeg(lon)), radToDeg(lat)};
}

Vec3 eastAt(Point p) {
    const double lon = degToRad(p.x);
    return {-std::sin(lon), std::cos(lon), 0.0};
}

Vec3 northAt(Point p) {
    const double lon = degToRad(p.x);
    const double lat = degToRad(p.y);
    return {-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat)};
}

Vec3 tangentFor(Point p, double headingRad) {
    return std::cos(headingRad) * eastAt(p) + std::sin(headingRad) * northAt(p);
}

constexpr double kTwoPi = 2.0 * kPi;

// Smallest sigma in (0, 2pi] at which A cos(sigma) + B sin(sigma) falls
// through k (leaves the half-space "value >= k"). Infinity if never.
double exitAngle(double A, double B, double k) {
    const double C = std::hypot(A, B);
    if (C <= 0.0 || k < -C || k > C) {
        return std::numeric_limits<double>::infinity();
    }
    const double phi = std::atan2(B, A);
    double sigma = std::fmod(phi + std::acos(std::clamp(k / C, -1.0, 1.0)), kTwoPi);
    if (sigma < 0.0) {
        sigma += kTwoPi;
    }
    if (sigma <= 1e-15) {
        sigma = kTwoPi;
    }
    return sigma;
}

void requireFiniteDirection(Vec2 d) {
    if (!std::isfinite(d.x) || !std::isfinite(d.y) || (d.x == 0.0 && d.y == 0.0)) {
        throw InvalidInput("direction must be finite and non-zero");
    }
}

} // namespace

Metric Metric::greatCircle(double sphereRadius) {
    if (!(sphereRadius > 0.0) || !std::isfinite(sphereRadius)) {
        throw InvalidInput("sphere radius must be positive and finite");
    }
    return Metric(Kind::GreatCircle, sphereRadius);
}

void validatePoint(const Metric& metric, Point p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw InvalidInput("non-finite coordinate");
    }
    if (metric.spherical() && (p.y < -90.0 || p.y > 90.0)) {
        throw InvalidInput("latitude outside [-90, 90]: " + std::to_string(p.y));
    }
}

double wrapAngle(double a) {
    a = std::fmod(a + kPi, kTwoPi);
    if (a <= 0.0) {
        a += kTwoPi;
    }
    return a - kPi;
}

double normaliseLongitude(double lon) {
    double l = std::fmod(lon + 180.0, 360.0);
    if (l < 0.0) {
        l += 360.0;
    }
    l -= 180.0;
    return l >= 180.0 ? -180.0 : l;
}

double distance(const Metric& metric, Point a, Point b) {
    validatePoint(metric, a);
    validatePoint(metric, b);
    if (!metric.spherical()) {
        return std::hypot(b.x - a.x, b.y - a.y);
    }
    const Vec3 ua = toUnit(a);
    const Vec3 ub = toUnit(b);
    return metric.sphereRadius() * std::atan2(norm(cross(ua, ub)), dot(ua, ub));
}

double heading(const Metric& metric, Point from, Point to) {
    if (!metric.spherical()) {
        return std::atan2(to.y - from.y, to.x - from.x);
    }
    const Vec3 p = toUnit(from);
    const Vec3 q = toUnit(to);
    const Vec3 d = q - dot(p, q) * p;
    return std::atan2(dot(d, northAt(from)), dot(d, eastAt(from)));
}

Step advance(const Metric& metric, Point from, double headingRad, double length) {
    if (!metric.spherical()) {
        return {{from.x + length * std::cos(headingRad), from.y + length * std::sin(headingRad)},
                headingRad};
    }
    const double sigma = length / metric.sphereRadius();
    const Vec3 p = toUnit(from);
    const Vec3 t = tangentFor(from, headingRad);
    const Vec3 q = std::cos(sigma) * p + std::sin(sigma) * t;
    const Vec3 tq = std::cos(sigma) * t - std::sin(sigma) * p;
    const Point dest = fromUnit(q);
    return {dest, std::atan2(dot(tq, northAt(dest)), dot(tq, eastAt(dest)))};
}

double angleAt(const Metric& metric, Point apex, Point a, Point b) {
    if (!metric.spherical()) {
        const double ax = a.x - apex.x, ay = a.y - apex.y;
        const double bx = b.x - apex.x, by = b.y - apex.y;
        return std::atan2(std::abs(ax * by - ay * bx), ax * bx + ay * by);
    }
    const Vec3 p = toUnit(apex);
    const Vec3 qa = toUnit(a);
    const Vec3 qb = toUnit(b);
    const Vec3 da = qa - dot(p, qa) * p;
    const Vec3 db = qb - dot(p, qb) * p;
    return std::atan2(norm(cross(da, db)), dot(da, db));
}

LargestAngle largestAngle(const Triangle& t, const Metric& metric) {
    const auto& v = t.vertices;
    for (int i = 0; i < 3; ++i) {
        validatePoint(metric, v[i]);
        for (int j = i + 1; j < 3; ++j) {
            if (v[i] == v[j] || distance(metric, v[i], v[j]) == 0.0) {
                throw DegenerateTriangle("triangle has coincident vertices");
            }
        }
    }
    LargestAngle best{-1.0, 0};
    for (int i = 0; i < 3; ++i) {
        const double angle = angleAt(metric, v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
        if (angle > best.angle + 1e-12) {
            best = {angle, i};
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Region

Region Region::rect(double width, double height, Point origin) {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
        throw InvalidInput("rectangle sides must be positive and finite");
    }
    Region r;
    r.kind_ = Kind::Rect;
    r.a_ = width;
    r.b_ = height;
    r.origin_ = origin;
    return r;
}

Region Region::disc(Point center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw InvalidInput("disc radius must be positive and finite");
    }
    Region r;
    r.kind_ = Kind::Disc;
    r.origin_ = center;
    r.a_ = radius;
    return r;
}

Region Region::cap(Point center, double radius, double sphereRadius) {
    if (!(radius > 0.0) || !(sphereRadius > 0.0) || radius > kPi * sphereRadius) {
        throw InvalidInput("cap radius must lie in (0, pi * sphereRadius]");
    }
    Region r;
    r.kind_ = Kind::Cap;
    r.origin_ = {normaliseLongitude(center.x), center.y};
    r.a_ = radius;
    r.sphereRadius_ = sphereRadius;
    return r;
}

Region Region::latLonBand(double latMin, double latMax, bool cyclic, double sphereRadius) {
    if (!(latMin < latMax) || latMin < -90.0 || latMax > 90.0 || !(sphereRadius > 0.0)) {
        throw InvalidInput("latitude band needs -90 <= latMin < latMax <= 90");
    }
    Region r;
    r.kind_ = Kind::LatLonBand;
    r.a_ = latMin;
    r.b_ = latMax;
    r.cyclic_ = cyclic;
    r.sphereRadius_ = sphereRadius;
    return r;
}

Metric Region::naturalMetric() const {
    return spherical() ? Metric::greatCircle(sphereRadius_) : Metric::euclidean();
}

double Region::area() const {
    const double R2 = sphereRadius_ * sphereRadius_;
    switch (kind_) {
    case Kind::Rect:
        return a_ * b_;
    case Kind::Disc:
        return kPi * a_ * a_;
    case Kind::Cap:
        return 2.0 * kPi * R2 * (1.0 - std::cos(a_ / sphereRadius_));
    case Kind::LatLonBand:
        return 2.0 * kPi * R2 * (std::sin(degToRad(b_)) - std::sin(degToRad(a_)));
    }
    return 0.0;
}

bool Region::contains(Point p) const {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        return false;
    }
    switch (kind_) {
    case Kind::Rect:
        return p.x >= origin_.x && p.x <= origin_.x + a_ && p.y >= origin_.y && p.y <= origin_.y + b_;
    case Kind::Disc:
        return std::hypot(p.x - origin_.x, p.y - origin_.y) <= a_;
    case Kind::Cap:
        return p.y >= -90.0 && p.y <= 90.0 &&
               distance(Metric::greatCircle(sphereRadius_), origin_, p) <= a_;
    case Kind::LatLonBand:
        return p.y >= a_ && p.y <= b_;
    }
    return false;
}

double Region::diameter() const {
    switch (kind_) {
    case Kind::Rect:
        return std::hypot(a_, b_);
    case Kind::Disc:
        return 2.0 * a_;
    case Kind::Cap:
        return std::min(2.0 * a_, kPi * sphereRadius_);
    case Kind::LatLonBand:
        return kPi * sphereRadius_;
    }
    return 0.0;
}

double boundarySecantLength(const Region& region, Point p, Vec2 direction) {
    requireFiniteDirection(direction);
    return boundarySecantLength(region, p, std::atan2(direction.y, direction.x));
}

namespace {

// Containment with slack for points produced by floating-point sampling.
bool nearlyContains(const Region& region, Point p) {
    if (region.contains(p)) {
        return true;
    }
    switch (region.kind()) {
    case Region::Kind::Rect: {
        const double tol = 1e-12 * std::max(region.width(), region.height());
        const Point o = region.origin();
        return p.x >= o.x - tol && p.x <= o.x + region.width() + tol && p.y >= o.y - tol &&
               p.y <= o.y + region.height() + tol;
    }
    case Region::Kind::Disc:
        return std::hypot(p.x - region.center().x, p.y - region.center().y) <=
               region.radius() * (1.0 + 1e-12);
    case Region::Kind::Cap:
        return distance(Metric::greatCircle(region.sphereRadius()), region.center(), p) <=
               region.radius() + 1e-9 * region.sphereRadius();
    case Region::Kind::LatLonBand:
        return p.y >= region.latMin() - 1e-12 && p.y <= region.latMax() + 1e-12;
    }
    return false;
}

} // namespace

double boundarySecantLength(const Region& region, Point p, double headingRad) {
    if (!nearlyContains(region, p)) {
        throw DomainError("secant origin lies outside the region");
    }
    const double dx = std::cos(headingRad);
    const double dy = std::sin(headingRad);
    switch (region.kind()) {
    case Region::Kind::Rect: {
        const Point lo = region.origin();
        double s = std::numeric_limits<double>::infinity();
        if (dx > 0.0) {
            s = std::min(s, (lo.x + region.width() - p.x) / dx);
        } else if (dx < 0.0) {
            s = std::min(s, (lo.x - p.x) / dx);
        }
        if (dy > 0.0) {
            s = std::min(s, (lo.y + region.height() - p.y) / dy);
        } else if (dy < 0.0) {
            s = std::min(s, (lo.y - p.y) / dy);
        }
        return std::max(s, 0.0);
    }
    case Region::Kind::Disc: {
        const Point c = region.center();
        const double ox = p.x - c.x, oy = p.y - c.y;
        const double b = ox * dx + oy * dy;
        const double cterm = ox * ox + oy * oy - region.radius() * region.radius();
        return std::max(0.0, -b + std::sqrt(std::max(0.0, b * b - cterm)));
    }
    case Region::Kind::Cap: {
        const Vec3 u = toUnit(p);
        const Vec3 t = tangentFor(p, headingRad);
        const Vec3 c = toUnit(region.center());
        const double sigma =
            exitAngle(dot(c, u), dot(c, t), std::cos(region.radius() / region.sphereRadius()));
        return region.sphereRadius() * std::min(sigma, kTwoPi);
    }
    case Region::Kind::LatLonBand: {
        const Vec3 u = toUnit(p);
        const Vec3 t = tangentFor(p, headingRad);
        // z <= sin(latMax)  <=>  -z >= -sin(latMax)
        double sigma = exitAngle(-u.z, -t.z, -std::sin(degToRad(region.latMax())));
        sigma = std::min(sigma, exitAngle(u.z, t.z, std::sin(degToRad(region.latMin()))));
        if (!region.cyclic()) {
            // The seam is the half-plane y = 0, x < 0.
            const double A = u.y, B = t.y;
            const double C = std::hypot(A, B);
            if (C > 0.0) {
                const double phi = std::atan2(B, A);
                for (int k = 0; k < 4; ++k) {
                    double s = std::fmod(phi + kPi / 2.0 + k * kPi, kTwoPi);
                    if (s < 0.0) {
                        s += kTwoPi;
                    }
                    if (s <= 1e-12) {
                        continue;
                    }
                    const double x = u.x * std::cos(s) + t.x * std::sin(s);
                    if (x < 0.0) {
                        sigma = std::min(sigma, s);
                    }
                }
            }
        }
        // A great circle that never meets the band edges closes on itself.
        return region.sphereRadius() * std::min(sigma, kTwoPi);
    }
    }
    return 0.0;
}

Point sampleUniform(const Region& region, Rng& rng) {
    switch (region.kind()) {
    case Region::Kind::Rect: {
        const Point o = region.origin();
        const double x = o.x + region.width() * rng.uniform();
        const double y = o.y + region.height() * rng.uniform();
        return {x, y};
    }
    case Region::Kind::Disc: {
        const double r = region.radius() * std::sqrt(rng.uniform());
        const double theta = kTwoPi * rng.uniform();
        return {region.center().x + r * std::cos(theta), region.center().y + r * std::sin(theta)};
    }
    case Region::Kind::Cap: {
        const double R = region.sphereRadius();
        const double cosMax = std::cos(region.radius() / R);
        const double cosTheta = 1.0 - rng.uniform() * (1.0 - cosMax);
        const double theta = std::acos(std::clamp(cosTheta, -1.0, 1.0));
        const double h = kTwoPi * rng.uniform();
        return advance(Metric::greatCircle(R), region.center(), h, theta * R).position;
    }
    case Region::Kind::LatLonBand: {
        const double zLo = std::sin(degToRad(region.latMin()));
        const double zHi = std::sin(degToRad(region.latMax()));
        const double z = zLo + (zHi - zLo) * rng.uniform();
        const double lat = std::clamp(radToDeg(std::asin(z)), region.latMin(), region.latMax());
        const double lon = -180.0 + 360.0 * rng.uniform();
        return {normaliseLongitude(lon), lat};
    }
    }
    return {};
}

} // namespace filamenta
