#include "filamenta/triad_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "filamenta/error.hpp"
#include "filamenta/neighbour_index.hpp"
#include "filamenta/parallel.hpp"

namespace filamenta {

TriadParams TriadParams::make(double epsilon, double d0) {
    TriadParams p{epsilon, d0};
    p.validate();
    return p;
}

void TriadParams::validate() const {
    if (!(epsilon > 0.0) || !(epsilon < kPi / 3.0)) {
        throw InvalidInput("epsilon must lie in (0, pi/3)");
    }
    if (!(d0 > 0.0)) {
        throw InvalidInput("d0 must be positive (or infinite)");
    }
}

double choose(std::size_t n, std::size_t k) {
    if (k > n) {
        return 0.0;
    }
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

double wedgeLensArea(const SecantGeometry& g) {
    const double t = g.t;
    const double d0 = g.d0;
    if (t < d0) {
        const double u = std::min(g.u, d0);
        const double v = std::min(g.v, d0);
        return u * u + t * t / 3.0 + v * v;
    }
    if (t <= 2.0 * d0) {
        const double h = 2.0 * d0 * d0 - t * t / 3.0 - 4.0 * d0 * d0 * d0 / (3.0 * t);
        return std::max(0.0, h);
    }
    return 0.0;
}

MomentEstimates estimateMoments(const Region& region, const TriadParams& params, std::size_t nPairs,
                                const Rng& rng, const MomentOptions& options) {
    params.validate();
    if (nPairs < 1000) {
        throw InvalidInput("estimateMoments needs at least 1000 pairs");
    }
    if (options.innerDraws < 2) {
        throw InvalidInput("innerDraws must be at least 2");
    }
    if (!std::isfinite(params.d0) && region.kind() == Region::Kind::LatLonBand) {
        throw UnsupportedRegion("latitude bands have unbounded secants; d0 must be finite");
    }
    const Metric metric = region.naturalMetric();
    const std::size_t inner = options.innerDraws;
    const std::size_t outer = std::max<std::size_t>(2, nPairs / inner);
    const double area = region.area();

    struct Batch {
        double a, b, g;
    };
    std::vector<Batch> batches(outer);
    parallelFor(outer, options.workers, [&](std::size_t o) {
        Rng r = rng.child(o);
        const Point p = sampleUniform(region, r);
        double sum = 0.0;
        double sumSq = 0.0;
        for (std::size_t k = 0; k < inner; ++k) {
            const Point q = sampleUniform(region, r);
            const double t = distance(metric, p, q);
            double h = 0.0;
            if (t > 0.0) {
                SecantGeometry geom{t, 0.0, 0.0, params.d0};
                if (t < params.d0) {
                    geom.u = boundarySecantLength(region, p, heading(metric, p, q) + kPi);
                    geom.v = boundarySecantLength(region, q, heading(metric, q, p) + kPi);
                }
                h = wedgeLensArea(geom);
            }
            sum += h;
            sumSq += h * h;
        }
        const double m = static_cast<double>(inner);
        batches[o] = {sum / m / area, (sum * sum - sumSq) / (m * (m - 1.0)) / (area * area),
                      sumSq / m / (area * area)};
    });

    MomentEstimates est;
    est.outerDraws = outer;
    est.innerDraws = inner;
    est.nPairs = outer * inner;
    const double n = static_cast<double>(outer);
    for (const auto& b : batches) {
        est.alpha += b.a;
        est.beta += b.b;
        est.gamma += b.g;
    }
    est.alpha /= n;
    est.beta /= n;
    est.gamma /= n;
    const std::array<double, 3> mean{est.alpha, est.beta, est.gamma};
    for (const auto& b : batches) {
        const std::array<double, 3> x{b.a, b.b, b.g};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                est.covariance[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
            }
        }
    }
    for (auto& row : est.covariance) {
        for (auto& c : row) {
            c /= (n - 1.0) * n;
        }
    }
    est.seAlpha = std::sqrt(est.covariance[0][0]);
    est.seBeta = std::sqrt(est.covariance[1][1]);
    est.seGamma = std::sqrt(est.covariance[2][2]);
    return est;
}

double expectedTriads(std::size_t n, double epsilon, double alpha) {
    if (n < 3) {
        return 0.0;
    }
    return choose(n, 3) * alpha * epsilon;
}

TriadCountMoments triadCountMoments(std::size_t n, double epsilon, const MomentEstimates& m) {
    TriadCountMoments out;
    if (n < 3) {
        return out;
    }
    const double c1 = choose(n, 3) * epsilon;
    const double c2 = 3.0 * choose(n, 3) * choose(n - 3, 2) * epsilon * epsilon;
    const double c3 = 3.0 * choose(n, 3) * choose(n - 3, 1) * epsilon * epsilon;
    const double a = m.alpha;
    out.expected = c1 * a;
    const double bernoulli = out.expected * (1.0 - a * epsilon);
    out.variance = bernoulli + c2 * (m.beta - a * a) + c3 * (m.gamma - a * a);
    if (out.variance < 0.0) {
        out.variance = bernoulli;
        out.clamped = true;
        out.warnings.push_back("variance negative after Monte Carlo noise; clamped to E[N](1 - alpha eps)");
    }
    out.cv = out.expected > 0.0 ? std::sqrt(out.variance) / out.expected : 0.0;

    // Delta method on (alpha, beta, gamma).
    out.seExpected = c1 * m.seAlpha;
    if (out.expected > 0.0 && out.variance > 0.0) {
        const double sd = std::sqrt(out.variance);
        std::array<double, 3> dV{c1 - 2.0 * c1 * epsilon * a - 2.0 * (c2 + c3) * a, c2, c3};
        if (out.clamped) {
            dV = {c1 - 2.0 * c1 * epsilon * a, 0.0, 0.0};
        }
        std::array<double, 3> grad{};
        for (int i = 0; i < 3; ++i) {
            grad[i] = dV[i] / (2.0 * sd * out.expected);
        }
        grad[0] -= sd * c1 / (out.expected * out.expected);
        double var = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                var += grad[i] * m.covariance[i][j] * grad[j];
            }
        }
        out.seCv = std::sqrt(std::max(0.0, var));
    }
    return out;
}

double varianceTriads(std::size_t n, double epsilon, const MomentEstimates& m) {
    return triadCountMoments(n, epsilon, m).variance;
}

TriadCensus countBluntTriads(std::span<const Point> points, const TriadParams& params,
                             const Metric& metric, unsigned workers) {
    params.validate();
    TriadCensus census;
    census.nPoints = points.size();
    if (points.size() < 3) {
        return census;
    }
    const NeighbourIndex index(points, metric, params.d0);
    const double threshold = kPi - params.epsilon;
    std::vector<std::vector<Triad>> perApex(points.size());
    parallelFor(points.size(), workers, [&](std::size_t q) {
        auto near = index.neighbours(q, /*strict=*/true);
        std::erase_if(near, [](const Neighbour& nb) { return nb.distance <= 0.0; });
        auto& out = perApex[q];
        for (std::size_t a = 0; a < near.size(); ++a) {
            for (std::size_t b = a + 1; b < near.size(); ++b) {
                const std::size_t i = near[a].index;
                const std::size_t k = near[b].index;
                if (angleAt(metric, points[q], points[i], points[k]) > threshold) {
                    std::array<std::size_t, 3> tri{q, i, k};
                    std::sort(tri.begin(), tri.end());
                    out.push_back({tri, q});
                }
            }
        }
    });
    for (auto& v : perApex) {
        census.triads.insert(census.triads.end(), v.begin(), v.end());
    }
    std::sort(census.triads.begin(), census.triads.end());
    census.triads.erase(std::unique(census.triads.begin(), census.triads.end()), census.triads.end());
    return census;
}

std::size_t countAlignedTetrads(TriadCensus& census) {
    std::vector<std::vector<std::size_t>> byApex(census.nPoints);
    for (std::size_t t = 0; t < census.triads.size(); ++t) {
        byApex[census.triads[t].apex].push_back(t);
    }
    auto ends = [](const Triad& t) {
        std::array<std::size_t, 2> e{};
        int k = 0;
        for (auto p : t.points) {
            if (p != t.apex) {
                e[k++] = p;
            }
        }
        return e;
    };
    std::vector<Tetrad> out;
    for (const auto& first : census.triads) {
        const std::size_t a = first.apex;
        const auto e = ends(first);
        for (int side = 0; side < 2; ++side) {
            const std::size_t b = e[side];
            const std::size_t x = e[1 - side];
            if (!(a < b)) {
                continue;
            }
            for (std::size_t idx : byApex[b]) {
                const auto e2 = ends(census.triads[idx]);
                std::size_t y;
                if (e2[0] == a) {
                    y = e2[1];
                } else if (e2[1] == a) {
                    y = e2[0];
                } else {
                    continue;
                }
                if (y != x) {
                    out.push_back({x, a, b, y});
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    census.tetrads = std::move(out);
    return census.tetrads.size();
}

NullTestReport poissonNullTheory(std::size_t observed, const TriadCountMoments& moments) {
    NullTestReport r;
    r.mode = "theory";
    r.observed = observed;
    r.expected = moments.expected;
    r.variance = moments.variance;
    r.cv = moments.cv;
    const double sd = std::sqrt(moments.variance);
    r.z = sd > 0.0 ? (static_cast<double>(observed) - moments.expected) / sd : 0.0;
    r.pValue = 0.5 * std::erfc(r.z / std::sqrt(2.0));
    return r;
}

SimulatedCounts simulateNullCounts(std::size_t n, const Region& region, const TriadParams& params,
                                   std::size_t nSim, const Rng& rng, unsigned workers) {
    SimulatedCounts out;
    out.triads.resize(nSim);
    out.tetrads.resize(nSim);
    const Metric metric = region.naturalMetric();
    parallelFor(nSim, workers, [&](std::size_t s) {
        Rng r = rng.child(s);
        PointSet pts(n);
        for (auto& p : pts) {
            p = sampleUniform(region, r);
        }
        auto census = countBluntTriads(pts, params, metric);
        out.tetrads[s] = static_cast<double>(countAlignedTetrads(census));
        out.triads[s] = static_cast<double>(census.triads.size());
    });
    return out;
}

NullTestReport poissonNullSimulation(std::size_t observed, std::size_t n, const Region& region,
                                     const TriadParams& params, std::size_t nSim, const Rng& rng,
                                     unsigned workers) {
    if (nSim < 99) {
        throw InvalidInput("simulation mode needs at least 99 replicates");
    }
    NullTestReport r;
    r.mode = "simulation";
    r.observed = observed;
    r.nSim = nSim;
    r.simulatedCounts = simulateNullCounts(n, region, params, nSim, rng, workers).triads;
    const double mean =
        std::accumulate(r.simulatedCounts.begin(), r.simulatedCounts.end(), 0.0) / nSim;
    double ss = 0.0;
    for (double c : r.simulatedCounts) {
        ss += (c - mean) * (c - mean);
        if (c >= static_cast<double>(observed)) {
            ++r.exceedances;
        }
    }
    r.expected = mean;
    r.variance = ss / (nSim - 1.0);
    r.cv = mean > 0.0 ? std::sqrt(r.variance) / mean : 0.0;
    r.z = r.variance > 0.0 ? (static_cast<double>(observed) - mean) / std::sqrt(r.variance) : 0.0;
    r.pValue = (r.exceedances + 1.0) / (nSim + 1.0);
    return r;
}

} // namespace filamenta
