#include "filamenta/filament_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "filamenta/error.hpp"
#include "filamenta/neighbour_index.hpp"
#include "filamenta/parallel.hpp"

namespace filamenta {

namespace {

using Chain = std::vector<std::size_t>;

bool pointLess(Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// Lexicographic order on the coordinate sequence, index as last resort.
struct ChainLess {
    std::span<const Point> pts;
    bool operator()(const Chain& a, const Chain& b) const {
        const std::size_t m = std::min(a.size(), b.size());
        for (std::size_t k = 0; k < m; ++k) {
            const Point pa = pts[a[k]];
            const Point pb = pts[b[k]];
            if (pointLess(pa, pb)) {
                return true;
            }
            if (pointLess(pb, pa)) {
                return false;
            }
        }
        if (a.size() != b.size()) {
            return a.size() < b.size();
        }
        return a < b;
    }
};

void orient(Chain& c, std::span<const Point> pts) {
    const Point f = pts[c.front()];
    const Point b = pts[c.back()];
    if (pointLess(b, f) || (!pointLess(f, b) && c.back() < c.front())) {
        std::reverse(c.begin(), c.end());
    }
}

bool containsRun(const Chain& big, const Chain& small) {
    if (small.size() > big.size()) {
        return false;
    }
    auto fwd = std::search(big.begin(), big.end(), small.begin(), small.end());
    if (fwd != big.end()) {
        return true;
    }
    auto rev = std::search(big.begin(), big.end(), small.rbegin(), small.rend());
    return rev != big.end();
}

// Drops short chains, duplicates and contiguous runs of longer chains.
void prune(std::vector<Chain>& chains, std::span<const Point> pts, std::size_t nPoints,
           std::size_t minSize = 3) {
    std::erase_if(chains, [&](const Chain& c) { return c.size() < minSize; });
    for (auto& c : chains) {
        orient(c, pts);
    }
    std::sort(chains.begin(), chains.end(), [&](const Chain& a, const Chain& b) {
        if (a.size() != b.size()) {
            return a.size() > b.size();
        }
        return ChainLess{pts}(a, b);
    });
    chains.erase(std::unique(chains.begin(), chains.end()), chains.end());

    std::vector<std::vector<std::size_t>> holders(nPoints);
    std::vector<Chain> kept;
    for (auto& c : chains) {
        bool inside = false;
        for (std::size_t id : holders[c.front()]) {
            if (kept[id].size() > c.size() && containsRun(kept[id], c)) {
                inside = true;
                break;
            }
        }
        if (inside) {
            continue;
        }
        for (std::size_t p : c) {
            holders[p].push_back(kept.size());
        }
        kept.push_back(std::move(c));
    }
    chains = std::move(kept);
}

struct Join {
    std::size_t a;
    std::size_t b;
    Chain joined;
    double angle;
};

// Best junction between two chains sharing an end point, if any is blunt.
std::optional<Join> bestJoin(const std::vector<Chain>& chains, std::span<const Point> pts,
                             const Metric& metric, double threshold, std::size_t nPoints) {
    std::vector<std::vector<std::size_t>> atEnd(nPoints);
    for (std::size_t i = 0; i < chains.size(); ++i) {
        atEnd[chains[i].front()].push_back(i);
        atEnd[chains[i].back()].push_back(i);
    }
    std::optional<Join> best;
    std::vector<char> mark(nPoints, 0);
    const ChainLess less{pts};
    for (std::size_t e = 0; e < nPoints; ++e) {
        const auto& ids = atEnd[e];
        for (std::size_t x = 0; x < ids.size(); ++x) {
            for (std::size_t y = x + 1; y < ids.size(); ++y) {
                Chain a = chains[ids[x]];
                Chain b = chains[ids[y]];
                if (ids[x] == ids[y]) {
                    continue;
                }
                if (a.back() != e) {
                    std::reverse(a.begin(), a.end());
                }
                if (b.front() != e) {
                    std::reverse(b.begin(), b.end());
                }
                const double ang = angleAt(metric, pts[e], pts[a[a.size() - 2]], pts[b[1]]);
                if (!(ang >= threshold)) {
                    continue;
                }
                for (std::size_t p : a) {
                    mark[p] = 1;
                }
                bool distinct = true;
                for (std::size_t k = 1; k < b.size(); ++k) {
                    if (mark[b[k]]) {
                        distinct = false;
                        break;
                    }
                }
                for (std::size_t p : a) {
                    mark[p] = 0;
                }
                if (!distinct) {
                    continue;
                }
                Chain joined = a;
                joined.insert(joined.end(), b.begin() + 1, b.end());
                orient(joined, pts);
                if (!best || ang > best->angle || (ang == best->angle && less(joined, best->joined))) {
                    best = Join{ids[x], ids[y], std::move(joined), ang};
                }
            }
        }
    }
    return best;
}

double chainLinearity(const Chain& c, std::span<const Point> pts, const Metric& metric) {
    double sum = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        sum += distance(metric, pts[c[k - 1]], pts[c[k]]);
    }
    const double ends = distance(metric, pts[c.front()], pts[c.back()]);
    return ends > 0.0 ? sum / ends : std::numeric_limits<double>::infinity();
}

double medianOf(std::vector<double> v) {
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    if (v.size() % 2 == 1) {
        return v[m];
    }
    if (std::isinf(v[m - 1]) || std::isinf(v[m])) {
        return v[m];
    }
    return 0.5 * (v[m - 1] + v[m]);
}

FilamentSet toSet(std::span<const Point> pts, const Metric& metric, std::vector<Chain> chains) {
    std::sort(chains.begin(), chains.end(), ChainLess{pts});
    FilamentSet set;
    set.filaments.reserve(chains.size());
    for (auto& c : chains) {
        set.filaments.push_back(makeFilament(pts, metric, std::move(c)));
    }
    return set;
}

// Next point beyond `end` for a chain arriving from `prev`.
std::optional<std::size_t> extendFrom(const NeighbourIndex& index, std::span<const Point> pts,
                                      const Metric& metric, double threshold, const Chain& chain,
                                      std::size_t prev, std::size_t end) {
    std::optional<std::size_t> pick;
    double bestOffset = std::numeric_limits<double>::infinity();
    for (const auto& nb : index.neighbours(end, /*strict=*/false)) {
        if (!(nb.distance > 0.0) || std::find(chain.begin(), chain.end(), nb.index) != chain.end()) {
            continue;
        }
        const double ang = angleAt(metric, pts[end], pts[prev], pts[nb.index]);
        if (!(ang >= threshold)) {
            continue;
        }
        const double offset = nb.distance * std::sin(kPi - ang);
        if (offset < bestOffset) {
            bestOffset = offset;
            pick = nb.index;
        }
    }
    return pick;
}

// Chains shorter than minJoinSize are dropped before joining, the rest
// after it.
FilamentSet joinAndPrune(std::span<const Point> points, const TriadParams& params,
                         const Metric& metric, std::vector<Chain> chains, std::size_t minJoinSize) {
    const double threshold = kPi - params.epsilon;
    prune(chains, points, points.size(), minJoinSize);
    while (auto join = bestJoin(chains, points, metric, threshold, points.size())) {
        chains[join->a] = std::move(join->joined);
        chains.erase(chains.begin() + static_cast<std::ptrdiff_t>(join->b));
        prune(chains, points, points.size(), minJoinSize);
    }
    prune(chains, points, points.size());
    return toSet(points, metric, std::move(chains));
}

} // namespace

std::vector<std::size_t> FilamentSet::coveredPoints() const {
    std::vector<std::size_t> out;
    for (const auto& f : filaments) {
        out.insert(out.end(), f.pointIndices.begin(), f.pointIndices.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Filament makeFilament(std::span<const Point> points, const Metric& metric,
                      std::vector<std::size_t> indices) {
    Filament f;
    f.pointIndices = std::move(indices);
    const auto& c = f.pointIndices;
    for (std::size_t k = 1; k < c.size(); ++k) {
        f.edgeLengths.push_back(distance(metric, points[c[k - 1]], points[c[k]]));
    }
    for (std::size_t k = 1; k + 1 < c.size(); ++k) {
        f.interiorAngles.push_back(angleAt(metric, points[c[k]], points[c[k - 1]], points[c[k + 1]]));
    }
    return f;
}

bool isValidFilament(const Filament& f, const TriadParams& params) {
    if (f.size() < 3 || f.edgeLengths.size() + 1 != f.size() ||
        f.interiorAngles.size() + 2 != f.size()) {
        return false;
    }
    Chain sorted = f.pointIndices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        return false;
    }
    for (double e : f.edgeLengths) {
        if (!(e > 0.0) || !(e <= params.d0)) {
            return false;
        }
    }
    for (double a : f.interiorAngles) {
        if (!(a >= kPi - params.epsilon)) {
            return false;
        }
    }
    return true;
}

FilamentSet rationalise(std::span<const Point> points, const TriadParams& params,
                        const Metric& metric, std::vector<std::vector<std::size_t>> chains) {
    return joinAndPrune(points, params, metric, std::move(chains), 3);
}

FilamentSet makeExclusive(std::span<const Point> points, const Metric& metric,
                          const FilamentSet& set) {
    std::vector<std::size_t> order(set.filaments.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> lin(set.filaments.size());
    for (std::size_t i = 0; i < lin.size(); ++i) {
        lin[i] = chainLinearity(set.filaments[i].pointIndices, points, metric);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto sa = set.filaments[a].size();
        const auto sb = set.filaments[b].size();
        if (sa != sb) {
            return sa > sb;
        }
        return lin[a] < lin[b];
    });
    std::vector<char> claimed(points.size(), 0);
    std::vector<Chain> kept;
    for (std::size_t id : order) {
        Chain run;
        auto flush = [&] {
            if (run.size() >= 3) {
                for (std::size_t p : run) {
                    claimed[p] = 1;
                }
                kept.push_back(run);
            }
            run.clear();
        };
        for (std::size_t p : set.filaments[id].pointIndices) {
            if (claimed[p]) {
                flush();
            } else {
                run.push_back(p);
            }
        }
        flush();
    }
    for (auto& c : kept) {
        orient(c, points);
    }
    FilamentSet out = toSet(points, metric, std::move(kept));
    out.exclusive = true;
    out.warnings = set.warnings;
    return out;
}

FilamentSet arcSearch(std::span<const Point> points, const TriadParams& params,
                      const Metric& metric, bool exclusive, unsigned workers) {
    params.validate();
    if (points.size() < 3) {
        FilamentSet empty;
        empty.exclusive = exclusive;
        return empty;
    }
    const NeighbourIndex index(points, metric, params.d0);
    const double threshold = kPi - params.epsilon;
    std::vector<Chain> raw(points.size());
    parallelFor(points.size(), workers, [&](std::size_t s) {
        std::optional<std::size_t> nearest;
        double bestDist = std::numeric_limits<double>::infinity();
        for (const auto& nb : index.neighbours(s, /*strict=*/false)) {
            if (nb.distance > 0.0 && nb.distance < bestDist) {
                bestDist = nb.distance;
                nearest = nb.index;
            }
        }
        if (!nearest) {
            return;
        }
        Chain chain{s, *nearest};
        while (auto next = extendFrom(index, points, metric, threshold, chain,
                                      chain[chain.size() - 2], chain.back())) {
            chain.push_back(*next);
        }
        std::reverse(chain.begin(), chain.end());
        while (auto next = extendFrom(index, points, metric, threshold, chain,
                                      chain[chain.size() - 2], chain.back())) {
            chain.push_back(*next);
        }
        if (chain.size() >= 3) {
            raw[s] = std::move(chain);
        }
    });
    std::erase_if(raw, [](const Chain& c) { return c.empty(); });
    FilamentSet set = rationalise(points, params, metric, std::move(raw));
    return exclusive ? makeExclusive(points, metric, set) : set;
}

std::vector<TreeEdge> minimumSpanningTree(std::span<const Point> points, const Metric& metric) {
    const std::size_t n = points.size();
    std::vector<TreeEdge> edges;
    if (n < 2) {
        return edges;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(n, inf);
    std::vector<std::size_t> from(n, 0);
    std::vector<char> inTree(n, 0);
    std::size_t cur = 0;
    inTree[0] = 1;
    edges.reserve(n - 1);
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        double nextW = inf;
        for (std::size_t j = 0; j < n; ++j) {
            if (inTree[j]) {
                continue;
            }
            const double d = distance(metric, points[cur], points[j]);
            if (d < best[j]) {
                best[j] = d;
                from[j] = cur;
            }
            if (next == n || best[j] < nextW) {
                nextW = best[j];
                next = j;
            }
        }
        inTree[next] = 1;
        edges.push_back({std::min(from[next], next), std::max(from[next], next), nextW});
        cur = next;
    }
    return edges;
}

FilamentSet mstFilaments(std::span<const Point> points, const TriadParams& params,
                         const Metric& metric) {
    params.validate();
    if (points.size() < 3) {
        return {};
    }
    const std::size_t n = points.size();
    const auto edges = minimumSpanningTree(points, metric);
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    const double threshold = kPi - params.epsilon;

    std::vector<Chain> paths;
    for (std::size_t v = 0; v < n; ++v) {
        if (adj[v].size() == 2) {
            continue;
        }
        for (std::size_t w : adj[v]) {
            Chain path{v, w};
            while (adj[path.back()].size() == 2) {
                const std::size_t last = path.back();
                const std::size_t prev = path[path.size() - 2];
                path.push_back(adj[last][0] == prev ? adj[last][1] : adj[last][0]);
            }
            if (path.front() < path.back()) {
                paths.push_back(std::move(path));
            }
        }
    }

    std::vector<Chain> runs;
    for (const auto& path : paths) {
        Chain run{path[0]};
        auto flush = [&] {
            if (run.size() >= 2) {
                runs.push_back(run);
            }
        };
        for (std::size_t k = 1; k < path.size(); ++k) {
            const std::size_t v = path[k];
            const double len = distance(metric, points[run.back()], points[v]);
            if (!(len > 0.0 && len <= params.d0)) {
                flush();
                run = {v};
                continue;
            }
            if (run.size() >= 2 &&
                !(angleAt(metric, points[run.back()], points[run[run.size() - 2]], points[v]) >=
                  threshold)) {
                flush();
                run = {run.back(), v};
                continue;
            }
            run.push_back(v);
        }
        flush();
    }
    return joinAndPrune(points, params, metric, std::move(runs), 2);
}

double linearity(const Filament& f, std::span<const Point> points, const Metric& metric) {
    if (f.size() < 2) {
        throw InvalidInput("linearity needs at least two points");
    }
    return chainLinearity(f.pointIndices, points, metric);
}

std::vector<double> linearityNullMedians(std::size_t n, const Region& region,
                                         const TriadParams& params, std::size_t nSim,
                                         const Rng& rng, unsigned workers) {
    const Metric metric = region.naturalMetric();
    std::vector<double> medians(nSim);
    parallelFor(nSim, workers, [&](std::size_t s) {
        Rng r = rng.child(s);
        PointSet pts(n);
        for (auto& p : pts) {
            p = sampleUniform(region, r);
        }
        const auto set = arcSearch(pts, params, metric);
        std::vector<double> lin;
        for (const auto& f : set.filaments) {
            lin.push_back(linearity(f, pts, metric));
        }
        medians[s] = medianOf(std::move(lin));
    });
    std::erase_if(medians, [](double m) { return std::isnan(m); });
    return medians;
}

LinearityReport linearityTest(std::span<const Point> points, const Region& region,
                              const TriadParams& params, std::vector<double> nullMedians,
                              double sigLevel) {
    if (!(sigLevel > 0.0 && sigLevel < 1.0)) {
        throw InvalidInput("significance level must lie in (0, 1)");
    }
    if (nullMedians.empty()) {
        throw InvalidInput("null distribution is empty");
    }
    const Metric metric = region.naturalMetric();
    LinearityReport rep;
    std::sort(nullMedians.begin(), nullMedians.end());
    const std::size_t n = nullMedians.size();
    const auto k = static_cast<std::size_t>(std::floor(sigLevel * static_cast<double>(n + 1)));
    rep.criticalValue = k >= 1 && k <= n ? nullMedians[n - k] : std::numeric_limits<double>::infinity();
    rep.nullMedians = std::move(nullMedians);

    const auto set = arcSearch(points, params, metric);
    for (const auto& f : set.filaments) {
        rep.perFilament.push_back(linearity(f, points, metric));
    }
    if (rep.perFilament.empty()) {
        rep.inconclusive = true;
        rep.median = std::numeric_limits<double>::quiet_NaN();
        rep.warnings.push_back("no filaments found in the observed pattern; test inconclusive");
        return rep;
    }
    rep.median = medianOf(rep.perFilament);
    const auto r = static_cast<double>(std::count_if(rep.nullMedians.begin(), rep.nullMedians.end(),
                                                     [&](double m) { return m >= rep.median; }));
    rep.pValue = (r + 1.0) / (static_cast<double>(n) + 1.0);
    rep.decision = rep.pValue <= sigLevel;
    return rep;
}

LinearityReport linearityTest(std::span<const Point> points, const Region& region,
                              const TriadParams& params, std::size_t nullSims, double sigLevel,
                              const Rng& rng, unsigned workers) {
    if (nullSims < 99) {
        throw InvalidInput("linearity test needs at least 99 null simulations");
    }
    auto nulls = linearityNullMedians(points.size(), region, params, nullSims, rng, workers);
    auto rep = linearityTest(points, region, params, std::move(nulls), sigLevel);
    if (rep.nullMedians.size() < nullSims) {
        rep.warnings.push_back(std::to_string(nullSims - rep.nullMedians.size()) +
                               " null patterns had no filaments and were omitted");
    }
    return rep;
}

EvalMetrics evaluate(const std::vector<std::vector<std::size_t>>& truth,
                     const FilamentSet& estimate, std::size_t nPoints) {
    std::vector<std::vector<std::size_t>> holders(nPoints);
    std::vector<char> onEstimate(nPoints, 0);
    for (std::size_t id = 0; id < estimate.filaments.size(); ++id) {
        for (std::size_t p : estimate.filaments[id].pointIndices) {
            if (p >= nPoints) {
                throw InvalidInput("estimated filament index out of range");
            }
            holders[p].push_back(id);
            onEstimate[p] = 1;
        }
    }
    std::vector<char> onTruth(nPoints, 0);
    std::size_t captured = 0;
    for (const auto& t : truth) {
        std::unordered_map<std::size_t, std::size_t> tally;
        for (std::size_t p : t) {
            if (p >= nPoints) {
                throw InvalidInput("true filament index out of range");
            }
            onTruth[p] = 1;
            for (std::size_t id : holders[p]) {
                ++tally[id];
            }
        }
        for (const auto& [id, count] : tally) {
            if (2 * count > t.size()) {
                ++captured;
                break;
            }
        }
    }
    EvalMetrics m;
    if (!truth.empty()) {
        m.captureRate = static_cast<double>(captured) / static_cast<double>(truth.size());
    }
    std::size_t truthPts = 0, hit = 0, otherPts = 0, clear = 0;
    for (std::size_t p = 0; p < nPoints; ++p) {
        if (onTruth[p]) {
            ++truthPts;
            hit += onEstimate[p];
        } else {
            ++otherPts;
            clear += !onEstimate[p];
        }
    }
    if (truthPts > 0) {
        m.sensitivity = static_cast<double>(hit) / static_cast<double>(truthPts);
    }
    if (otherPts > 0) {
        m.specificity = static_cast<double>(clear) / static_cast<double>(otherPts);
    }
    return m;
}

void writeFilamentsCsv(std::ostream& out, const FilamentSet& set) {
    out << "filamentId,order,pointIndex\n";
    for (std::size_t id = 0; id < set.filaments.size(); ++id) {
        const auto& idx = set.filaments[id].pointIndices;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            out << id << ',' << k << ',' << idx[k] << '\n';
        }
    }
}

} // namespace filamenta
