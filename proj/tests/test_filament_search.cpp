#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "filamenta/filament_search.hpp"
#include "filamenta/pfp_sim.hpp"
#include "oracles.hpp"

using namespace filamenta;

namespace {

const TriadParams kSearch = TriadParams::make(degToRad(15.0), 10.0);

PointSet mixture(double w, std::uint64_t seed) {
    Rng rng(seed);
    return simulateFixedTotal(697, w, SizeLaw::uniformInt(3, 8), {2, 10}, TurnLaw{}, Region::rect(150, 360), rng)
        .points;
}

void checkInvariants(const FilamentSet& set, const PointSet& pts, const TriadParams& params, const Metric& m) {
    std::set<std::size_t> seen;
    for (const auto& f : set.filaments) {
        CHECK(isValidFilament(f, params));
        REQUIRE(f.size() >= 3);
        CHECK(f.edgeLengths.size() == f.size() - 1);
        CHECK(f.interiorAngles.size() == f.size() - 2);
        std::set<std::size_t> own(f.pointIndices.begin(), f.pointIndices.end());
        CHECK(own.size() == f.size());
        for (std::size_t k = 0; k + 1 < f.size(); ++k) {
            CHECK(f.edgeLengths[k] == doctest::Approx(distance(m, pts[f.pointIndices[k]], pts[f.pointIndices[k + 1]])));
        }
        if (set.exclusive) {
            for (std::size_t i : f.pointIndices) {
                CHECK(seen.insert(i).second);
            }
        }
    }
}

std::set<std::vector<std::pair<double, double>>> asCoordinates(const FilamentSet& set, const PointSet& pts) {
    std::set<std::vector<std::pair<double, double>>> out;
    for (const auto& f : set.filaments) {
        std::vector<std::pair<double, double>> c;
        for (std::size_t i : f.pointIndices) c.emplace_back(pts[i].x, pts[i].y);
        if (c.back() < c.front()) {
            std::reverse(c.begin(), c.end());
        }
        out.insert(c);
    }
    return out;
}

} // namespace

TEST_CASE("collinear points form one filament") {
    PointSet pts;
    for (int i = 0; i < 8; ++i) pts.push_back({3.0 * i, 0.1 * (i % 2)});
    const Metric m = Metric::euclidean();
    for (bool exclusive : {false, true}) {
        const auto set = arcSearch(pts, kSearch, m, exclusive);
        REQUIRE(set.filaments.size() == 1);
        CHECK(set.filaments[0].size() == 8);
    }
    const auto mst = mstFilaments(pts, kSearch, m);
    REQUIRE(mst.filaments.size() == 1);
    CHECK(mst.filaments[0].size() == 8);
    CHECK(linearity(mst.filaments[0], pts, m) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("square corners have no filament") {
    const PointSet pts{{0, 0}, {5, 0}, {5, 5}, {0, 5}};
    CHECK(mstFilaments(pts, kSearch, Metric::euclidean()).filaments.empty());
    CHECK(arcSearch(pts, kSearch, Metric::euclidean()).filaments.empty());
}

TEST_CASE("gaps longer than d0 split a chain") {
    PointSet pts{{0, 0}, {4, 0}, {8, 0}, {20, 0}, {24, 0}, {28, 0}};
    const auto set = arcSearch(pts, kSearch, Metric::euclidean());
    REQUIRE(set.filaments.size() == 2);
    CHECK(set.filaments[0].size() == 3);
    CHECK(set.filaments[1].size() == 3);
}

TEST_CASE("spanning tree equals Kruskal") {
    Rng rng(31);
    for (int t = 0; t < 20; ++t) {
        const bool sphere = t % 2 == 1;
        const Region region = sphere ? Region::cap({10, 20}, 15) : Region::rect(30, 20);
        PointSet pts(10 + 7 * t);
        for (auto& p : pts) p = sampleUniform(region, rng);
        double expectTotal = 0;
        const auto expect = oracle::kruskal(pts, {sphere}, &expectTotal);
        const auto tree = minimumSpanningTree(pts, region.naturalMetric());
        std::vector<std::pair<std::size_t, std::size_t>> got;
        double total = 0;
        for (const auto& e : tree) {
            got.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
            total += e.weight;
        }
        std::sort(got.begin(), got.end());
        CHECK(got == expect);
        CHECK(total == doctest::Approx(expectTotal).epsilon(1e-9));
    }
}

TEST_CASE("search outputs satisfy filament invariants") {
    const Metric m = Metric::euclidean();
    for (double w : {0.0, 0.3, 0.7}) {
        const auto pts = mixture(w, 40 + static_cast<std::uint64_t>(w * 10));
        checkInvariants(arcSearch(pts, kSearch, m, false), pts, kSearch, m);
        checkInvariants(arcSearch(pts, kSearch, m, true), pts, kSearch, m);
        const auto mst = mstFilaments(pts, kSearch, m);
        checkInvariants(mst, pts, kSearch, m);
        checkInvariants(makeExclusive(pts, m, mst), pts, kSearch, m);
    }
    const Region band = Region::latLonBand(-62, 72);
    PFPParams p;
    Rng rng(2);
    const auto r = simulatePFP(p, band, rng);
    const Metric gc = band.naturalMetric();
    checkInvariants(arcSearch(r.points, kSearch, gc, true), r.points, kSearch, gc);
    checkInvariants(mstFilaments(r.points, kSearch, gc), r.points, kSearch, gc);
}

TEST_CASE("search results do not depend on point order or workers") {
    const Metric m = Metric::euclidean();
    const auto pts = mixture(0.5, 9);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    PointSet shuffled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];

    const auto a = arcSearch(pts, kSearch, m, false, 1);
    CHECK(asCoordinates(a, pts) == asCoordinates(arcSearch(shuffled, kSearch, m, false, 1), shuffled));
    CHECK(asCoordinates(mstFilaments(pts, kSearch, m), pts) ==
          asCoordinates(mstFilaments(shuffled, kSearch, m), shuffled));

    const auto b = arcSearch(pts, kSearch, m, false, 3);
    REQUIRE(a.filaments.size() == b.filaments.size());
    for (std::size_t i = 0; i < a.filaments.size(); ++i) {
        CHECK(a.filaments[i].pointIndices == b.filaments[i].pointIndices);
    }
}

TEST_CASE("rationalise removes sub-chains and joins at blunt junctions") {
    PointSet pts;
    for (int i = 0; i < 6; ++i) pts.push_back({3.0 * i, 0});
    const Metric m = Metric::euclidean();
    const auto set = rationalise(pts, kSearch, m, {{0, 1, 2}, {2, 3, 4, 5}, {1, 2, 3}, {4, 3, 2}, {0, 1}});
    REQUIRE(set.filaments.size() == 1);
    CHECK(set.filaments[0].size() == 6);
}

TEST_CASE("exclusive assignment keeps the longest chains") {
    PointSet pts;
    for (int i = 0; i < 7; ++i) pts.push_back({3.0 * i, 0});
    for (int i = 1; i < 4; ++i) pts.push_back({9.0 + 0.3 * i, 3.0 * i});
    const Metric m = Metric::euclidean();
    FilamentSet set;
    set.filaments.push_back(makeFilament(pts, m, {0, 1, 2, 3, 4, 5, 6}));
    set.filaments.push_back(makeFilament(pts, m, {3, 7, 8, 9}));
    const auto ex = makeExclusive(pts, m, set);
    CHECK(ex.exclusive);
    REQUIRE(ex.filaments.size() == 2);
    std::vector<std::size_t> sizes{ex.filaments[0].size(), ex.filaments[1].size()};
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{3, 7});
}

TEST_CASE("linearity measure") {
    const Metric m = Metric::euclidean();
    const PointSet pts{{0, 0}, {3, 4}, {6, 0}, {0, 0.0}};
    CHECK(linearity(makeFilament(pts, m, {0, 1, 2}), pts, m) == doctest::Approx(10.0 / 6.0));
    CHECK(std::isinf(linearity(makeFilament(pts, m, {0, 1, 3}), pts, m)));
}

TEST_CASE("linearity test: critical value and decision") {
    const Region region = Region::rect(150, 360);
    const auto pts = mixture(0.9, 3);
    std::vector<double> nulls;
    for (int i = 0; i < 99; ++i) nulls.push_back(1.001 + 0.00001 * i);
    const auto rep = linearityTest(pts, region, kSearch, nulls, 0.05);
    CHECK(rep.criticalValue == doctest::Approx(nulls[99 - 5]));
    CHECK(rep.nullMedians.size() == 99);
    CHECK(rep.median == doctest::Approx(1.0).epsilon(0.01));

    const auto simulated = linearityTest(pts, region, kSearch, 99, 0.05, Rng(4), 1);
    const auto again = linearityTest(pts, region, kSearch, 99, 0.05, Rng(4), 2);
    CHECK(simulated.nullMedians == again.nullMedians);
    CHECK(simulated.pValue > 0.0);
    CHECK(simulated.pValue <= 1.0);
    CHECK_THROWS(linearityTest(pts, region, kSearch, 50, 0.05, Rng(4), 1));
}

TEST_CASE("recovery metrics") {
    const std::vector<std::vector<std::size_t>> truth{{0, 1, 2, 3}, {4, 5, 6}};
    const PointSet pts(10);
    FilamentSet est;
    Filament f;
    f.pointIndices = {0, 1, 2, 7};
    est.filaments.push_back(f);
    const auto e = evaluate(truth, est, 10);
    CHECK(*e.captureRate == doctest::Approx(0.5));
    CHECK(*e.sensitivity == doctest::Approx(3.0 / 7.0));
    CHECK(*e.specificity == doctest::Approx(2.0 / 3.0));
    const auto none = evaluate({}, est, 10);
    CHECK_FALSE(none.captureRate.has_value());
    CHECK_FALSE(none.sensitivity.has_value());

    std::ostringstream os;
    writeFilamentsCsv(os, est);
    CHECK(os.str() == "filamentId,order,pointIndex\n0,0,0\n0,1,1\n0,2,2\n0,3,7\n");
}
