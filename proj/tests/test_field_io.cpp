#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "filamenta/error.hpp"
#include "filamenta/field.hpp"
#include "filamenta/point_io.hpp"

using namespace filamenta;

namespace {

GridField lattice(std::size_t rows, std::size_t cols, Rng& rng) {
    GridField g;
    g.rows = rows;
    g.cols = cols;
    for (std::size_t r = 0; r < rows; ++r) g.lat.push_back(-60.0 + 120.0 * r / (rows - 1));
    for (std::size_t c = 0; c < cols; ++c) g.lon.push_back(360.0 * c / cols);
    g.values.resize(rows * cols);
    for (auto& v : g.values) v = rng.uniform();
    return g;
}

PointSet bruteMinima(const GridField& g, bool cyclic) {
    PointSet out;
    for (std::size_t r = 1; r + 1 < g.rows; ++r) {
        for (std::size_t c = 0; c < g.cols; ++c) {
            if (!cyclic && (c == 0 || c + 1 == g.cols)) continue;
            bool ok = true;
            for (long dr = -1; dr <= 1; ++dr) {
                for (long dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    const long cc = (static_cast<long>(c) + dc + static_cast<long>(g.cols)) % static_cast<long>(g.cols);
                    ok = ok && g.at(r, c) < g.at(r + dr, cc);
                }
            }
            if (ok) out.push_back({cyclic ? normaliseLongitude(g.lon[c]) : g.lon[c], g.lat[r]});
        }
    }
    return out;
}

} // namespace

TEST_CASE("local minima equal a brute-force scan") {
    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
        const auto g = lattice(5 + t, 8 + 2 * t, rng);
        CHECK(localMinima(g, true) == bruteMinima(g, true));
        CHECK(localMinima(g, false) == bruteMinima(g, false));
    }
}

TEST_CASE("single pit and plateau") {
    GridField g;
    g.rows = 5;
    g.cols = 5;
    g.lat = {-2, -1, 0, 1, 2};
    g.lon = {0, 1, 2, 3, 4};
    g.values.assign(25, 1.0);
    CHECK(localMinima(g, false).empty());
    g.at(2, 3) = 0.0;
    const auto m = localMinima(g, false);
    REQUIRE(m.size() == 1);
    CHECK(m[0] == Point{3, 0});
    g.at(1, 1) = std::nan("");
    CHECK_THROWS_AS(localMinima(g, false), InvalidInput);
}

TEST_CASE("standardisation gives zero mean and unit variance per cell") {
    Rng rng(12);
    std::vector<GridField> reps;
    for (int k = 0; k < 40; ++k) {
        auto g = lattice(6, 9, rng);
        for (auto& v : g.values) v = 3.0 + 2.0 * v;
        reps.push_back(g);
    }
    for (auto& g : reps) g.values[7] = 5.0;
    const auto s = standardiseAcrossReplications(reps);
    REQUIRE(s.fields.size() == 40);
    CHECK(s.zeroVarianceCells == std::vector<std::size_t>{7});
    for (std::size_t cell = 0; cell < reps[0].values.size(); ++cell) {
        double mean = 0, ss = 0;
        for (const auto& f : s.fields) mean += f.values[cell];
        mean /= 40;
        for (const auto& f : s.fields) ss += (f.values[cell] - mean) * (f.values[cell] - mean);
        CHECK(mean == doctest::Approx(0.0).scale(1.0));
        CHECK(ss / 39 == doctest::Approx(cell == 7 ? 0.0 : 1.0).scale(1.0));
    }
    reps[3].rows = 7;
    CHECK_THROWS(standardiseAcrossReplications(reps));
}

TEST_CASE("latitude restriction is closed at both ends") {
    Rng rng(1);
    const auto g = lattice(13, 6, rng);
    const auto r = restrictLatitude(g, -50, 50);
    CHECK(r.lat.front() == doctest::Approx(-50));
    CHECK(r.lat.back() == doctest::Approx(50));
    CHECK(r.rows == 11);
    CHECK(r.values.size() == 11 * 6);
}

TEST_CASE("point CSV round trip and parse errors") {
    PointTable t{{{1.5, -2.25}, {0.1, 1e-17}, {-180, 90}}, std::vector<int>{0, -1, 3}, true};
    std::stringstream ss;
    writePointsCsv(ss, t);
    const auto back = readPointsCsv(ss);
    CHECK(back.points == t.points);
    CHECK(back.labels == t.labels);
    CHECK(back.lonLat);

    std::istringstream empty("");
    CHECK_THROWS_AS(readPointsCsv(empty), InvalidInput);
    std::istringstream bad("x,y\n1,2\n3,abc\n");
    try {
        readPointsCsv(bad, "pts.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK(formatReal(0.1) == "0.1");
}
