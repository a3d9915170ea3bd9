#include <doctest.h>

#include <json.hpp>

#include "bundle.hpp"
#include "filamenta/commands.hpp"
#include "filamenta/point_io.hpp"

using namespace filamenta;
using bundle::TempDir;
using nlohmann::json;

namespace {

json readJson(const std::string& path) { return json::parse(bundle::slurp(path)); }

const char* kRect = R"("region": {"type": "rect", "width": 150, "height": 360})";

} // namespace

TEST_CASE("simulate: mixture preset and ground truth") {
    TempDir d("sim");
    const auto cfg = d.write("sim.json", R"({"preset": "mixture", "w": 0.0})");
    const auto r = bundle::run("simulate", cfg, 11, d / "out");
    REQUIRE(r.code == kExitOk);
    const auto pts = readPointsCsv(d / "out/points.csv");
    CHECK(pts.points.size() == 697);
    CHECK(readJson(d / "out/truth.json")["filaments"].empty());

    const auto cfg5 = d.write("sim5.json", R"({"preset": "mixture"})");
    REQUIRE(bundle::run("simulate", cfg5, 11, d / "a").code == kExitOk);
    REQUIRE(bundle::run("simulate", cfg5, 11, d / "b").code == kExitOk);
    CHECK(bundle::contents(d.path() / "a") == bundle::contents(d.path() / "b"));
    const auto manifest = readJson(d / "a/manifest.json");
    CHECK(manifest["seed"] == 11);
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["configHash"].get<std::string>().size() == 16);
    CHECK_FALSE(manifest.contains("workers"));
    CHECK(readJson(d / "a/timing.json").contains("wallSeconds"));
}

TEST_CASE("validation failures exit non-zero and still write a manifest") {
    TempDir d("bad");
    const auto unknown = d.write("u.json", R"({"model": "poisson", "n": 5, "colour": 1, )" + std::string(kRect) + "}");
    auto r = bundle::run("simulate", unknown, 1, d / "u");
    CHECK(r.code == kExitInvalid);
    CHECK(r.err.find("colour") != std::string::npos);
    CHECK(readJson(d / "u/manifest.json")["exitCode"] == kExitInvalid);

    const auto ok = d.write("ok.json", R"({"model": "poisson", "n": 5, )" + std::string(kRect) + "}");
    r = bundle::run("simulate", ok, std::nullopt, d / "noseed");
    CHECK(r.code == kExitInvalid);
    CHECK(r.err.find("--seed") != std::string::npos);

    d.write("empty.csv", "");
    const auto diag = d.write("diag.json", R"({"points": "empty.csv", )" + std::string(kRect) + "}");
    CHECK(bundle::run("diagnose", diag, 1, d / "diag").code == kExitInvalid);

    d.write("broken.csv", "x,y\n1,2\n3,oops\n");
    const auto diag2 = d.write("diag2.json", R"({"points": "broken.csv", )" + std::string(kRect) + "}");
    r = bundle::run("diagnose", diag2, 1, d / "diag2");
    CHECK(r.code == kExitInvalid);
    CHECK(r.err.find(":3:") != std::string::npos);

    const auto syntax = d.write("syntax.json", "{\"model\": ");
    CHECK(bundle::run("simulate", syntax, 1, d / "s").code == kExitInvalid);
    CHECK(bundle::run("nonsense", ok, 1, d / "n").code == kExitInvalid);
}

TEST_CASE("search: fixtures") {
    TempDir d("search");
    d.write("line.csv", "x,y\n0,0\n3,0.1\n6,0\n9,0.1\n12,0\n");
    d.write("square.csv", "x,y\n0,0\n5,0\n5,5\n0,5\n");
    const auto as = d.write("as.json", R"({"points": "line.csv", "method": "as", )" + std::string(kRect) + "}");
    REQUIRE(bundle::run("search", as, std::nullopt, d / "as").code == kExitOk);
    CHECK(readJson(d / "as/filaments.json")["nFilaments"] == 1);
    const auto mst = d.write("mst.json", R"({"points": "square.csv", "method": "mst", )" + std::string(kRect) + "}");
    REQUIRE(bundle::run("search", mst, std::nullopt, d / "mst").code == kExitOk);
    CHECK(readJson(d / "mst/filaments.json")["nFilaments"] == 0);
    CHECK(bundle::slurp(d / "mst/filaments.csv") == "filamentId,order,pointIndex\n");
}

TEST_CASE("abc: zero acceptances exit with a diagnostic") {
    TempDir d("abc");
    const auto sim = d.write("sim.json", R"({"preset": "mixture", "w": 0.3})");
    REQUIRE(bundle::run("simulate", sim, 3, d / "sim").code == kExitOk);
    const auto cfg = d.write("abc.json", R"({"points": "sim/points.csv", )" + std::string(kRect) +
                                             R"(, "abc": {"iterations": 4, "threshold": 1e-9}})");
    const auto r = bundle::run("abc", cfg, 5, d / "abc");
    CHECK(r.code == kExitNoAccepted);
    CHECK(r.err.find("no ABC draws accepted") != std::string::npos);
    CHECK(readJson(d / "abc/posterior.json")["accepted"] == 0);
}

TEST_CASE("ingest: closed disc and grid minima") {
    TempDir d("ingest");
    d.write("cat.csv", "lon,lat\n10.0,0\n0,10.0\n10.001,0\n-5,-5\n355,0\n");
    const auto cat = d.write("cat.json", R"({"source": "catalogue", "catalogue": {"file": "cat.csv", "center": [0, 0], "radius": 10}})");
    REQUIRE(bundle::run("ingest", cat, std::nullopt, d / "cat").code == kExitOk);
    const auto kept = readPointsCsv(d / "cat/points.csv");
    CHECK(kept.points.size() == 4);

    d.write("axis.csv", "axis,value\nlat,-2\nlat,-1\nlat,0\nlat,1\nlat,2\nlon,0\nlon,1\nlon,2\nlon,3\nlon,4\n");
    // Every cell runs 1, 2, 1 across replications except the centre (0, 1, 5),
    // which standardises lower in the first replication.
    auto field = [](const char* cell, const char* centre) {
        std::string out;
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 5; ++c) out += (c ? "," : "") + std::string(r == 2 && c == 2 ? centre : cell);
            out += "\n";
        }
        return out;
    };
    d.write("g0.csv", field("1", "0"));
    d.write("g1.csv", field("2", "1"));
    d.write("g2.csv", field("1", "5"));
    const auto grid = d.write("grid.json", R"({"source": "grid", "grid": {"axis": "axis.csv", "replications": ["g0.csv", "g1.csv", "g2.csv"], "select": 0, "cyclic": false}})");
    const auto r = bundle::run("ingest", grid, std::nullopt, d / "grid");
    REQUIRE(r.code == kExitOk);
    CHECK(readPointsCsv(d / "grid/points_0.csv").points.size() == 1);

    d.write("g3.csv", "1,1,1\n1,0,1\n1,1,1\n");
    const auto mismatch = d.write("mm.json", R"({"source": "grid", "grid": {"axis": "axis.csv", "replications": ["g0.csv", "g3.csv"]}})");
    CHECK(bundle::run("ingest", mismatch, std::nullopt, d / "mm").code == kExitInvalid);
}

TEST_CASE("reproduce: theory table") {
    TempDir d("repro");
    const auto cfg = d.write("t1.json", R"({"table": "t1"})");
    const auto r = bundle::run("reproduce", cfg, 1, d / "t1");
    CHECK(r.code == kExitOk);
    const auto rep = readJson(d / "t1/reproduce_t1.json");
    CHECK(rep["rows"].size() == 24);
    CHECK(rep["pass"] == true);
    const auto bad = d.write("bad.json", R"({"table": "t9"})");
    CHECK(bundle::run("reproduce", bad, 1, d / "bad").code == kExitInvalid);
    const auto scale = d.write("scale.json", R"({"table": "t1", "scale": 0})");
    CHECK(bundle::run("reproduce", scale, 1, d / "scale").code == kExitInvalid);
}

TEST_CASE("bundles are byte-identical across worker counts") {
    TempDir d("workers");
    const auto sim = d.write("sim.json", R"({"preset": "mixture", "w": 0.4})");
    REQUIRE(bundle::run("simulate", sim, 21, d / "sim").code == kExitOk);
    const std::string base = R"("points": "sim/points.csv", )" + std::string(kRect);
    const auto diag = d.write("diag.json", "{" + base + R"(, "triad": {"epsilonDeg": 15, "d0": 10}, "nSim": 99, "nPairs": 20000})");
    const auto search = d.write("search.json", "{" + base + R"(, "exclusive": true, "linearityTest": {"nullSims": 99}})");
    const auto abc = d.write("abc.json", "{" + base + R"(, "abc": {"iterations": 12, "threshold": 0.8}})");
    for (const auto& [cmd, cfg] : {std::pair{"diagnose", diag}, {"search", search}, {"abc", abc}}) {
        const auto one = bundle::run(cmd, cfg, 5, d / (std::string(cmd) + "1"), 1);
        const auto three = bundle::run(cmd, cfg, 5, d / (std::string(cmd) + "3"), 3);
        CHECK(one.code == three.code);
        CHECK(bundle::contents(d.path() / (std::string(cmd) + "1")) == bundle::contents(d.path() / (std::string(cmd) + "3")));
    }
}

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}
