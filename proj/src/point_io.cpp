#include "filamenta/point_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "filamenta/error.hpp"

namespace filamenta {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> splitCsv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double toDouble(const std::string& s, const std::string& source, std::size_t line) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, v);
    if (s.empty() || res.ec != std::errc() || res.ptr != last) {
        throw ParseError(source, line, "not a number: '" + s + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError(source, line, "non-finite coordinate");
    }
    return v;
}

} // namespace

std::string formatReal(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

PointTable readPointsCsv(std::istream& in, const std::string& sourceName) {
    PointTable table;
    std::string line;
    std::size_t lineNo = 0;
    bool haveHeader = false;
    bool hasLabel = false;
    while (std::getline(in, line)) {
        ++lineNo;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = splitCsv(line);
        if (!haveHeader) {
            if (cells.size() < 2 || cells.size() > 3) {
                throw ParseError(sourceName, lineNo, "header must be x,y[,label] or lon,lat[,label]");
            }
            if (cells[0] == "x" && cells[1] == "y") {
                table.lonLat = false;
            } else if (cells[0] == "lon" && cells[1] == "lat") {
                table.lonLat = true;
            } else {
                throw ParseError(sourceName, lineNo, "header must be x,y[,label] or lon,lat[,label]");
            }
            if (cells.size() == 3) {
                if (cells[2] != "label") {
                    throw ParseError(sourceName, lineNo, "third column must be 'label'");
                }
                hasLabel = true;
                table.labels.emplace();
            }
            haveHeader = true;
            continue;
        }
        const std::size_t expected = hasLabel ? 3 : 2;
        if (cells.size() != expected) {
            throw ParseError(sourceName, lineNo,
                             "expected " + std::to_string(expected) + " fields, got " +
                                 std::to_string(cells.size()));
        }
        const Point p{toDouble(cells[0], sourceName, lineNo), toDouble(cells[1], sourceName, lineNo)};
        if (table.lonLat && (p.y < -90.0 || p.y > 90.0)) {
            throw ParseError(sourceName, lineNo, "latitude outside [-90, 90]");
        }
        table.points.push_back(p);
        if (hasLabel) {
            int label = 0;
            const auto& s = cells[2];
            const auto res = std::from_chars(s.data(), s.data() + s.size(), label);
            if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
                throw ParseError(sourceName, lineNo, "label must be an integer");
            }
            table.labels->push_back(label);
        }
    }
    if (!haveHeader) {
        throw InvalidInput(sourceName + ": empty points file");
    }
    return table;
}

PointTable readPointsCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open points file " + path);
    }
    return readPointsCsv(in, path);
}

void writePointsCsv(std::ostream& out, const PointTable& table) {
    out << (table.lonLat ? "lon,lat" : "x,y");
    if (table.labels) {
        out << ",label";
    }
    out << '\n';
    for (std::size_t i = 0; i < table.points.size(); ++i) {
        out << formatReal(table.points[i].x) << ',' << formatReal(table.points[i].y);
        if (table.labels) {
            out << ',' << (*table.labels)[i];
        }
        out << '\n';
    }
}

void writePointsCsv(const std::string& path, const PointTable& table) {
    std::ofstream out(path);
    if (!out) {
        throw InvalidInput("cannot write " + path);
    }
    writePointsCsv(out, table);
}

} // namespace filamenta
