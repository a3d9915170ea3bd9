#include "filamenta/field.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "filamenta/error.hpp"

namespace filamenta {

PointSet localMinima(const GridField& grid, bool cyclicLongitude) {
    if (grid.rows < 3 || grid.cols < 3) {
        throw InvalidInput("localMinima needs a grid of at least 3x3");
    }
    if (grid.values.size() != grid.rows * grid.cols || grid.lat.size() != grid.rows ||
        grid.lon.size() != grid.cols) {
        throw InvalidInput("grid values and axes disagree in shape");
    }
    for (double v : grid.values) {
        if (std::isnan(v)) {
            throw InvalidInput("grid contains NaN cells");
        }
    }
    PointSet minima;
    const std::size_t c0 = cyclicLongitude ? 0 : 1;
    const std::size_t c1 = cyclicLongitude ? grid.cols : grid.cols - 1;
    for (std::size_t r = 1; r + 1 < grid.rows; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
            const double v = grid.at(r, c);
            bool lowest = true;
            for (int dr = -1; dr <= 1 && lowest; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) {
                        continue;
                    }
                    const std::size_t rr = r + dr;
                    const std::size_t cc = (c + grid.cols + dc) % grid.cols;
                    if (!(v < grid.at(rr, cc))) {
                        lowest = false;
                        break;
                    }
                }
            }
            if (lowest) {
                minima.push_back({cyclicLongitude ? normaliseLongitude(grid.lon[c]) : grid.lon[c],
                                  grid.lat[r]});
            }
        }
    }
    return minima;
}

StandardisedFields standardiseAcrossReplications(std::span<const GridField> fields) {
    if (fields.size() < 2) {
        throw InvalidInput("standardisation needs at least two replications");
    }
    const GridField& first = fields.front();
    for (const auto& f : fields) {
        if (f.rows != first.rows || f.cols != first.cols || f.values.size() != first.values.size()) {
            throw InvalidInput("replications have inconsistent grid shapes");
        }
    }
    StandardisedFields out;
    out.fields.assign(fields.begin(), fields.end());
    const std::size_t cells = first.values.size();
    const double n = static_cast<double>(fields.size());
    for (std::size_t i = 0; i < cells; ++i) {
        double mean = 0.0;
        for (const auto& f : fields) {
            mean += f.values[i];
        }
        mean /= n;
        double ss = 0.0;
        for (const auto& f : fields) {
            ss += (f.values[i] - mean) * (f.values[i] - mean);
        }
        const double sd = std::sqrt(ss / (n - 1.0));
        if (!(sd > 0.0)) {
            out.zeroVarianceCells.push_back(i);
            for (auto& f : out.fields) {
                f.values[i] = 0.0;
            }
            continue;
        }
        for (std::size_t k = 0; k < fields.size(); ++k) {
            out.fields[k].values[i] = (fields[k].values[i] - mean) / sd;
        }
    }
    if (!out.zeroVarianceCells.empty()) {
        out.warnings.push_back(std::to_string(out.zeroVarianceCells.size()) +
                               " cell(s) have zero variance across replications; set to 0");
    }
    return out;
}

GridField restrictLatitude(const GridField& grid, double latMin, double latMax) {
    GridField out;
    out.cols = grid.cols;
    out.lon = grid.lon;
    for (std::size_t r = 0; r < grid.rows; ++r) {
        if (grid.lat[r] >= latMin && grid.lat[r] <= latMax) {
            out.lat.push_back(grid.lat[r]);
            out.values.insert(out.values.end(), grid.values.begin() + r * grid.cols,
                              grid.values.begin() + (r + 1) * grid.cols);
        }
    }
    out.rows = out.lat.size();
    return out;
}

namespace {

double parseNumber(const std::string& token, const std::string& source, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ParseError(source, line, "not a number: '" + token + "'");
    }
    while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) {
        ++used;
    }
    if (used != token.size()) {
        throw ParseError(source, line, "trailing characters in '" + token + "'");
    }
    return v;
}

} // namespace

GridField readGridCsv(const std::string& valuesCsv, const std::string& axisCsv) {
    GridField g;
    {
        std::ifstream in(axisCsv);
        if (!in) {
            throw InvalidInput("cannot open axis file " + axisCsv);
        }
        std::string line;
        std::size_t lineNo = 0;
        while (std::getline(in, line)) {
            ++lineNo;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty() || (lineNo == 1 && line.rfind("axis", 0) == 0)) {
                continue;
            }
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                throw ParseError(axisCsv, lineNo, "expected 'axis,value'");
            }
            const std::string axis = line.substr(0, comma);
            const double v = parseNumber(line.substr(comma + 1), axisCsv, lineNo);
            if (axis == "lat") {
                g.lat.push_back(v);
            } else if (axis == "lon") {
                g.lon.push_back(v);
            } else {
                throw ParseError(axisCsv, lineNo, "unknown axis '" + axis + "'");
            }
        }
    }
    std::ifstream in(valuesCsv);
    if (!in) {
        throw InvalidInput("cannot open grid file " + valuesCsv);
    }
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            g.values.push_back(parseNumber(cell, valuesCsv, lineNo));
            ++count;
        }
        if (g.cols == 0) {
            g.cols = count;
        } else if (count != g.cols) {
            throw ParseError(valuesCsv, lineNo, "row has " + std::to_string(count) +
                                                    " values, expected " + std::to_string(g.cols));
        }
        ++g.rows;
    }
    if (g.rows != g.lat.size() || g.cols != g.lon.size()) {
        throw InvalidInput("grid " + valuesCsv + " is " + std::to_string(g.rows) + "x" +
                           std::to_string(g.cols) + " but axes give " + std::to_string(g.lat.size()) +
                           "x" + std::to_string(g.lon.size()));
    }
    return g;
}

} // namespace filamenta
