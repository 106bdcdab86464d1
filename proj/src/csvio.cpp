#include "phasered/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace phasered {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_curve_csv(const std::string& path, const std::vector<double>& thetas,
                     const std::vector<State>& values) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    const std::size_t ncol = values.empty() ? 0 : values.front().size();
    out << "theta";
    for (std::size_t c = 0; c < ncol; ++c) out << ",c" << (c + 1);
    out << "\n";
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        out << format_g17(thetas[j]);
        for (std::size_t c = 0; c < ncol; ++c) out << "," << format_g17(values[j][c]);
        out << "\n";
    }
}

void write_timeseries_csv(const std::string& path, const std::string& header,
                          const std::vector<double>& times,
                          const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << header << "\n";
    for (std::size_t j = 0; j < times.size(); ++j) {
        out << format_g17(times[j]);
        for (const auto& col : columns) out << "," << format_g17(col[j]);
        out << "\n";
    }
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        // trim
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return cells;
}

}  // namespace

ControlSignal read_control_csv(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read control file " + path);
    std::string line;
    bool impulse_mode = false;
    bool header_seen = false;
    std::vector<double> times;
    std::vector<State> values;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        if (line[b] == '#') {
            if (line.find("#impulses") != std::string::npos) impulse_mode = true;
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // `t,u1,...` or `t,dx1,...`
            continue;
        }
        auto cells = split_csv_line(line);
        if ((int)cells.size() != dim + 1)
            throw ConfigError("control file line " + std::to_string(lineno) +
                              ": expected " + std::to_string(dim + 1) + " columns");
        State row(dim);
        double t = 0.0;
        try {
            t = std::stod(cells[0]);
            for (int c = 0; c < dim; ++c) row[c] = std::stod(cells[c + 1]);
        } catch (const std::exception&) {
            throw ConfigError("control file line " + std::to_string(lineno) +
                              ": bad number");
        }
        if (!times.empty() && !(t > times.back()))
            throw ConfigError("control file: times must be strictly increasing (line " +
                              std::to_string(lineno) + ")");
        times.push_back(t);
        values.push_back(std::move(row));
    }
    if (times.empty()) return ControlSignal::zero(dim);
    return impulse_mode ? ControlSignal::impulses(std::move(times), std::move(values))
                        : ControlSignal::piecewise_constant(std::move(times),
                                                            std::move(values));
}

}  // namespace phasered
