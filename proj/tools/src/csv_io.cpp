#include "csv_io.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace gmb::cli {

namespace {

double parse_double(const std::string& cell, const char* what, std::size_t line) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{})
        throw std::invalid_argument("line " + std::to_string(line) + ": cannot parse " +
                                    std::string(what) + " '" + cell + "'");
    return v;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string cell = line.substr(start, comma == std::string::npos
                                                  ? std::string::npos
                                                  : comma - start);
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
            cell.pop_back();
        cells.push_back(std::move(cell));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    if (res.ec != std::errc{})
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

void write_paths_csv(std::ostream& out, const std::vector<BridgePath>& paths) {
    out << "path_id,t,value,tau\n";
    for (const BridgePath& p : paths) {
        const std::string tau = format_double(p.tau);
        for (std::size_t k = 0; k < p.grid.size(); ++k)
            out << p.path_index << ',' << format_double(p.grid[k]) << ','
                << format_double(p.values[k]) << ',' << tau << '\n';
    }
}

std::vector<BridgePath> read_paths_csv(std::istream& in) {
    std::vector<BridgePath> paths;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_row(line);
        if (!header_seen) {
            if (cells.size() != 4 || cells[0] != "path_id")
                throw std::invalid_argument("line 1: expected header path_id,t,value,tau");
            header_seen = true;
            continue;
        }
        if (cells.size() != 4)
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 4 columns");
        std::uint64_t id = 0;
        {
            const auto res = std::from_chars(cells[0].data(),
                                             cells[0].data() + cells[0].size(), id);
            if (res.ec != std::errc{})
                throw std::invalid_argument("line " + std::to_string(line_no) +
                                            ": cannot parse path_id '" + cells[0] + "'");
        }
        const double t = parse_double(cells[1], "t", line_no);
        const double value = parse_double(cells[2], "value", line_no);
        const double tau = parse_double(cells[3], "tau", line_no);

        if (paths.empty() || paths.back().path_index != id) {
            paths.push_back({{}, {}, tau, 0, id});
        } else if (paths.back().tau != tau) {
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": tau changes within path " + cells[0]);
        }
        paths.back().grid.push_back(t);
        paths.back().values.push_back(value);
    }
    if (!header_seen)
        throw std::invalid_argument("empty path CSV");
    return paths;
}

std::vector<Observation> read_observations_csv(std::istream& in) {
    std::vector<Observation> obs;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_row(line);
        if (first) {
            first = false;
            if (!cells.empty() && cells[0] == "t") continue; // header
        }
        if (cells.size() != 2)
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 2 columns t,value");
        obs.push_back({parse_double(cells[0], "t", line_no),
                       parse_double(cells[1], "value", line_no)});
    }
    return obs;
}

} // namespace gmb::cli
