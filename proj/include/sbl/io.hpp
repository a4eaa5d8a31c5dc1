#pragma once

/// @file io.hpp
/// @brief Deterministic text output: field snapshots and tabular CSV with
///        fixed %.17g formatting, plus JSON report helpers. Identical inputs
///        must produce byte-identical files, so all formatting goes through
///        one snprintf path and no locale-dependent stream state.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbl/field.hpp"

namespace sbl {

using ordered_json = nlohmann::ordered_json;

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Streaming CSV writer; one header row then data rows, '\n' line ends.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path,
              const std::vector<std::string>& header) {
        if (path.has_parent_path())
            std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::binary);
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        write_cells(header);
    }

    void row(const std::vector<std::string>& cells) { write_cells(cells); }

    void row_values(const std::vector<double>& vals) {
        std::vector<std::string> cells;
        cells.reserve(vals.size());
        for (double v : vals) cells.push_back(fmt_g17(v));
        write_cells(cells);
    }

  private:
    void write_cells(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out_ << ',';
            out_ << cells[k];
        }
        out_ << '\n';
    }
    std::ofstream out_;
};

/// Snapshot of a scalar field: header omega,R,r,value then omega-major rows.
inline void write_snapshot(const std::filesystem::path& path, const Field& f) {
    CsvWriter csv(path, {"omega", "R", "r", "value"});
    const auto& g = *f.grid();
    for (std::size_t i = 0; i < g.n_omega(); ++i)
        for (std::size_t j = 0; j < g.n_R(); ++j)
            csv.row_values({g.omega(i), g.R(j), g.r(j), f(i, j)});
}

struct SnapshotData {
    std::vector<double> omega, R, r, value;
};

/// Read back a snapshot written by write_snapshot (used by round-trip tests).
inline SnapshotData read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "omega,R,r,value")
        throw std::runtime_error("bad snapshot header in " + path.string());
    SnapshotData d;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double a, b, c, v;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &a, &b, &c, &v) != 4)
            throw std::runtime_error("bad snapshot row: " + line);
        d.omega.push_back(a);
        d.R.push_back(b);
        d.r.push_back(c);
        d.value.push_back(v);
    }
    return d;
}

inline void write_json(const std::filesystem::path& path,
                       const ordered_json& j) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace sbl
