#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "impc/sim.hpp"

namespace impc {

// Fixed trajectory schema:
//   t,x1..xn,u1..um,norm_z,norm_mu,norm_lambda,
//   S_flow,S_plant,V_lyap,w_flow,w_plant,q_bound,eq_feas
// 12 significant digits, UNIX line endings, no timestamps.
inline std::string csv_header(std::size_t n, std::size_t m) {
    std::string h = "t";
    for (std::size_t i = 1; i <= n; ++i) h += ",x" + std::to_string(i);
    for (std::size_t i = 1; i <= m; ++i) h += ",u" + std::to_string(i);
    h += ",norm_z,norm_mu,norm_lambda,S_flow,S_plant,V_lyap,w_flow,w_plant,q_bound,eq_feas";
    return h;
}

inline std::string format_csv_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_csv(const std::string& path, const SimLog& log, std::size_t n, std::size_t m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << csv_header(n, m) << "\n";
    for (std::size_t k = 0; k < log.rows(); ++k) {
        std::string line = format_csv_value(log.t[k]);
        for (std::size_t i = 0; i < n; ++i) line += "," + format_csv_value(log.x[k][i]);
        for (std::size_t i = 0; i < m; ++i) line += "," + format_csv_value(log.u[k][i]);
        line += "," + format_csv_value(log.norm_z[k]);
        line += "," + format_csv_value(log.norm_mu[k]);
        line += "," + format_csv_value(log.norm_lambda[k]);
        const StorageReport& s = log.storage[k];
        line += "," + format_csv_value(s.s_flow);
        line += "," + format_csv_value(s.s_plant);
        line += "," + format_csv_value(s.v_lyap);
        line += "," + format_csv_value(s.w_flow);
        line += "," + format_csv_value(s.w_plant);
        line += "," + format_csv_value(s.q_bound);
        line += "," + format_csv_value(log.eq_feasibility[k]);
        out << line << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct CsvTable {
    std::string header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
    table.header = line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(std::stod(cell));
        table.rows.push_back(std::move(row));
    }
    return table;
}

// Post-write validation: schema header, equal row widths, strictly
// increasing time, all entries finite.
inline void validate_csv(const std::string& path, std::size_t n, std::size_t m) {
    const CsvTable table = read_csv(path);
    if (table.header != csv_header(n, m))
        throw std::runtime_error("csv validation: unexpected header in " + path);
    const std::size_t width = 1 + n + m + 10;  // t, x, u, 3 norms, 6 storage, eq_feas
    double prev_t = -1.0;
    for (const auto& row : table.rows) {
        if (row.size() != width)
            throw std::runtime_error("csv validation: ragged row in " + path);
        for (double v : row)
            if (!std::isfinite(v))
                throw std::runtime_error("csv validation: non-finite entry in " + path);
        if (!(row[0] > prev_t))
            throw std::runtime_error("csv validation: time not strictly increasing in " + path);
        prev_t = row[0];
    }
}

}  // namespace impc
