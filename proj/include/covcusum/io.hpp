#ifndef COVCUSUM_IO_HPP
#define COVCUSUM_IO_HPP

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "covcusum/common.hpp"
#include "covcusum/dist.hpp"
#include "covcusum/harness.hpp"
#include "covcusum/projections.hpp"
#include "covcusum/testing.hpp"

namespace covcusum {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        std::size_t a = cell.find_first_not_of(" \t\r");
        std::size_t b = cell.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? std::string() : cell.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_cell(const std::string& cell, const std::string& path, std::size_t lineno) {
    try {
        std::size_t used = 0;
        double val = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
        return val;
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" + cell + "'");
    }
}

inline std::string format_double(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

}  // namespace detail

/** Series CSV: header t,y1,...,yd with a strictly increasing t column. */
inline Series load_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    std::vector<std::string> header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "t")
        throw ParseError(path + ":1: expected header t,y1,...,yd");
    for (std::size_t j = 1; j < header.size(); ++j)
        if (header[j] != "y" + std::to_string(j))
            throw ParseError(path + ":1: expected column y" + std::to_string(j) + ", found '" + header[j] + "'");
    const std::size_t d = header.size() - 1;
    std::vector<std::vector<double>> rows;
    double prev_t = 0.0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != d + 1)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(d + 1) +
                             " cells, found " + std::to_string(cells.size()));
        double t = detail::parse_cell(cells[0], path, lineno);
        if (!rows.empty() && !(t > prev_t))
            throw ParseError(path + ":" + std::to_string(lineno) + ": t column not strictly increasing");
        prev_t = t;
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = detail::parse_cell(cells[j + 1], path, lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no observations");
    Series y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
            y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return y;
}

inline void save_series_csv(const std::string& path, const Series& y) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << "t";
    for (Eigen::Index j = 1; j <= y.cols(); ++j) out << ",y" << j;
    out << "\n";
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        out << (i + 1);
        for (Eigen::Index j = 0; j < y.cols(); ++j) out << "," << detail::format_double(y(i, j));
        out << "\n";
    }
}

/** Projection CSV: one vector per column, header p1,...,pL. */
inline std::vector<Vector> load_projections_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    std::vector<std::string> header = detail::split_csv_line(line);
    if (header.empty()) throw ParseError(path + ":1: empty header");
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] != "p" + std::to_string(j + 1))
            throw ParseError(path + ":1: expected column p" + std::to_string(j + 1));
    const std::size_t L = header.size();
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != L)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(L) + " cells");
        std::vector<double> row(L);
        for (std::size_t j = 0; j < L; ++j) row[j] = detail::parse_cell(cells[j], path, lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no vector entries");
    std::vector<Vector> cols(L, Vector(static_cast<Eigen::Index>(rows.size())));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < L; ++j) cols[j][static_cast<Eigen::Index>(i)] = rows[i][j];
    return cols;
}

inline void save_projections_csv(const std::string& path, const std::vector<Vector>& cols) {
    if (cols.empty()) throw std::invalid_argument("save_projections_csv: no vectors");
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << "p" << (j + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < cols.front().size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j)
            out << (j ? "," : "") << detail::format_double(cols[j][i]);
        out << "\n";
    }
}

inline nlohmann::ordered_json quantile_table_to_json(const QuantileTable& t) {
    nlohmann::ordered_json j;
    j["g"] = t.g.kind == WeightFunction::Kind::none ? "none" : "power";
    j["beta"] = t.g.beta;
    j["grid_n"] = t.grid_n;
    j["reps"] = t.reps;
    j["seed"] = t.seed;
    j["sorted_sample"] = t.sorted_sample;
    return j;
}

inline QuantileTable quantile_table_from_json(const nlohmann::json& j) {
    QuantileTable t;
    std::string kind = j.at("g").get<std::string>();
    double beta = j.value("beta", 0.0);
    t.g = kind == "none" ? WeightFunction::unweighted() : WeightFunction::power(beta);
    t.grid_n = j.at("grid_n").get<Eigen::Index>();
    t.reps = j.at("reps").get<Eigen::Index>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.sorted_sample = j.at("sorted_sample").get<std::vector<double>>();
    for (std::size_t i = 1; i < t.sorted_sample.size(); ++i)
        if (t.sorted_sample[i] < t.sorted_sample[i - 1])
            throw ParseError("quantile table: sample not sorted");
    return t;
}

inline void save_quantile_table(const std::string& path, const QuantileTable& t) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << quantile_table_to_json(t).dump(2) << "\n";
}

inline QuantileTable load_quantile_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return quantile_table_from_json(j);
}

inline nlohmann::ordered_json report_to_json(const TestReport& r) {
    nlohmann::ordered_json j;
    j["statistic"] = r.statistic;
    j["c_n"] = r.c_n;
    j["alpha_hat"] = r.alpha_hat;
    j["quantile"] = r.quantile;
    j["level"] = r.level;
    j["decision"] = r.decision;
    j["tau_hat"] = r.tau_hat;
    if (r.tau_tilde) j["tau_tilde"] = *r.tau_tilde;
    j["settings"] = r.settings;
    j["warnings"] = r.warnings;
    return j;
}

inline void save_study_csv(const std::string& path, const StudyTable& table) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << "method,lrv_mode,theta,d,rejection_rate,reps,seed\n";
    for (const StudyCell& c : table)
        out << c.method << "," << c.lrv_mode << "," << detail::format_double(c.theta) << "," << c.d << ","
            << detail::format_double(c.rejection_rate) << "," << c.reps << "," << c.seed << "\n";
}

/** Flat TOML subset used for configs: key = value lines, # comments,
 *  [section] headers folded into dotted keys, values parsed as JSON scalars
 *  or arrays (strings need quotes). Files starting with '{' are read as
 *  plain JSON instead. */
inline nlohmann::json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return nlohmann::json::parse(text);
        } catch (const std::exception& e) {
            throw ParseError(path + ": " + e.what());
        }
    }
    nlohmann::json j = nlohmann::json::object();
    std::string prefix;
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        std::size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(path + ":" + std::to_string(lineno) + ": unterminated section");
            prefix = line.substr(1, line.size() - 2) + ".";
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        key = key.substr(0, key.find_last_not_of(" \t") + 1);
        std::size_t vs = val.find_first_not_of(" \t");
        if (key.empty() || vs == std::string::npos)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
        val = val.substr(vs);
        if (!val.empty() && val.front() == '\'' && val.back() == '\'' && val.size() >= 2)
            val = "\"" + val.substr(1, val.size() - 2) + "\"";
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(val);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": cannot parse value '" + val + "'");
        }
        j[prefix + key] = parsed;
    }
    return j;
}

}  // namespace covcusum

#endif
