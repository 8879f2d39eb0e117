#include "tps/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tps/errors.hpp"

namespace tps {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");

    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header = split_line(line);
    if (t.header.empty()) throw SchemaError(path + ": empty header");

    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != t.header.size())
            throw SchemaError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(t.header.size()) + " columns, found " +
                              std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            char* end = nullptr;
            row[c] = std::strtod(cells[c].c_str(), &end);
            if (end == cells[c].c_str() || *end != '\0' || !std::isfinite(row[c]))
                throw SchemaError(path + ":" + std::to_string(line_no) + ": column '" +
                                  t.header[c] + "': not a finite number: '" + cells[c] + "'");
        }
        rows.push_back(std::move(row));
    }

    t.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < t.header.size(); ++c)
            t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return t;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
    if (header.size() != static_cast<std::size_t>(values.cols()))
        throw ShapeError("write_csv: header/column mismatch");
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    char buf[32];
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

BlockManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("manifest '" + path + "': " + e.what());
    }
    BlockManifest m;
    if (!j.contains("x_block") || !j["x_block"].is_array())
        throw SchemaError("manifest '" + path + "': missing x_block array");
    for (const auto& v : j["x_block"]) m.x_block.push_back(v.get<std::string>());
    if (j.contains("z_block"))
        for (const auto& v : j["z_block"]) m.z_block.push_back(v.get<std::string>());
    for (const auto& [key, value] : j.items())
        if (key != "x_block" && key != "z_block")
            throw SchemaError("manifest '" + path + "': unknown key '" + key + "'");
    return m;
}

}  // namespace tps
