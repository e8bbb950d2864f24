#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nqkr/error.hpp"
#include "nqkr/params.hpp"

namespace nqkr::io {

inline constexpr const char* version = "nqkr 1.0.0";

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// 17 significant digits: round-trips every double.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::ordered_json params_json(const ModelParams& p) {
    return {{"K", p.K},         {"lambda", p.lambda},   {"hbar", p.hbar},
            {"dim", p.dim},     {"epsilon", p.epsilon}, {"sigma", p.sigma}};
}

/// CSV with a leading `# meta: {...}` comment line, then the header row.
inline void write_csv(std::ostream& os, const nlohmann::ordered_json& meta, const Table& table) {
    os << "# meta: " << meta.dump() << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        os << (c ? "," : "") << table.columns[c];
    }
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) os << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        os << format_number(v);
                    } else {
                        os << v;
                    }
                },
                row[c]);
        }
        os << '\n';
    }
}

inline nlohmann::ordered_json table_json(const Table& table) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        // JSON has no NaN; failed cells carry null.
                        if (std::isfinite(v)) {
                            obj[table.columns[c]] = v;
                        } else {
                            obj[table.columns[c]] = nullptr;
                        }
                    } else {
                        obj[table.columns[c]] = v;
                    }
                },
                row[c]);
        }
        rows.push_back(std::move(obj));
    }
    return rows;
}

inline void write_json(std::ostream& os, const nlohmann::ordered_json& meta, const Table& table) {
    nlohmann::ordered_json doc;
    doc["meta"] = meta;
    doc["data"] = table_json(table);
    os << doc.dump(2) << '\n';
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open output file " + path);
    return os;
}

}  // namespace nqkr::io
