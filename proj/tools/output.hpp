#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include <tempus/widths.hpp>

namespace tempus::cli {

enum class Format { csv, jsonl };

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

/// Fixed "%.10g" so that output bytes do not depend on stream state or locale.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string csv_field(const Cell& c) {
    struct {
        std::string operator()(double v) const { return fmt(v); }
        std::string operator()(long long v) const { return std::to_string(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            return q + '"';
        }
    } visit;
    return std::visit(visit, c);
}

inline nlohmann::ordered_json json_value(const Cell& c) {
    struct {
        nlohmann::ordered_json operator()(double v) const {
            // same digits as CSV; non-finite values become strings
            if (!std::isfinite(v)) return fmt(v);
            return nlohmann::ordered_json::parse(fmt(v));
        }
        nlohmann::ordered_json operator()(long long v) const { return v; }
        nlohmann::ordered_json operator()(bool v) const { return v; }
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    } visit;
    return std::visit(visit, c);
}

inline void write(std::ostream& os, const Table& t, Format f) {
    if (f == Format::csv) {
        for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
        os << '\n';
        for (const auto& r : t.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
            os << '\n';
        }
        return;
    }
    for (const auto& r : t.rows) {
        nlohmann::ordered_json j;
        j["table"] = t.name;
        for (std::size_t i = 0; i < r.size(); ++i) j[t.columns[i]] = json_value(r[i]);
        os << j.dump() << '\n';
    }
}

inline Table bounds_table(const std::vector<BoundReport>& reports) {
    Table t{"bounds", {"tag", "lhs", "rhs", "slack", "tolerance", "asserted", "pass", "note"}, {}};
    for (const auto& r : reports)
        t.add({r.tag, r.lhs, r.rhs, r.slack, r.tolerance, r.asserted, r.pass, r.note});
    return t;
}

inline bool all_pass(const std::vector<BoundReport>& reports) {
    for (const auto& r : reports)
        if (r.asserted && !r.pass) return false;
    return true;
}

}  // namespace tempus::cli
