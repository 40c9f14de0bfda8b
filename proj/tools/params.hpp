#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include <tempus/core.hpp>

#include "output.hpp"

namespace tempus::cli {

inline constexpr std::uint64_t default_seed = 20240611;

enum class ParamType { number, integer, text };

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::number;
    std::string fallback;  // default, as typed on the command line
    std::string help;
    bool positive = false;
    std::vector<std::string> choices;  // text parameters only
};

inline const char* type_name(ParamType t) {
    switch (t) {
        case ParamType::number: return "number";
        case ParamType::integer: return "integer";
        case ParamType::text: return "string";
    }
    return "?";
}

/// Resolved values of one experiment point.
struct Params {
    std::map<std::string, double> num;
    std::map<std::string, std::string> text;
    std::uint64_t seed = default_seed;

    [[nodiscard]] double operator[](const std::string& k) const {
        const auto it = num.find(k);
        require(it != num.end(), ErrorCode::schema, "missing parameter " + k);
        return it->second;
    }
    [[nodiscard]] std::size_t count(const std::string& k) const { return static_cast<std::size_t>((*this)[k]); }
    [[nodiscard]] int integer(const std::string& k) const { return static_cast<int>((*this)[k]); }
    [[nodiscard]] const std::string& str(const std::string& k) const {
        const auto it = text.find(k);
        require(it != text.end(), ErrorCode::schema, "missing parameter " + k);
        return it->second;
    }
};

struct Result {
    std::deque<Table> tables;  // stable references across table()
    std::vector<BoundReport> reports;

    void append(Result other) {
        for (auto& t : other.tables) {
            Table* same = nullptr;
            for (auto& mine : tables)
                if (mine.name == t.name && mine.columns == t.columns) same = &mine;
            if (same)
                for (auto& r : t.rows) same->rows.push_back(std::move(r));
            else
                tables.push_back(std::move(t));
        }
        for (auto& r : other.reports) reports.push_back(std::move(r));
    }
    Table& table(const std::string& name, std::vector<std::string> columns) {
        tables.push_back(Table{name, std::move(columns), {}});
        return tables.back();
    }
};

/// Log-log slope between the first and last points.
inline double end_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() >= 2 && x.size() == y.size(), ErrorCode::parameter, "slope needs two points");
    return (std::log(y.back()) - std::log(y.front())) / (std::log(x.back()) - std::log(x.front()));
}

}  // namespace tempus::cli
