#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "memcentric/common/error.hpp"

namespace memcentric::harness {

// Empty cells (monostate) are written as an empty CSV field and JSON null.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

// Floats are printed with 6 significant digits everywhere.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string format_value(const Value& v) {
    if (std::holds_alternative<std::int64_t>(v))
        return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v))
        return format_double(std::get<double>(v));
    if (std::holds_alternative<std::string>(v))
        return std::get<std::string>(v);
    return "";
}

// A table with a fixed column order.  Rows are built by name; columns
// missing from a row stay empty.
class Table {
  public:
    Table() = default;
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Value>>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }

    void add_column(const std::string& name) {
        if (index_of(name) < 0)
            columns_.push_back(name);
    }

    void add_row(const std::map<std::string, Value>& cells) {
        std::vector<Value> row(columns_.size());
        for (const auto& [k, v] : cells) {
            const auto i = index_of(k);
            if (i < 0)
                throw InvariantViolation("metric '" + k + "' is not a declared column");
            row[static_cast<std::size_t>(i)] = v;
        }
        rows_.push_back(std::move(row));
    }

    const Value& at(std::size_t row, const std::string& column) const {
        const auto i = index_of(column);
        if (i < 0)
            throw InvariantViolation("no column '" + column + "'");
        return rows_.at(row)[static_cast<std::size_t>(i)];
    }

    std::string csv() const {
        std::string out = join(columns_);
        out += "\n";
        for (const auto& r : rows_) {
            std::vector<std::string> cells;
            for (const auto& v : r)
                cells.push_back(format_value(v));
            out += join(cells);
            out += "\n";
        }
        return out;
    }

    nlohmann::ordered_json json() const {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : rows_) {
            nlohmann::ordered_json o = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < columns_.size(); ++i)
                o[columns_[i]] = to_json(r[i]);
            rows.push_back(std::move(o));
        }
        return {{"columns", columns_}, {"rows", std::move(rows)}};
    }

  private:
    std::ptrdiff_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i] == name)
                return static_cast<std::ptrdiff_t>(i);
        return -1;
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos)
            return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"')
                q += '"';
            q += c;
        }
        return q + "\"";
    }

    static std::string join(const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                s += ",";
            s += quote(cells[i]);
        }
        return s;
    }

    // Doubles go through the same 6-digit rounding as the CSV so that both
    // formats carry identical values.
    static nlohmann::ordered_json to_json(const Value& v) {
        if (std::holds_alternative<std::int64_t>(v))
            return std::get<std::int64_t>(v);
        if (std::holds_alternative<double>(v))
            return std::stod(format_double(std::get<double>(v)));
        if (std::holds_alternative<std::string>(v))
            return std::get<std::string>(v);
        return nullptr;
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<Value>> rows_;
};

// Result of one subcommand run.  `summary` is the primary table; `detail`
// holds per-element or per-point data where a subcommand has any.
struct MetricsReport {
    std::string command;
    Table summary;
    Table detail;
    std::vector<std::string> notes; // human-readable lines for the console
};

enum class Format { csv, json };

inline Format parse_format(const std::string& s) {
    if (s == "csv")
        return Format::csv;
    if (s == "json")
        return Format::json;
    throw ConfigError("unknown output format '" + s + "' (csv or json)");
}

inline std::string render_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["command"] = r.command;
    j["summary"] = r.summary.json();
    if (!r.detail.columns().empty())
        j["detail"] = r.detail.json();
    return j.dump(2) + "\n";
}

inline std::filesystem::path detail_path(const std::filesystem::path& p) {
    auto q = p;
    q.replace_filename(p.stem().string() + ".detail" + p.extension().string());
    return q;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write '" + p.string() + "'");
    out << text;
    if (!out)
        throw Error("error writing '" + p.string() + "'");
}

// CSV: the summary goes to `path`, the detail table (if any) next to it as
// <stem>.detail.csv.  JSON: one document with both tables.
inline void emit(const MetricsReport& r, Format f, const std::filesystem::path& path) {
    if (f == Format::json) {
        write_file(path, render_json(r));
        return;
    }
    write_file(path, r.summary.csv());
    if (!r.detail.columns().empty())
        write_file(detail_path(path), r.detail.csv());
}

} // namespace memcentric::harness
