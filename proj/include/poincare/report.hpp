#pragma once

#include "poincare/forms.hpp"
#include "poincare/grid.hpp"
#include "poincare/inequalities.hpp"
#include "poincare/numeric.hpp"
#include "poincare/weights.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace poincare {

using json = nlohmann::ordered_json;

/// One table entry; monostate renders as an empty CSV field and JSON null.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, bool>;

struct Row {
    std::vector<Cell> cells;
    /// Fields that go to the JSON report only.
    json extra = json::object();
    bool pass = true;
};

/// Rows with a fixed column order.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<Row>& rows() const noexcept { return rows_; }

    void add(Row row) {
        require(row.cells.size() == columns_.size(), "row width must match the column count");
        rows_.push_back(std::move(row));
    }
    void append(const Table& other) {
        require(other.columns_ == columns_, "tables have different columns");
        rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
    }

    bool any_fail() const noexcept {
        for (const auto& r : rows_)
            if (!r.pass) return true;
        return false;
    }

private:
    std::vector<std::string> columns_;
    std::vector<Row> rows_;
};

namespace detail {

inline std::string csv_field(const Cell& cell) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string out = "\"";
            for (char c : s) {
                if (c == '"') out += '"';
                out += c;
            }
            return out + "\"";
        }
        std::string operator()(double x) const { return format_double(x); }
        std::string operator()(std::int64_t x) const { return std::to_string(x); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
    };
    return std::visit(Visitor{}, cell);
}

inline json json_value(const Cell& cell) {
    struct Visitor {
        json operator()(std::monostate) const { return nullptr; }
        json operator()(const std::string& s) const { return s; }
        json operator()(double x) const { return std::isfinite(x) ? json(x) : json(format_double(x)); }
        json operator()(std::int64_t x) const { return x; }
        json operator()(bool b) const { return b; }
    };
    return std::visit(Visitor{}, cell);
}

inline Cell optional_cell(const std::optional<double>& x) {
    return x ? Cell(*x) : Cell(std::monostate{});
}

} // namespace detail

inline void write_csv(std::ostream& os, const Table& table) {
    const auto& cols = table.columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.cells.size(); ++i) os << (i ? "," : "") << detail::csv_field(row.cells[i]);
        os << '\n';
    }
}

inline json to_json(const Table& table) {
    json out = json::array();
    for (const auto& row : table.rows()) {
        json obj = json::object();
        for (std::size_t i = 0; i < row.cells.size(); ++i) obj[table.columns()[i]] = detail::json_value(row.cells[i]);
        for (const auto& [k, v] : row.extra.items()) obj[k] = v;
        out.push_back(std::move(obj));
    }
    return out;
}

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json.
inline void write_table(const std::filesystem::path& dir, const std::string& stem, const Table& table) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
    require(static_cast<bool>(csv), "cannot open " + (dir / (stem + ".csv")).string());
    write_csv(csv, table);
    std::ofstream js(dir / (stem + ".json"), std::ios::binary);
    require(static_cast<bool>(js), "cannot open " + (dir / (stem + ".json")).string());
    js << to_json(table).dump(2) << '\n';
}

inline const std::vector<std::string>& verify_columns() {
    static const std::vector<std::string> cols{"check_id", "d",     "N",     "p",     "s",             "R",
                                               "profile",  "lhs",   "rhs",   "ratio", "constant_used", "pass"};
    return cols;
}

inline Row to_row(const InequalityReport& r) {
    Row row;
    row.cells = {r.check_id,
                 static_cast<std::int64_t>(r.meta.dim),
                 static_cast<std::int64_t>(r.meta.cells_per_axis),
                 r.meta.p,
                 detail::optional_cell(r.meta.s),
                 detail::optional_cell(r.meta.R),
                 r.meta.profile,
                 r.lhs,
                 r.rhs,
                 r.ratio,
                 r.constant_used,
                 r.pass};
    row.extra["function"] = r.meta.function;
    row.extra["tolerance"] = r.tolerance;
    for (const auto& [k, v] : r.meta.extras) row.extra[k] = detail::json_value(v);
    row.pass = r.pass;
    return row;
}

// serialization of domain objects

inline json to_json(const RadialProfile& profile) {
    return json{{"type", "step"}, {"breakpoints", profile.breakpoints()}, {"values", profile.values()}};
}

inline json to_json(const KernelSpec& kernel) {
    json j{{"kind", to_string(kernel.kind)}, {"p", kernel.p}};
    if (kernel.kind == KernelKind::fractional) {
        j["s"] = kernel.s;
        j["R"] = kernel.R ? json(*kernel.R) : json(nullptr);
    }
    if (kernel.kind == KernelKind::constant_floor) j["c"] = kernel.floor;
    return j;
}

/// Header {d, N} plus the flat value array in cell order.
inline json to_json(const GridFunction& u) {
    return json{{"grid", {{"d", u.grid().dim()}, {"N", u.grid().cells_per_axis()}}}, {"values", u.values()}};
}

inline GridFunction grid_function_from_json(const json& j) {
    require(j.contains("grid") && j.contains("values"), "grid function needs grid and values");
    const auto grid = build_grid(j.at("grid").at("d").get<int>(), j.at("grid").at("N").get<int>());
    return GridFunction(grid, j.at("values").get<std::vector<double>>());
}

/// Per-iteration eigen trace: run label, iteration, lambda, relative residual.
class TraceLog {
public:
    void record(const std::string& run, int iteration, double lambda, double residual) {
        rows_.push_back({run, iteration, lambda, residual});
    }
    bool empty() const noexcept { return rows_.empty(); }

    void write(std::ostream& os) const {
        os << "run,iteration,lambda,residual\n";
        for (const auto& r : rows_)
            os << detail::csv_field(r.run) << ',' << r.iteration << ',' << format_double(r.lambda) << ','
               << format_double(r.residual) << '\n';
    }

private:
    struct Entry {
        std::string run;
        int iteration;
        double lambda;
        double residual;
    };
    std::vector<Entry> rows_;
};

} // namespace poincare
