#pragma once

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace zeno::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Meta {
    std::string command;
    nlohmann::json config;
    std::string config_hash;
};

enum class Format { Csv, Json };

Format format_from_string(const std::string& name);

/// 17 significant digits, C locale; "nan", "inf", "-inf" for non-finite.
std::string format_double(double value);

/// FNV-1a 64 over the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

Meta make_meta(std::string command, nlohmann::json config);

/// Comment lines "# key=value" with the provenance, then the header row and
/// one line per row. LF line endings.
void write_csv(std::ostream& out, const Meta& meta, const Table& table);
/// {"meta": {...}, "rows": [{column: value, ...}, ...]}
void write_json(std::ostream& out, const Meta& meta, const Table& table);
void write(std::ostream& out, Format format, const Meta& meta, const Table& table);

} // namespace zeno::cli
