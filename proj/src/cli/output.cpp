#include "zeno/cli/output.hpp"

#include "zeno/cli/config.hpp"
#include "zeno/version.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace zeno::cli {

using nlohmann::json;

Format format_from_string(const std::string& name) {
    if (name == "csv") return Format::Csv;
    if (name == "json") return Format::Json;
    throw UsageError("unknown format '" + name + "' (expected csv or json)");
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    // %g is locale-independent for the decimal point only under the C
    // locale, which the CLI never changes.
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string config_hash(const json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

Meta make_meta(std::string command, json config) {
    Meta m;
    m.command = std::move(command);
    m.config_hash = config_hash(config);
    m.config = std::move(config);
    return m;
}

namespace {

std::string cell_text(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    return std::get<std::string>(cell);
}

json cell_json(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return std::isfinite(*d) ? json(*d) : json(nullptr);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
    return std::get<std::string>(cell);
}

} // namespace

void write_csv(std::ostream& out, const Meta& meta, const Table& table) {
    out << "# tool=zeno version=" << kVersion << " schema=" << kOutputSchema << '\n';
    out << "# command=" << meta.command << " config_hash=" << meta.config_hash << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
        out << '\n';
    }
}

void write_json(std::ostream& out, const Meta& meta, const Table& table) {
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) r[table.columns[i]] = cell_json(row[i]);
        rows.push_back(std::move(r));
    }
    const json doc = {{"meta",
                       {{"tool", "zeno"},
                        {"version", kVersion},
                        {"schema", kOutputSchema},
                        {"command", meta.command},
                        {"config_hash", meta.config_hash},
                        {"config", meta.config}}},
                      {"rows", std::move(rows)}};
    out << doc.dump(2) << '\n';
}

void write(std::ostream& out, Format format, const Meta& meta, const Table& table) {
    if (format == Format::Csv) {
        write_csv(out, meta, table);
    } else {
        write_json(out, meta, table);
    }
}

} // namespace zeno::cli
