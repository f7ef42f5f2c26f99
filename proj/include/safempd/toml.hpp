#pragma once

#include "safempd/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace safempd {

// Minimal TOML subset used by scenario and bench config files: [table] and
// [[array-of-table]] headers, bare keys, string/integer/float/boolean scalars,
// single-line arrays of scalars, and # comments. Parse errors carry 1-based
// line numbers.

struct TomlValue;

using TomlArray = std::vector<TomlValue>;

struct TomlValue {
    std::variant<std::string, std::int64_t, double, bool, TomlArray> data;

    TomlValue() : data(std::string()) {}
    TomlValue(const char* s) : data(std::string(s)) {}
    TomlValue(std::string s) : data(std::move(s)) {}
    TomlValue(std::int64_t i) : data(i) {}
    TomlValue(int i) : data(static_cast<std::int64_t>(i)) {}
    TomlValue(double d) : data(d) {}
    TomlValue(bool b) : data(b) {}
    TomlValue(TomlArray a) : data(std::move(a)) {}

    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
    bool is_float() const { return std::holds_alternative<double>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_array() const { return std::holds_alternative<TomlArray>(data); }
};

struct TomlTable {
    std::vector<std::pair<std::string, TomlValue>> items;

    const TomlValue* find(const std::string& key) const;
    void set(const std::string& key, TomlValue value);
    bool contains(const std::string& key) const { return find(key) != nullptr; }
};

struct TomlSection {
    std::string name;
    bool array_item = false;  // came from a [[name]] header
    TomlTable table;
};

struct TomlDocument {
    TomlTable root;                      // keys before the first header
    std::vector<TomlSection> sections;   // in file order

    const TomlTable* table(const std::string& name) const;
    std::vector<const TomlTable*> array(const std::string& name) const;

    TomlTable& add_table(const std::string& name);
    TomlTable& add_array_item(const std::string& name);
};

TomlDocument toml_parse(const std::string& text);
TomlDocument toml_parse_file(const std::string& path);
std::string toml_emit(const TomlDocument& doc);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Typed accessors with contextual error messages ("ctx" names the table).
// Integer values coerce to double where a float is expected.
double toml_get_double(const TomlTable& t, const std::string& key, const std::string& ctx);
std::int64_t toml_get_int(const TomlTable& t, const std::string& key, const std::string& ctx);
std::string toml_get_string(const TomlTable& t, const std::string& key, const std::string& ctx);
bool toml_get_bool(const TomlTable& t, const std::string& key, const std::string& ctx);
std::vector<double> toml_get_double_array(const TomlTable& t, const std::string& key,
                                          const std::string& ctx);
std::optional<double> toml_opt_double(const TomlTable& t, const std::string& key,
                                      const std::string& ctx);
std::optional<std::string> toml_opt_string(const TomlTable& t, const std::string& key,
                                           const std::string& ctx);
std::optional<bool> toml_opt_bool(const TomlTable& t, const std::string& key,
                                  const std::string& ctx);
std::optional<std::int64_t> toml_opt_int(const TomlTable& t, const std::string& key,
                                         const std::string& ctx);

/// Shortest decimal form that round-trips and re-parses as a TOML float.
std::string toml_format_double(double v);

} // namespace safempd
