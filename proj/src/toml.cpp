#include "safempd/toml.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace safempd {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("toml: line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Remove a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    return s;
}

bool valid_bare_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
            c != '.')
            return false;
    return true;
}

std::string parse_string_literal(const std::string& s, std::size_t& pos, int line) {
    // pos points at the opening quote.
    std::string out;
    for (std::size_t i = pos + 1; i < s.size(); ++i) {
        char c = s[i];
        if (c == '\\') {
            if (i + 1 >= s.size()) fail(line, "dangling escape in string");
            char e = s[++i];
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                default: fail(line, std::string("unsupported escape \\") + e);
            }
        } else if (c == '"') {
            pos = i + 1;
            return out;
        } else {
            out += c;
        }
    }
    fail(line, "unterminated string");
}

TomlValue parse_scalar(const std::string& tok, int line) {
    if (tok == "true") return TomlValue(true);
    if (tok == "false") return TomlValue(false);
    if (tok.empty()) fail(line, "empty value");

    std::string digits = tok;
    digits.erase(std::remove(digits.begin(), digits.end(), '_'), digits.end());
    bool is_float = digits.find_first_of(".eE") != std::string::npos ||
                    digits.find("inf") != std::string::npos ||
                    digits.find("nan") != std::string::npos;
    // Entries like "1e5" have no dot; entries like "0x" are rejected below.
    try {
        std::size_t used = 0;
        if (is_float) {
            double v = std::stod(digits, &used);
            if (used != digits.size()) fail(line, "malformed number '" + tok + "'");
            return TomlValue(v);
        }
        long long v = std::stoll(digits, &used, 10);
        if (used != digits.size()) fail(line, "malformed number '" + tok + "'");
        return TomlValue(static_cast<std::int64_t>(v));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(line, "malformed value '" + tok + "'");
    }
}

TomlValue parse_value(const std::string& s, std::size_t& pos, int line);

TomlValue parse_array(const std::string& s, std::size_t& pos, int line) {
    // pos points at '['.
    TomlArray arr;
    ++pos;
    while (true) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos >= s.size()) fail(line, "unterminated array");
        if (s[pos] == ']') {
            ++pos;
            return TomlValue(std::move(arr));
        }
        arr.push_back(parse_value(s, pos, line));
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos < s.size() && s[pos] == ',') {
            ++pos;
            continue;
        }
        if (pos < s.size() && s[pos] == ']') {
            ++pos;
            return TomlValue(std::move(arr));
        }
        fail(line, "expected ',' or ']' in array");
    }
}

TomlValue parse_value(const std::string& s, std::size_t& pos, int line) {
    if (pos >= s.size()) fail(line, "missing value");
    char c = s[pos];
    if (c == '"') return TomlValue(parse_string_literal(s, pos, line));
    if (c == '[') return parse_array(s, pos, line);
    std::size_t end = pos;
    while (end < s.size() && s[end] != ',' && s[end] != ']' &&
           !std::isspace(static_cast<unsigned char>(s[end])))
        ++end;
    std::string tok = s.substr(pos, end - pos);
    pos = end;
    return parse_scalar(tok, line);
}

const char* type_name(const TomlValue& v) {
    if (v.is_string()) return "string";
    if (v.is_int()) return "integer";
    if (v.is_float()) return "float";
    if (v.is_bool()) return "boolean";
    return "array";
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

void emit_value(std::string& out, const TomlValue& v) {
    if (v.is_string()) {
        out += quote(std::get<std::string>(v.data));
    } else if (v.is_int()) {
        out += std::to_string(std::get<std::int64_t>(v.data));
    } else if (v.is_float()) {
        out += toml_format_double(std::get<double>(v.data));
    } else if (v.is_bool()) {
        out += std::get<bool>(v.data) ? "true" : "false";
    } else {
        out += '[';
        const auto& arr = std::get<TomlArray>(v.data);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (i) out += ", ";
            emit_value(out, arr[i]);
        }
        out += ']';
    }
}

void emit_table(std::string& out, const TomlTable& t) {
    for (const auto& [k, v] : t.items) {
        out += k;
        out += " = ";
        emit_value(out, v);
        out += '\n';
    }
}

} // namespace

const TomlValue* TomlTable::find(const std::string& key) const {
    for (const auto& [k, v] : items)
        if (k == key) return &v;
    return nullptr;
}

void TomlTable::set(const std::string& key, TomlValue value) {
    for (auto& [k, v] : items) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    items.emplace_back(key, std::move(value));
}

const TomlTable* TomlDocument::table(const std::string& name) const {
    for (const auto& s : sections)
        if (!s.array_item && s.name == name) return &s.table;
    return nullptr;
}

std::vector<const TomlTable*> TomlDocument::array(const std::string& name) const {
    std::vector<const TomlTable*> out;
    for (const auto& s : sections)
        if (s.array_item && s.name == name) out.push_back(&s.table);
    return out;
}

TomlTable& TomlDocument::add_table(const std::string& name) {
    sections.push_back({name, false, {}});
    return sections.back().table;
}

TomlTable& TomlDocument::add_array_item(const std::string& name) {
    sections.push_back({name, true, {}});
    return sections.back().table;
}

TomlDocument toml_parse(const std::string& text) {
    TomlDocument doc;
    TomlTable* current = &doc.root;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;

        if (s.front() == '[') {
            bool array_item = s.size() > 1 && s[1] == '[';
            std::string close = array_item ? "]]" : "]";
            std::size_t open = array_item ? 2 : 1;
            if (s.size() < open + close.size() ||
                s.substr(s.size() - close.size()) != close)
                fail(line, "malformed table header");
            std::string name = trim(s.substr(open, s.size() - open - close.size()));
            if (!valid_bare_key(name)) fail(line, "invalid table name '" + name + "'");
            if (!array_item) {
                for (const auto& sec : doc.sections)
                    if (!sec.array_item && sec.name == name)
                        fail(line, "duplicate table [" + name + "]");
                current = &doc.add_table(name);
            } else {
                current = &doc.add_array_item(name);
            }
            continue;
        }

        std::size_t eq = std::string::npos;
        {
            bool in_string = false;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (in_string) {
                    if (s[i] == '\\') ++i;
                    else if (s[i] == '"') in_string = false;
                } else if (s[i] == '"') {
                    in_string = true;
                } else if (s[i] == '=') {
                    eq = i;
                    break;
                }
            }
        }
        if (eq == std::string::npos) fail(line, "expected key = value");
        std::string key = trim(s.substr(0, eq));
        if (!valid_bare_key(key)) fail(line, "invalid key '" + key + "'");
        if (current->contains(key)) fail(line, "duplicate key '" + key + "'");

        std::string rhs = trim(s.substr(eq + 1));
        std::size_t pos = 0;
        TomlValue value = parse_value(rhs, pos, line);
        if (trim(rhs.substr(pos)) != "") fail(line, "trailing content after value");
        current->items.emplace_back(key, std::move(value));
    }
    return doc;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw ConfigError("failed reading file: " + path);
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open file for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw ConfigError("failed writing file: " + path);
}

TomlDocument toml_parse_file(const std::string& path) {
    try {
        return toml_parse(read_text_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string toml_emit(const TomlDocument& doc) {
    std::string out;
    emit_table(out, doc.root);
    for (const auto& sec : doc.sections) {
        if (!out.empty()) out += '\n';
        out += sec.array_item ? "[[" + sec.name + "]]\n" : "[" + sec.name + "]\n";
        emit_table(out, sec.table);
    }
    return out;
}

std::string toml_format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

namespace {

const TomlValue& require(const TomlTable& t, const std::string& key,
                         const std::string& ctx) {
    const TomlValue* v = t.find(key);
    if (!v) throw ConfigError(ctx + ": missing key '" + key + "'");
    return *v;
}

double as_double(const TomlValue& v, const std::string& key, const std::string& ctx) {
    if (v.is_float()) return std::get<double>(v.data);
    if (v.is_int()) return static_cast<double>(std::get<std::int64_t>(v.data));
    throw ConfigError(ctx + ": key '" + key + "' must be a number, got " + type_name(v));
}

} // namespace

double toml_get_double(const TomlTable& t, const std::string& key, const std::string& ctx) {
    return as_double(require(t, key, ctx), key, ctx);
}

std::int64_t toml_get_int(const TomlTable& t, const std::string& key,
                          const std::string& ctx) {
    const TomlValue& v = require(t, key, ctx);
    if (!v.is_int())
        throw ConfigError(ctx + ": key '" + key + "' must be an integer, got " +
                          type_name(v));
    return std::get<std::int64_t>(v.data);
}

std::string toml_get_string(const TomlTable& t, const std::string& key,
                            const std::string& ctx) {
    const TomlValue& v = require(t, key, ctx);
    if (!v.is_string())
        throw ConfigError(ctx + ": key '" + key + "' must be a string, got " +
                          type_name(v));
    return std::get<std::string>(v.data);
}

bool toml_get_bool(const TomlTable& t, const std::string& key, const std::string& ctx) {
    const TomlValue& v = require(t, key, ctx);
    if (!v.is_bool())
        throw ConfigError(ctx + ": key '" + key + "' must be a boolean, got " +
                          type_name(v));
    return std::get<bool>(v.data);
}

std::vector<double> toml_get_double_array(const TomlTable& t, const std::string& key,
                                          const std::string& ctx) {
    const TomlValue& v = require(t, key, ctx);
    if (!v.is_array())
        throw ConfigError(ctx + ": key '" + key + "' must be an array, got " +
                          type_name(v));
    std::vector<double> out;
    for (const auto& e : std::get<TomlArray>(v.data))
        out.push_back(as_double(e, key, ctx));
    return out;
}

std::optional<double> toml_opt_double(const TomlTable& t, const std::string& key,
                                      const std::string& ctx) {
    if (!t.contains(key)) return std::nullopt;
    return toml_get_double(t, key, ctx);
}

std::optional<std::string> toml_opt_string(const TomlTable& t, const std::string& key,
                                           const std::string& ctx) {
    if (!t.contains(key)) return std::nullopt;
    return toml_get_string(t, key, ctx);
}

std::optional<bool> toml_opt_bool(const TomlTable& t, const std::string& key,
                                  const std::string& ctx) {
    if (!t.contains(key)) return std::nullopt;
    return toml_get_bool(t, key, ctx);
}

std::optional<std::int64_t> toml_opt_int(const TomlTable& t, const std::string& key,
                                         const std::string& ctx) {
    if (!t.contains(key)) return std::nullopt;
    return toml_get_int(t, key, ctx);
}

} // namespace safempd
