#include "safempd/toml.hpp"

#include "doctest.h"

#include <cstdio>
#include <string>

using namespace safempd;

TEST_CASE("parses scalars, tables and arrays of tables") {
    const std::string text = R"(
schema_version = 1
name = "demo scenario"  # trailing comment

[system]
id = "double_integrator"
dt = 0.1
steps = 50
enabled = true
gains = [1.0, 2, 3.5]

[[obstacles]]
type = "circle"
radius = 1.25

[[obstacles]]
type = "box"
)";
    TomlDocument doc = toml_parse(text);
    CHECK(toml_get_int(doc.root, "schema_version", "t") == 1);
    CHECK(toml_get_string(doc.root, "name", "t") == "demo scenario");

    const TomlTable* sys = doc.table("system");
    REQUIRE(sys != nullptr);
    CHECK(toml_get_string(*sys, "id", "t") == "double_integrator");
    CHECK(toml_get_double(*sys, "dt", "t") == doctest::Approx(0.1));
    CHECK(toml_get_int(*sys, "steps", "t") == 50);
    CHECK(toml_get_bool(*sys, "enabled", "t"));
    const auto gains = toml_get_double_array(*sys, "gains", "t");
    REQUIRE(gains.size() == 3);
    CHECK(gains[1] == 2.0);

    const auto obstacles = doc.array("obstacles");
    REQUIRE(obstacles.size() == 2);
    CHECK(toml_get_string(*obstacles[0], "type", "t") == "circle");
    CHECK(toml_get_double(*obstacles[0], "radius", "t") == 1.25);
    CHECK(toml_get_string(*obstacles[1], "type", "t") == "box");
}

TEST_CASE("number forms: ints, floats, exponents, underscores") {
    TomlDocument doc = toml_parse("a = 1\nb = 1.0\nc = 1e-4\nd = -3\ne = 10_000\n");
    CHECK(doc.root.find("a")->is_int());
    CHECK(doc.root.find("b")->is_float());
    CHECK(doc.root.find("c")->is_float());
    CHECK(toml_get_double(doc.root, "c", "t") == doctest::Approx(1e-4));
    CHECK(toml_get_int(doc.root, "d", "t") == -3);
    CHECK(toml_get_int(doc.root, "e", "t") == 10000);
}

TEST_CASE("strings support escapes and hash characters") {
    TomlDocument doc = toml_parse(R"(s = "a # not a comment \"x\"\n")");
    CHECK(toml_get_string(doc.root, "s", "t") == "a # not a comment \"x\"\n");
}

TEST_CASE("parse errors carry line numbers") {
    auto expect_error = [](const std::string& text, const std::string& fragment) {
        try {
            toml_parse(text);
            FAIL("expected ConfigError for: " << text);
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find(fragment) != std::string::npos);
            CHECK(msg.find("line") != std::string::npos);
        }
    };
    expect_error("a = 1\na = 2\n", "duplicate key");
    expect_error("[t]\nx = 1\n[t]\n", "duplicate table");
    expect_error("[broken\n", "header");
    expect_error("just words\n", "key = value");
    expect_error("x = 12q\n", "malformed");
    expect_error("s = \"open\n", "unterminated");
    expect_error("x = [1, 2\n", "array");
    expect_error("x = 1 extra\n", "trailing");
}

TEST_CASE("emit round-trips through parse") {
    TomlDocument doc;
    doc.root.set("schema_version", 1);
    doc.root.set("name", "round trip \"quoted\"");
    TomlTable& t = doc.add_table("params");
    t.set("x", 0.3);
    t.set("y", -12);
    t.set("flag", false);
    TomlArray arr;
    arr.push_back(TomlValue(1.5));
    arr.push_back(TomlValue(2));
    t.set("list", std::move(arr));
    TomlTable& o1 = doc.add_array_item("items");
    o1.set("kind", "a");
    TomlTable& o2 = doc.add_array_item("items");
    o2.set("kind", "b");

    const std::string text = toml_emit(doc);
    TomlDocument back = toml_parse(text);
    CHECK(toml_get_int(back.root, "schema_version", "t") == 1);
    CHECK(toml_get_string(back.root, "name", "t") == "round trip \"quoted\"");
    const TomlTable* params = back.table("params");
    REQUIRE(params != nullptr);
    CHECK(toml_get_double(*params, "x", "t") == 0.3);
    CHECK(toml_get_int(*params, "y", "t") == -12);
    CHECK_FALSE(toml_get_bool(*params, "flag", "t"));
    CHECK(back.array("items").size() == 2);

    // A second emit of the parsed document is byte-identical.
    CHECK(toml_emit(back) == text);
}

TEST_CASE("float formatting is shortest round-trip and stays a float") {
    CHECK(toml_format_double(0.3) == "0.3");
    CHECK(toml_format_double(1.0) == "1.0");
    CHECK(toml_format_double(-2.5) == "-2.5");
    CHECK(toml_format_double(1e-4).find_first_of(".eE") != std::string::npos);
    const double v = 0.1234567890123456789;
    CHECK(std::stod(toml_format_double(v)) == v);
}

TEST_CASE("typed getters name the context and key") {
    TomlDocument doc = toml_parse("x = \"s\"\n");
    try {
        toml_get_double(doc.root, "x", "[system]");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[system]") != std::string::npos);
        CHECK(msg.find("'x'") != std::string::npos);
        CHECK(msg.find("number") != std::string::npos);
    }
    try {
        toml_get_string(doc.root, "missing", "[goal]");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("missing key 'missing'") != std::string::npos);
    }
    // Integers coerce to double.
    TomlDocument d2 = toml_parse("n = 4\n");
    CHECK(toml_get_double(d2.root, "n", "t") == 4.0);
}

TEST_CASE("file helpers raise ConfigError on missing paths") {
    CHECK_THROWS_AS(read_text_file("/nonexistent/definitely_missing.toml"), ConfigError);
    CHECK_THROWS_AS(toml_parse_file("/nonexistent/definitely_missing.toml"), ConfigError);

    const std::string path = "/tmp/safempd_toml_test.toml";
    write_text_file(path, "k = 3\n");
    TomlDocument doc = toml_parse_file(path);
    CHECK(toml_get_int(doc.root, "k", "t") == 3);
    std::remove(path.c_str());
}
