#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "fairscore/csv.hpp"
#include "fairscore/toml.hpp"

using namespace fairscore;

TEST_CASE("toml: tables, dotted keys, scalars and arrays") {
  TomlValue v = toml_parse(R"(
# comment
title = "demo"
count = 42
rate = 0.75
flag = true
values = [1, 2.5, 3]
names = ["a", "b"]

[outer.inner]
key = "nested"

[other]
x = -1
)");
  CHECK(v.get_string("title", "") == "demo");
  CHECK(v.get_number("count", 0) == 42.0);
  CHECK(v.get_number("rate", 0) == doctest::Approx(0.75));
  CHECK(v.get_boolean("flag", false));
  CHECK(v.get_number_array("values", {}) == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(v.get_string_array("names", {}) ==
        std::vector<std::string>{"a", "b"});
  CHECK(v.get_string("outer.inner.key", "") == "nested");
  CHECK(v.get_number("other.x", 0) == -1.0);
}

TEST_CASE("toml: defaults and missing keys") {
  TomlValue v = toml_parse("a = 1\n");
  CHECK(v.get_number("missing", 7.0) == 7.0);
  CHECK(v.get_string("nope", "dflt") == "dflt");
  CHECK(!v.contains("b.c"));
  CHECK(v.find("a") != nullptr);
  CHECK(v.find("a.b") == nullptr);
}

TEST_CASE("toml: type mismatch throws ConfigError") {
  TomlValue v = toml_parse("a = \"str\"\n");
  CHECK_THROWS_AS(v.get_number("a", 0), ConfigError);
  CHECK_THROWS_AS(v.get_boolean("a", false), ConfigError);
}

TEST_CASE("toml: set() with dotted paths and parse_scalar") {
  TomlValue v = toml_parse("");
  v.set("x.y.z", toml_parse_scalar("3.5"));
  CHECK(v.get_number("x.y.z", 0) == 3.5);
  v.set("x.y.z", toml_parse_scalar("true"));
  CHECK(v.get_boolean("x.y.z", false));
  v.set("s", toml_parse_scalar("\"quoted\""));
  CHECK(v.get_string("s", "") == "quoted");
  v.set("bare", toml_parse_scalar("hello"));
  CHECK(v.get_string("bare", "") == "hello");
}

TEST_CASE("toml: malformed input throws") {
  CHECK_THROWS_AS(toml_parse("novalue =\n"), ConfigError);
  CHECK_THROWS_AS(toml_parse("[unclosed\n"), ConfigError);
  CHECK_THROWS_AS(toml_parse_file("/nonexistent/f.toml"), Error);
}

TEST_CASE("csv: rfc-4180 quoting round trip") {
  CsvTable t;
  t.header = {"plain", "with,comma", "with\"quote"};
  t.rows.push_back({"a", "b,c", "say \"hi\""});
  t.rows.push_back({"multi\nline", "", "x"});

  std::string path = "/tmp/fairscore_csv_test.csv";
  csv_write(path, t);
  CsvTable back = csv_read(path);
  CHECK(back.header == t.header);
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(back.rows[0] == t.rows[0]);
  CHECK(back.rows[1] == t.rows[1]);
  std::remove(path.c_str());
}

TEST_CASE("csv: escape rules") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("q\"q") == "\"q\"\"q\"");
  CHECK(csv_escape("n\nn") == "\"n\nn\"");
}

TEST_CASE("csv: parse handles crlf and quoted separators") {
  CsvTable t = csv_parse("a,b\r\n1,\"x,y\"\r\n2,z\r\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.column("b") == 1);
  CHECK(t.column("nope") == -1);
}
