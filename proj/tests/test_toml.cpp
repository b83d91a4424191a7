#include "ddlab/toml.hpp"

#include "ddlab/errors.hpp"

#include <doctest.h>

#include <sstream>

using namespace ddlab;

TEST_CASE("toml subset: sections, scalars, arrays, comments") {
    const std::string text = R"(
# study configuration
[case]
id = "A"        # trailing comment
k1 = 1.5
flag = true

[phasefield]
profile = "linear"
eps = [0.5, 0.25, 0.125]

[output]
formats = ["csv", "json"]
)";
    const toml::Table t = toml::parse_string(text);
    CHECK(t.get_string("case.id", "?") == "A");
    CHECK(t.get_number("case.k1", 0.0) == 1.5);
    CHECK(t.get_bool("case.flag", false));
    CHECK(t.get_string("phasefield.profile", "?") == "linear");
    const auto eps = t.get_numbers("phasefield.eps", {});
    REQUIRE(eps.size() == 3);
    CHECK(eps[1] == 0.25);
    const auto formats = t.get_strings("output.formats", {});
    REQUIRE(formats.size() == 2);
    CHECK(formats[1] == "json");
    CHECK_FALSE(t.has("case.missing"));
    CHECK(t.get_number("case.missing", 7.0) == 7.0);
}

TEST_CASE("toml subset: malformed input is reported with the line") {
    CHECK_THROWS_AS(toml::parse_string("[case\nid = 1"), ConfigError);
    CHECK_THROWS_AS(toml::parse_string("novalue"), ConfigError);
    CHECK_THROWS_AS(toml::parse_string("x = [1, \"a\"]"), ConfigError);
    CHECK_THROWS_AS(toml::parse_string("x = ?what"), ConfigError);
    try {
        toml::parse_string("ok = 1\nbroken line");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("toml subset: typed access guards") {
    const toml::Table t = toml::parse_string("[a]\nx = 1\ns = \"v\"\n");
    CHECK_THROWS_AS(t.get_string("a.x", ""), ConfigError);
    CHECK_THROWS_AS(t.get_number("a.s", 0.0), ConfigError);
    CHECK_THROWS_AS(t.at("a.nope"), ConfigError);
}

TEST_CASE("toml subset: write/parse round trip preserves values") {
    toml::Table t;
    t.set("case.id", toml::Value::of_string("B"));
    t.set("case.k2", toml::Value::of_number(10.0));
    t.set("phasefield.eps", toml::Value::of_numbers({0.5, 0.25}));
    t.set("solver.flag", toml::Value::of_bool(false));
    std::ostringstream out;
    t.write(out);
    const toml::Table back = toml::parse_string(out.str());
    CHECK(back.get_string("case.id", "?") == "B");
    CHECK(back.get_number("case.k2", 0.0) == 10.0);
    CHECK(back.get_numbers("phasefield.eps", {}).size() == 2);
    CHECK(back.get_bool("solver.flag", true) == false);
}
