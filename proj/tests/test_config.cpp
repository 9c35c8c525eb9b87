#include <doctest.h>

#include "perturb/config.hpp"

using perturb::Config;
using perturb::ConfigError;

TEST_CASE("sections, comments and typed reads") {
    const auto c = Config::parse(
        "top = 1\n"
        "[run]\n"
        "seed = 123   # trailing comment\n"
        "; whole-line comment\n"
        "strict = yes\n"
        "[measures]\n"
        "lambda = 1.0, 2.5 3\n"
        "name = void\n");
    CHECK(c.integer("top") == 1);
    CHECK(c.u64("run.seed") == 123);
    CHECK(c.flag("run.strict", false));
    CHECK(c.nums("measures.lambda") == std::vector<double>{1.0, 2.5, 3.0});
    CHECK(c.str("measures.name") == "void");
    CHECK(c.num("measures.missing", 4.5) == 4.5);
    CHECK(c.keys().size() == 5);
}

TEST_CASE("malformed input is a ConfigError") {
    CHECK_THROWS_AS(Config::parse("[run]\nseed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("justtext\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[run\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("= 3\n"), ConfigError);
    const auto c = Config::parse("a = x\nb = 1.5\nc = maybe\n");
    CHECK_THROWS_AS(c.num("a"), ConfigError);
    CHECK_THROWS_AS(c.integer("b"), ConfigError);
    CHECK_THROWS_AS(c.flag("c", false), ConfigError);
    CHECK_THROWS_AS(c.str("missing"), ConfigError);
}

TEST_CASE("same key in different sections is fine") {
    const auto c = Config::parse("[a]\nk = 1\n[b]\nk = 2\n");
    CHECK(c.integer("a.k") == 1);
    CHECK(c.integer("b.k") == 2);
}

TEST_CASE("require_known lists strays") {
    const auto c = Config::parse("[run]\nseed = 1\nsede = 2\n");
    CHECK_NOTHROW(Config::parse("[run]\nseed = 1\n").require_known({"run.seed"}));
    CHECK_THROWS_AS(c.require_known({"run.seed"}), ConfigError);
}

TEST_CASE("parse errors name the origin and line") {
    try {
        Config::parse("[run]\nseed = 1\n\nseed = 2\n", "exp.cfg");
        FAIL("duplicate key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).rfind("exp.cfg:4:", 0) == 0);
    }
}

TEST_CASE("keys nobody reads are reported") {
    const auto c = Config::parse("[run]\nseed = 1\nsede = 2\n");
    CHECK(c.u64("run.seed") == 1);
    CHECK_THROWS_AS(c.require_all_read(), ConfigError);
    CHECK(c.has("run.sede"));
    CHECK_NOTHROW(c.require_all_read());
}
