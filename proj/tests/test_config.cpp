#include "doctest.h"
#include "wloo/config.hpp"
#include "wloo/error.hpp"

using namespace wloo;

TEST_CASE("defaults cover the whole schema") {
    const Config c;
    for (const auto& k : config_schema()) {
        CHECK(c.raw(k.name) == k.default_value);
        CHECK_FALSE(c.is_set(k.name));
    }
    CHECK(c.integer("measure.N") == 1024);
    CHECK(c.flag("estimate.clamp"));
}

TEST_CASE("parsing handles comments, quotes and whitespace") {
    const Config c = Config::parse(
        "# header\n"
        "  kernel.theta = 7.5   # trailing\n"
        "\n"
        "design.file = \"a # b.csv\"\n"
        "sweep.thetas = 1, 2 ,3\n"
        "output.dir = \"say \\\"hi\\\"\"\n");
    CHECK(c.real("kernel.theta") == 7.5);
    CHECK(c.raw("design.file") == "a # b.csv");
    CHECK(c.reals("sweep.thetas") == std::vector<double>{1, 2, 3});
    CHECK(c.raw("output.dir") == "say \"hi\"");
    CHECK(c.is_set("kernel.theta"));
    CHECK_FALSE(c.is_set("kernel.family"));
}

TEST_CASE("bad config text is a ConfigError") {
    for (const char* text : {"nope.key = 1\n", "kernel.theta\n", "design.file = \"open\n"}) {
        try {
            Config::parse(text);
            FAIL("expected ConfigError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ConfigError);
        }
    }
    CHECK_THROWS_AS(Config::load("/nonexistent/wloo.conf"), Error);
}

TEST_CASE("typed getters validate values") {
    Config c;
    c.set("kernel.theta", "abc");
    CHECK_THROWS_AS(c.real("kernel.theta"), Error);
    c.set("run.seed", "-4");
    CHECK_THROWS_AS(c.u64("run.seed"), Error);
    c.set("run.seed", "18446744073709551615");
    CHECK(c.u64("run.seed") == 18446744073709551615ULL);
    c.set("estimate.clamp", "maybe");
    CHECK_THROWS_AS(c.flag("estimate.clamp"), Error);
    c.set("estimate.clamp", "off");
    CHECK_FALSE(c.flag("estimate.clamp"));
    c.set("measure.N", "12.5");
    CHECK_THROWS_AS(c.integer("measure.N"), Error);
    c.set("sweep.thetas", "1,x");
    CHECK_THROWS_AS(c.reals("sweep.thetas"), Error);
    CHECK_THROWS_AS(c.set("no.such", "1"), Error);
    CHECK_THROWS_AS(c.raw("no.such"), Error);
}

TEST_CASE("environment mapping") {
    CHECK(env_name("kernel.theta") == "WLOO_KERNEL_THETA");
    CHECK(env_name("truth.compute_V") == "WLOO_TRUTH_COMPUTE_V");
    Config c;
    c.apply_env({{"WLOO_KERNEL_THETA", "3"}, {"WLOO_NOT_A_KEY", "1"}, {"OTHER", "x"}});
    CHECK(c.real("kernel.theta") == 3);
    CHECK(c.is_set("kernel.theta"));
}

TEST_CASE("serialization round trip") {
    Config c;
    c.set("design.file", "we\"ird \\ path # x.csv");
    c.set("kernel.mixture_thetas", "1,2");
    const Config r = Config::parse(c.serialize(false));
    CHECK(r.raw("design.file") == c.raw("design.file"));
    CHECK(r.raw("kernel.mixture_thetas") == "1,2");
    CHECK_FALSE(r.is_set("kernel.family"));
    const Config all = Config::parse(c.serialize(true));
    for (const auto& k : config_schema()) CHECK(all.raw(k.name) == c.raw(k.name));
}
