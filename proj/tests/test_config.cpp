#include "tsync/config.hpp"
#include "tsync/errors.hpp"

#include "doctest.h"

#include <filesystem>
#include <string>

using namespace tsync;

namespace {

int error_line(const std::string& text, std::string* message = nullptr)
{
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        if (message) {
            *message = e.what();
        }
        return e.line();
    }
    return -1;
}

ScenarioConfig roundtrip(const ScenarioConfig& c)
{
    return parse_config(to_json(c).dump(2));
}

} // namespace

TEST_CASE("empty document gives the defaults")
{
    const ScenarioConfig c = parse_config("{}");
    CHECK(c == ScenarioConfig{});
    CHECK(c.params.v2 == 1.0);
    CHECK(c.populations.counts() == std::pair<std::size_t, std::size_t>{1, 1});
}

TEST_CASE("round trip is the identity")
{
    ScenarioConfig a;
    CHECK(roundtrip(a) == a);

    ScenarioConfig b;
    b.params = {0.3, 1.7, 0.4, 2.5};
    b.populations.fractional = true;
    b.populations.total = 37;
    b.populations.c1 = 0.3;
    b.initial = GaussianStart{-1.0, 0.5, 2.0, 3.0};
    b.horizon = 12.5;
    b.replicas = 9;
    b.seed = 18446744073709551557ULL;
    b.output_dir = "elsewhere";
    b.simulate = {7, true};
    b.two_particle = {10.0, 300, 0.1};
    b.pde.min_cells = 512;
    b.pde.times = {0.1, 0.3};
    b.pde.fv_dt = 1.0 / 3.0;
    b.pde.disagreement_tolerance = 0.01;
    b.scan.totals = {10, 20};
    b.scan.s_values = {0.1, 0.2, 0.3, 0.7};
    b.scan.c1 = 0.25;
    b.scan.replicas = 3;
    CHECK(roundtrip(b) == b);
    CHECK(roundtrip(roundtrip(b)) == b);

    ScenarioConfig c;
    c.populations = {false, 2, 3, 2, 0.5}; // total and c1 are unused with explicit counts
    c.initial = ExplicitStart{{0.1, -0.2}, {1.0 / 7.0, 2.0, 1e-300}};
    CHECK(roundtrip(c) == c);
}

TEST_CASE("hash follows the canonical dump")
{
    ScenarioConfig a;
    ScenarioConfig b = roundtrip(a);
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("fractional population out of range names the field and line")
{
    const std::string text = "{\n"
                             "  \"params\": {\"v1\": 0, \"v2\": 1},\n"
                             "  \"populations\": {\n"
                             "    \"total\": 100,\n"
                             "    \"c1\": 1.2\n"
                             "  }\n"
                             "}\n";
    std::string message;
    CHECK(error_line(text, &message) == 5);
    CHECK(message.find("populations.c1") != std::string::npos);
    CHECK(message.find("line 5") != std::string::npos);
}

TEST_CASE("malformed JSON reports the line")
{
    const std::string text = "{\n  \"horizon\": 3,\n  \"seed\": ,\n}\n";
    CHECK(error_line(text) == 3);
}

TEST_CASE("unknown and mistyped keys are rejected")
{
    CHECK(error_line("{\n\"horizon\": 1,\n\"horizn\": 2}") == 3);
    CHECK(error_line("{\"params\": {\n\"v1\": \"fast\"}}") == 2);
    CHECK(error_line("{\"replicas\": -3}") == 1);
    CHECK(error_line("{\"populations\": {\"n1\": 2, \"c1\": 0.5}}") == 1);
    CHECK(error_line("{\"initial\": {\"kind\": \"uniform\"}}") == 1);
}

TEST_CASE("cross-field checks")
{
    CHECK_THROWS_AS(parse_config("{\"params\": {\"v1\": 2, \"v2\": 1}}"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"horizon\": 0}"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"populations\": {\"n1\": 2, \"n2\": 1},"
                                 " \"initial\": {\"kind\": \"explicit\", \"positions1\": [0], \"positions2\": [0]}}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("{\"populations\": {\"total\": 1, \"c1\": 0.5}}"), ConfigError);
    CHECK_NOTHROW(parse_config("{\"populations\": {\"total\": 10, \"c1\": 0.5}}"));
    ScenarioConfig c;
    c.scan.s_values = {1.0, 1.0, 2.0, 3.0};
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("shipped example configs load and round-trip")
{
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(TSYNC_CONFIG_DIR)) {
        const ScenarioConfig c = load_config(entry.path());
        CHECK_MESSAGE(roundtrip(c) == c, entry.path().string());
        ++count;
    }
    CHECK(count >= 4);
}
