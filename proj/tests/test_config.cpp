#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "neuroloop/config.hpp"
#include "neuroloop/errors.hpp"

using namespace neuroloop;
namespace fs = std::filesystem;

TEST_CASE("sections flatten to dotted keys") {
    const auto c = Config::parse(
        "seed = 4  # trailing comment\n"
        "[chip]\n"
        "n_neurons = 128\n"
        "[chip.neuron]\n"
        "threshold = 2.5e-11\n"
        "label = \"two words\"\n"
        "parallel = yes\n"
        "levels = 1, -2, 3\n");
    CHECK(c.get_int("seed", 0) == 4);
    CHECK(c.get_int("chip.n_neurons", 0) == 128);
    CHECK(c.get_double("chip.neuron.threshold", 0) == 2.5e-11);
    CHECK(c.get_string("chip.neuron.label", "") == "two words");
    CHECK(c.get_bool("chip.neuron.parallel", false));
    CHECK(c.get_ints("chip.neuron.levels", {}) == std::vector<long long>{1, -2, 3});
    CHECK(c.get_double("missing", 1.5) == 1.5);
}

TEST_CASE("malformed values name the key") {
    const auto c = Config::parse("[dnf]\ntau = fast\nflag = maybe\n");
    try {
        c.get_double("dnf.tau", 0);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field_path == "dnf.tau");
    }
    CHECK_THROWS_AS(c.get_bool("dnf.flag", false), ConfigError);
    CHECK_THROWS_AS(Config::parse("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[open\n"), ConfigError);
}

TEST_CASE("includes resolve relative to the including file and are overridden") {
    const auto dir = fs::temp_directory_path() / "neuroloop_config_test";
    fs::create_directories(dir / "sub");
    {
        std::ofstream(dir / "sub" / "base.cfg") << "[a]\nx = 1\ny = 2\nfile = data.csv\n";
        std::ofstream(dir / "top.cfg") << "include = sub/base.cfg\n[a]\ny = 3\n";
    }
    const auto c = Config::load(dir / "top.cfg");
    CHECK(c.get_int("a.x", 0) == 1);
    CHECK(c.get_int("a.y", 0) == 3);
    CHECK(c.get_path("a.file", {}) == dir / "sub" / "data.csv");
    CHECK(c.unused_keys().empty());
    CHECK_THROWS_AS(Config::load(dir / "absent.cfg"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("unused keys are reported") {
    const auto c = Config::parse("[x]\na = 1\nb = 2\n");
    c.get_int("x.a", 0);
    CHECK(c.unused_keys() == std::vector<std::string>{"x.b"});
}
