#include <cstdlib>
#include <random>
#include <sstream>

#include <doctest.h>

#include "scitrend/Errors.h"
#include "scitrend/Random.h"
#include "scitrend/Util.h"

using namespace scitrend;

TEST_CASE("formatDouble renders compact platform-independent numbers") {
    CHECK(formatDouble(1.0) == "1");
    CHECK(formatDouble(0.05) == "0.05");
    CHECK(formatDouble(-2.5) == "-2.5");
    CHECK(formatDouble(0.0) == "0");
    // The round trip through text reproduces the exact double.
    CHECK(std::stod(formatDouble(0.123456789012)) == 0.123456789012);
    CHECK(std::stod(formatDouble(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(std::stod(formatDouble(1e-17)) == 1e-17);
}

TEST_CASE("fnv1a64 matches published test vectors") {
    CHECK(fnv1a64(std::string("")) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64(std::string("a")) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64(std::string("foobar")) == 0x85944171f73967e8ULL);
}

TEST_CASE("toHex is fixed-width lowercase") {
    CHECK(toHex(0) == "0000000000000000");
    CHECK(toHex(0xcbf29ce484222325ULL) == "cbf29ce484222325");
    CHECK(toHex(1) == "0000000000000001");
}

TEST_CASE("trim strips outer whitespace only") {
    CHECK(trim("  a b \t") == "a b");
    CHECK(trim("\r\n") == "");
    CHECK(trim("x") == "x");
}

TEST_CASE("splitCsvLine and csvEscape round-trip") {
    auto fields = splitCsvLine("a,\"b,c\",\"d\"\"e\",f");
    REQUIRE(fields.size() == 4);
    CHECK(fields[0] == "a");
    CHECK(fields[1] == "b,c");
    CHECK(fields[2] == "d\"e");
    CHECK(fields[3] == "f");

    std::vector<std::string> raw = {"plain", "with,comma", "with\"quote", "with\nnewline", ""};
    std::string line;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i > 0) line += ',';
        line += csvEscape(raw[i]);
    }
    CHECK(splitCsvLine(line) == raw);
}

TEST_CASE("expandEnv substitutes process environment") {
    ::setenv("SCITREND_TEST_VAR", "hello", 1);
    CHECK(expandEnv("x-${SCITREND_TEST_VAR}-y") == "x-hello-y");
    ::unsetenv("SCITREND_TEST_VAR");
    CHECK(expandEnv("x-${SCITREND_TEST_VAR}-y") == "x--y");
    CHECK(expandEnv("no refs") == "no refs");
    CHECK_THROWS_AS((void)expandEnv("${unterminated"), ConfigError);
}

TEST_CASE("parseKeyValues handles comments, blanks, and overrides") {
    std::istringstream in(
        "# comment\n"
        "\n"
        "alpha = 1\n"
        "beta= two words \n"
        "alpha = 3\n");
    auto map = parseKeyValues(in);
    REQUIRE(map.size() == 2);
    CHECK(map.at("alpha") == "3");
    CHECK(map.at("beta") == "two words");
}

TEST_CASE("parseKeyValues rejects lines without a separator") {
    std::istringstream in("not a pair\n");
    CHECK_THROWS_AS((void)parseKeyValues(in), ConfigError);
}

TEST_CASE("deriveSeed is deterministic and stream-separating") {
    CHECK(deriveSeed(42, 1) == deriveSeed(42, 1));
    CHECK(deriveSeed(42, 1) != deriveSeed(42, 2));
    CHECK(deriveSeed(42, 1) != deriveSeed(43, 1));
}

TEST_CASE("uniform draws stay inside their intervals") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 10000; ++i) {
        double u = nextUniform(rng);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double v = nextUniformOpen(rng);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("gaussian and laplace draws have unit variance") {
    std::mt19937_64 rng(11);
    const int n = 200000;
    double gSum = 0.0, gSq = 0.0, lSum = 0.0, lSq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = nextGaussian(rng);
        gSum += g;
        gSq += g * g;
        double l = nextLaplace(rng);
        lSum += l;
        lSq += l * l;
    }
    CHECK(gSum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(gSq / n == doctest::Approx(1.0).epsilon(0.03));
    CHECK(lSum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(lSq / n == doctest::Approx(1.0).epsilon(0.03));
}
