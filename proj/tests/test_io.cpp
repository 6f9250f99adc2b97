#include "doctest.h"

#include "sustain/error.hpp"
#include "sustain/io.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

using namespace sustain;
using namespace sustain::io;

TEST_CASE("format_number round-trips") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(3.0) == "3");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    std::mt19937_64 g(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::ldexp(std::uniform_real_distribution<double>(-1, 1)(g), static_cast<int>(g() % 200) - 100);
        CHECK(std::stod(format_number(v)) == v);
    }
}

TEST_CASE("csv round trip") {
    OutputTable t;
    t.columns = {"t", "x"};
    t.add_row({0.0, 1.5});
    t.add_row({0.25, std::numeric_limits<double>::quiet_NaN()});
    const auto text = to_csv(t);
    CHECK(text == "t,x\n0,1.5\n0.25,nan\n");
    const auto back = parse_csv(text);
    CHECK(back.columns == t.columns);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0] == t.rows[0]);
    CHECK(std::isnan(back.rows[1][1]));
    CHECK(back.column_index("x") == 1);
    CHECK_THROWS(back.column_index("y"));
}

TEST_CASE("rows must match the header") {
    OutputTable t;
    t.columns = {"a", "b"};
    CHECK_THROWS_AS(t.add_row({1.0}), Error);
    CHECK_THROWS(parse_csv("a,b\n1\n"));
}

TEST_CASE("sha256 of known strings") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("files round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "sustain_io_test";
    std::filesystem::remove_all(dir);
    write_file(dir / "nested" / "a.txt", "hello\n");
    CHECK(read_file(dir / "nested" / "a.txt") == "hello\n");
    CHECK_THROWS(read_file(dir / "missing.txt"));
    std::filesystem::remove_all(dir);
}
