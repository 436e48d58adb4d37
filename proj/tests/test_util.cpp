#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <vector>

#include "credit/error.hpp"
#include "credit/util.hpp"

using namespace credit;

TEST_CASE("Rng is the standard 64-bit Mersenne Twister underneath") {
    Rng rng(5489);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) x = rng.next();
    CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("Rng draws stay in range and repeat per seed") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == b.unit());
        const std::size_t k = a.index(7);
        CHECK(k < 7);
        CHECK(k == b.index(7));
    }
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    Rng c(3);
    c.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

TEST_CASE("Rng normal has unit moments") {
    Rng rng(9);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::fabs(sum / n) < 0.01);
    CHECK(std::fabs(sq / n - 1.0) < 0.01);
}

TEST_CASE("number formatting") {
    CHECK(format_shortest(0.1) == "0.1");
    CHECK(format_shortest(kNaN) == "");
    CHECK(format_g17(0.1) == "0.10000000000000001");
    CHECK(format_g17(42.0) == "42");
}

TEST_CASE("dump_json layout") {
    Json doc;
    doc["a"] = 1;
    doc["b"] = Json::array({1.5, 2.0});
    doc["c"] = std::numeric_limits<double>::infinity();
    doc["d"] = Json::object();
    CHECK(dump_json(doc) == "{\n  \"a\": 1,\n  \"b\": [1.5, 2],\n  \"c\": null,\n  \"d\": {}\n}\n");
}

TEST_CASE("csv splitting honours quotes") {
    CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(split_csv_line("\"x,y\",\"he said \"\"hi\"\"\"") == std::vector<std::string>{"x,y", "he said \"hi\""});
    const CsvFile csv = parse_csv_text("\xEF\xBB\xBFh1,h2\r\n1,2\r\n\r\n3,4\n");
    CHECK(csv.header == std::vector<std::string>{"h1", "h2"});
    REQUIRE(csv.rows.size() == 2);
    CHECK(csv.rows[1] == std::vector<std::string>{"3", "4"});
    CHECK_THROWS_AS(parse_csv_text(""), Error);
}

TEST_CASE("numeric parsing") {
    double d = 0.0;
    CHECK(parse_double(" -1.25 ", d));
    CHECK(d == -1.25);
    CHECK(parse_double("+3", d));
    CHECK(d == 3.0);
    CHECK_FALSE(parse_double("", d));
    CHECK_FALSE(parse_double("1.2.3", d));
    std::int64_t i = 0;
    CHECK(parse_int64("17", i));
    CHECK(i == 17);
    CHECK_FALSE(parse_int64("1.5", i));
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("parallel_for visits every index once and forwards errors") {
    for (int threads : {1, 3, 8}) {
        std::vector<std::atomic<int>> hits(101);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) CHECK(h.load() == 1);
    }
    CHECK_THROWS_AS(parallel_for(10, 4,
                                 [](std::size_t i) {
                                     if (i == 7) throw Error(ErrorCode::InvalidData, "boom");
                                 }),
                    Error);
}

TEST_CASE("file round trip creates parent directories") {
    const auto dir = std::filesystem::temp_directory_path() / "credit_test_util";
    std::filesystem::remove_all(dir);
    write_file(dir / "a" / "b.txt", "hello");
    CHECK(read_file(dir / "a" / "b.txt") == "hello");
    write_file(dir / "bad.json", "{");
    try {
        read_json(dir / "bad.json");
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidConfig);
    }
    CHECK_THROWS_AS(read_file(dir / "missing"), Error);
    std::filesystem::remove_all(dir);
}
