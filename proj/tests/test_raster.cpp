#include <catch2/catch.hpp>

#include <cmath>

#include "sarcd/raster.hpp"
#include "sarcd/rng.hpp"
#include "temp_files.hpp"

using namespace sarcd;

TEST_CASE("load_raster reads 8-bit P5 byte for byte", "[raster]") {
    TempDir tmp;
    const std::string path = tmp.path("a.pgm");
    write_bytes(path, std::string("P5\n2 2\n255\n") + '\x00' + '\x80' + '\xff' + '\x07');
    const Raster r = load_raster(path);
    REQUIRE(r.width == 2);
    REQUIRE(r.height == 2);
    CHECK(r.values == std::vector<double>{0, 128, 255, 7});
}

TEST_CASE("load_raster reads 16-bit samples big-endian", "[raster]") {
    TempDir tmp;
    const std::string path = tmp.path("b.pgm");
    write_bytes(path, std::string("P5\n1 1\n65535\n") + '\x01' + '\x00');
    const Raster r = load_raster(path);
    CHECK(r.values == std::vector<double>{256});
}

TEST_CASE("load_raster tolerates comments in the header", "[raster]") {
    TempDir tmp;
    const std::string path = tmp.path("c.pgm");
    write_bytes(path, std::string("P5\n# a comment\n1 1\n255\n") + '\x2a');
    CHECK(load_raster(path).values == std::vector<double>{42});
}

TEST_CASE("load_raster rejects malformed input with byte offsets", "[raster]") {
    TempDir tmp;

    const std::string ascii = tmp.path("ascii.pgm");
    write_bytes(ascii, "P2\n1 1\n255\n42\n");
    CHECK_THROWS_AS(load_raster(ascii), format_error);
    CHECK_THROWS_WITH(load_raster(ascii), Catch::Contains("P2"));

    const std::string truncated = tmp.path("short.pgm");
    write_bytes(truncated, std::string("P5\n2 2\n255\n") + '\x01' + '\x02');
    CHECK_THROWS_WITH(load_raster(truncated), Catch::Contains("truncated"));

    const std::string badmax = tmp.path("badmax.pgm");
    write_bytes(badmax, "P5\n1 1\n70000\n");
    CHECK_THROWS_WITH(load_raster(badmax), Catch::Contains("max-value"));

    CHECK_THROWS_AS(load_raster(tmp.path("missing.pgm")), format_error);
}

TEST_CASE("save_raster writes the expected payload and range-checks", "[raster]") {
    TempDir tmp;
    Raster r(1, 1);
    r.values[0] = 255.0;
    const std::string path = tmp.path("d.pgm");
    save_raster(r, path, 8);
    const std::string bytes = read_bytes(path);
    REQUIRE(bytes.size() >= 1);
    CHECK(static_cast<unsigned char>(bytes.back()) == 0xFF);

    r.values[0] = 256.0;
    CHECK_THROWS_AS(save_raster(r, path, 8), format_error);
    CHECK_THROWS_WITH(save_raster(r, path, 8), Catch::Contains("pixel"));
    save_raster(r, path, 16); // fits the wider depth
    CHECK(load_raster(path).values == std::vector<double>{256});
}

TEST_CASE("PGM round-trip reproduces random integer rasters exactly", "[raster]") {
    TempDir tmp;
    Rng rng(5);
    for (int depth : {8, 16}) {
        const double maxval = depth == 8 ? 255.0 : 65535.0;
        Raster r(9, 7);
        for (double& v : r.values)
            v = static_cast<double>(rng.below(static_cast<std::uint64_t>(maxval) + 1));
        const std::string path = tmp.path("rt.pgm");
        save_raster(r, path, depth);
        const Raster back = load_raster(path);
        REQUIRE(back.width == r.width);
        REQUIRE(back.height == r.height);
        CHECK(back.values == r.values);
    }
}

TEST_CASE("load_pair enforces alignment", "[raster]") {
    TempDir tmp;
    Raster a(4, 4, 1.0), b(4, 5, 2.0);
    save_raster(a, tmp.path("a.pgm"), 8);
    save_raster(a, tmp.path("a2.pgm"), 8);
    save_raster(b, tmp.path("b.pgm"), 8);

    const TemporalPair p = load_pair(tmp.path("a.pgm"), tmp.path("a2.pgm"));
    CHECK(p.t1.values == p.t2.values);

    CHECK_THROWS_WITH(load_pair(tmp.path("a.pgm"), tmp.path("b.pgm")),
                      Catch::Contains("4x4") && Catch::Contains("4x5"));
}

TEST_CASE("reference maps binarize on load and save as 0/255", "[raster]") {
    TempDir tmp;
    Raster r(3, 1);
    r.values = {0, 7, 255};
    save_raster(r, tmp.path("ref.pgm"), 8);
    const ReferenceMap m = load_reference(tmp.path("ref.pgm"));
    CHECK(m.labels == std::vector<std::uint8_t>{0, 1, 1});
    save_reference(m, tmp.path("ref2.pgm"));
    CHECK(load_raster(tmp.path("ref2.pgm")).values == std::vector<double>{0, 255, 255});
}

TEST_CASE("log_ratio matches the per-pixel definition", "[raster]") {
    SECTION("identical inputs give zero") {
        TemporalPair p = make_pair(Raster(4, 3, 17.0), Raster(4, 3, 17.0));
        const Raster d = log_ratio(p, 0.5);
        for (double v : d.values)
            CHECK(v == 0.0);
    }
    SECTION("analytic value") {
        Raster t1(1, 1, 0.0), t2(1, 1, std::exp(1.0) - 1.0);
        const Raster d = log_ratio(make_pair(t1, t2), 1.0);
        CHECK(d.values[0] == Approx(1.0).epsilon(1e-12));
    }
    SECTION("random pair against a direct evaluation") {
        Rng rng(77);
        Raster t1(8, 6), t2(8, 6);
        for (std::size_t i = 0; i < t1.size(); ++i) {
            t1.values[i] = 300.0 * rng.next_real();
            t2.values[i] = 300.0 * rng.next_real();
        }
        const double offset = 1.0;
        const Raster d = log_ratio(make_pair(t1, t2), offset);
        for (std::size_t i = 0; i < t1.size(); ++i) {
            const double expect =
                std::fabs(std::log((t2.values[i] + offset) / (t1.values[i] + offset)));
            REQUIRE(d.values[i] == Approx(expect).margin(1e-12));
        }
    }
    SECTION("symmetric under swapping the dates, finite everywhere") {
        Rng rng(78);
        Raster t1(5, 5), t2(5, 5);
        for (std::size_t i = 0; i < t1.size(); ++i) {
            t1.values[i] = 100.0 * rng.next_real();
            t2.values[i] = 100.0 * rng.next_real();
        }
        const Raster fwd = log_ratio(make_pair(t1, t2), 1.0);
        const Raster rev = log_ratio(make_pair(t2, t1), 1.0);
        for (std::size_t i = 0; i < fwd.size(); ++i) {
            // the two divisions round differently, so equality is up to 1 ulp
            CHECK(fwd.values[i] == Approx(rev.values[i]).margin(1e-12));
            CHECK(std::isfinite(fwd.values[i]));
        }
    }
    SECTION("offset must be positive") {
        TemporalPair p = make_pair(Raster(1, 1, 1.0), Raster(1, 1, 1.0));
        CHECK_THROWS_AS(log_ratio(p, 0.0), param_error);
    }
}
