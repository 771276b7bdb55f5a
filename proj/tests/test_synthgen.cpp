#include <catch2/catch.hpp>

#include <cmath>

#include "sarcd/synthgen.hpp"

using namespace sarcd;

TEST_CASE("generate_reflectivity places discs only in the second date", "[synthgen]") {
    SECTION("no blobs means no change") {
        SceneSpec spec;
        spec.width = 20;
        spec.height = 20;
        spec.n_blobs = 0;
        const CleanScene s = generate_reflectivity(spec);
        CHECK(s.t1.values == s.t2.values);
        for (auto l : s.ref.labels)
            CHECK(l == 0);
    }
    SECTION("reference equals the support of the reflectivity difference") {
        SceneSpec spec;
        spec.width = 40;
        spec.height = 40;
        spec.n_blobs = 4;
        spec.radius_min = 2.0;
        spec.radius_max = 6.0;
        spec.seed = 11;
        const CleanScene s = generate_reflectivity(spec);
        for (std::size_t i = 0; i < s.ref.size(); ++i)
            REQUIRE((s.ref.labels[i] == 1) == (s.t1.values[i] != s.t2.values[i]));
    }
    SECTION("an interior radius-3 disc covers exactly 29 pixels") {
        SceneSpec spec;
        spec.width = 32;
        spec.height = 32;
        spec.n_blobs = 1;
        spec.radius_min = 3.0;
        spec.radius_max = 3.0;

        bool found_interior = false;
        for (std::uint64_t seed = 0; seed < 64 && !found_interior; ++seed) {
            spec.seed = seed;
            const CleanScene s = generate_reflectivity(spec);
            // infer the center from the changed-pixel centroid
            double sum_r = 0, sum_c = 0;
            long long n = 0;
            for (int r = 0; r < 32; ++r)
                for (int c = 0; c < 32; ++c)
                    if (s.ref.at(r, c)) {
                        sum_r += r;
                        sum_c += c;
                        ++n;
                    }
            REQUIRE(n >= 1);
            const int cy = static_cast<int>(std::llround(sum_r / n));
            const int cx = static_cast<int>(std::llround(sum_c / n));
            if (cy < 3 || cy > 28 || cx < 3 || cx > 28)
                continue;
            found_interior = true;
            CHECK(n == 29); // brute-force |{(x,y): x^2 + y^2 <= 9}|
            for (int r = 0; r < 32; ++r)
                for (int c = 0; c < 32; ++c) {
                    const bool inside =
                        (r - cy) * (r - cy) + (c - cx) * (c - cx) <= 9;
                    REQUIRE((s.ref.at(r, c) == 1) == inside);
                }
        }
        REQUIRE(found_interior);
    }
    SECTION("impossible geometry is rejected") {
        SceneSpec spec;
        spec.width = 16;
        spec.height = 16;
        spec.radius_min = 10.0;
        spec.radius_max = 20.0;
        CHECK_THROWS_AS(generate_reflectivity(spec), param_error);
        SceneSpec flat;
        flat.fg_level = flat.bg_level;
        CHECK_THROWS_AS(generate_reflectivity(flat), param_error);
        SceneSpec no_looks;
        no_looks.looks = 0;
        CHECK_THROWS_AS(generate_reflectivity(no_looks), param_error);
    }
}

TEST_CASE("gamma speckle has unit mean and variance 1/looks", "[synthgen]") {
    for (int looks : {1, 4}) {
        Rng rng(100 + looks);
        const int n = 1000000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = gamma_speckle_draw(looks, rng);
            sum += g;
            sum_sq += g * g;
        }
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        CHECK(std::fabs(mean - 1.0) <= 0.005);
        CHECK(std::fabs(var - 1.0 / looks) <= 0.05 / looks);
    }
}

TEST_CASE("apply_speckle is multiplicative", "[synthgen]") {
    Raster zero(8, 8, 0.0);
    Rng rng(3);
    const Raster out = apply_speckle(zero, 2, rng);
    for (double v : out.values)
        CHECK(v == 0.0);
    CHECK_THROWS_AS(apply_speckle(zero, 0, rng), param_error);
}

TEST_CASE("generate_scene is seed-deterministic", "[synthgen]") {
    SceneSpec spec;
    spec.seed = 77;
    const Scene a = generate_scene(spec);
    const Scene b = generate_scene(spec);
    CHECK(a.pair.t1.values == b.pair.t1.values);
    CHECK(a.pair.t2.values == b.pair.t2.values);
    CHECK(a.ref.labels == b.ref.labels);
}

TEST_CASE("speckle vanishes in the many-looks limit", "[synthgen]") {
    Raster clean(4, 4, 80.0);
    Rng rng(5);
    const Raster out = apply_speckle(clean, 1000000, rng);
    for (double v : out.values)
        CHECK(std::fabs(v - 80.0) / 80.0 <= 0.01);
}

TEST_CASE("scene statistics track the reflectivity levels", "[synthgen]") {
    SceneSpec spec; // default 128x128, 3 blobs, looks 2, bg 60, fg 140
    spec.seed = 0;
    const Scene s = generate_scene(spec);

    SECTION("changed-region mean near fg within 3 sigma") {
        double sum = 0.0;
        long long n = 0;
        for (std::size_t i = 0; i < s.ref.size(); ++i)
            if (s.ref.labels[i]) {
                sum += s.pair.t2.values[i];
                ++n;
            }
        REQUIRE(n > 100);
        const double mean = sum / n;
        const double sigma = spec.fg_level / std::sqrt(static_cast<double>(spec.looks) * n);
        CHECK(std::fabs(mean - spec.fg_level) <= 3.0 * sigma);
    }
    SECTION("64x64 block averages approach the clean background") {
        // t1 is clean background everywhere
        for (int br = 0; br < 2; ++br)
            for (int bc = 0; bc < 2; ++bc) {
                double sum = 0.0;
                for (int r = br * 64; r < (br + 1) * 64; ++r)
                    for (int c = bc * 64; c < (bc + 1) * 64; ++c)
                        sum += s.pair.t1.at(r, c);
                const double mean = sum / 4096.0;
                CHECK(std::fabs(mean - spec.bg_level) / spec.bg_level <= 0.02);
            }
    }
    SECTION("the two noise fields are uncorrelated") {
        SceneSpec flat = spec;
        flat.n_blobs = 0;
        const Scene f = generate_scene(flat);
        double m1 = 0, m2 = 0;
        const std::size_t n = f.pair.t1.size();
        for (std::size_t i = 0; i < n; ++i) {
            m1 += f.pair.t1.values[i];
            m2 += f.pair.t2.values[i];
        }
        m1 /= n;
        m2 /= n;
        double c12 = 0, v1 = 0, v2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d1 = f.pair.t1.values[i] - m1;
            const double d2 = f.pair.t2.values[i] - m2;
            c12 += d1 * d2;
            v1 += d1 * d1;
            v2 += d2 * d2;
        }
        CHECK(std::fabs(c12 / std::sqrt(v1 * v2)) <= 0.01);
    }
}

TEST_CASE("quantize rounds and clamps to the depth range", "[synthgen]") {
    Raster r(5, 1);
    r.values = {-3.0, 0.4, 254.6, 300.7, 70000.0};
    const Raster q8 = quantize(r, 8);
    CHECK(q8.values == std::vector<double>{0, 0, 255, 255, 255});
    const Raster q16 = quantize(r, 16);
    CHECK(q16.values == std::vector<double>{0, 0, 255, 301, 65535});
    CHECK_THROWS_AS(quantize(r, 12), param_error);
}
