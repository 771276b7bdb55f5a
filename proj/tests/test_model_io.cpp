#include <catch2/catch.hpp>

#include <vector>

#include "sarcd/model_io.hpp"
#include "sarcd/rng.hpp"
#include "temp_files.hpp"

using namespace sarcd;

namespace {

PcaNetModel sample_model() {
    // h=5, k=3, L1=2, L2=3, block=5 -> B=2, D = 2*2*8 = 32
    PcaNetModel m;
    m.h = 5;
    m.k = 3;
    m.block_side = 5;
    m.normalize_hist = true;
    Rng rng(19);
    auto fill_bank = [&](FilterBank& bank, int count) {
        bank.k = 3;
        for (int j = 0; j < count; ++j) {
            Mat f(3, 3);
            for (double& v : f.v)
                v = 2.0 * rng.next_real() - 1.0;
            bank.filters.push_back(std::move(f));
        }
    };
    fill_bank(m.stage1, 2);
    fill_bank(m.stage2, 3);
    m.classifier.weights.resize(32);
    for (double& w : m.classifier.weights)
        w = 2.0 * rng.next_real() - 1.0;
    m.classifier.bias = 0.25;
    return m;
}

} // namespace

TEST_CASE("model serialization round-trips byte for byte", "[modelio]") {
    TempDir tmp;
    const PcaNetModel m = sample_model();
    const std::string path = tmp.path("m.pcnm");
    save_model(m, path);
    const PcaNetModel back = load_model(path);
    CHECK(back.h == m.h);
    CHECK(back.k == m.k);
    CHECK(back.block_side == m.block_side);
    CHECK(back.normalize_hist == m.normalize_hist);
    REQUIRE(back.stage1.filters.size() == 2);
    REQUIRE(back.stage2.filters.size() == 3);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(back.stage1.filters[j].v == m.stage1.filters[j].v);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(back.stage2.filters[j].v == m.stage2.filters[j].v);
    CHECK(back.classifier.weights == m.classifier.weights);
    CHECK(back.classifier.bias == m.classifier.bias);

    const std::string path2 = tmp.path("m2.pcnm");
    save_model(back, path2);
    CHECK(read_bytes(path) == read_bytes(path2));
}

TEST_CASE("corruption and truncation are detected distinctly", "[modelio]") {
    const PcaNetModel m = sample_model();
    std::vector<std::uint8_t> bytes = serialize_model(m);

    SECTION("flipping any payload byte breaks the CRC") {
        for (std::size_t pos : {std::size_t(10), bytes.size() / 2, bytes.size() - 6}) {
            auto corrupted = bytes;
            corrupted[pos] ^= 0x40;
            CHECK_THROWS_WITH(deserialize_model(corrupted), Catch::Contains("CRC"));
        }
    }
    SECTION("truncated file") {
        auto truncated = bytes;
        truncated.resize(bytes.size() / 2);
        CHECK_THROWS_WITH(deserialize_model(truncated),
                          Catch::Contains("truncated") || Catch::Contains("CRC"));
        auto tiny = bytes;
        tiny.resize(10);
        CHECK_THROWS_WITH(deserialize_model(tiny), Catch::Contains("truncated"));
    }
    SECTION("bad magic") {
        auto wrong = bytes;
        wrong[0] = 'X';
        CHECK_THROWS_WITH(deserialize_model(wrong), Catch::Contains("magic"));
    }
    SECTION("unsupported version") {
        auto patched = bytes;
        patched[4] = 9; // version field, little-endian
        const std::uint32_t crc = detail::crc32(patched.data(), patched.size() - 4);
        for (int i = 0; i < 4; ++i)
            patched[patched.size() - 4 + i] =
                static_cast<std::uint8_t>((crc >> (8 * i)) & 0xFF);
        CHECK_THROWS_WITH(deserialize_model(patched), Catch::Contains("version"));
    }
    SECTION("inconsistent feature length") {
        auto patched = bytes;
        patched[28] = 31; // D field
        const std::uint32_t crc = detail::crc32(patched.data(), patched.size() - 4);
        for (int i = 0; i < 4; ++i)
            patched[patched.size() - 4 + i] =
                static_cast<std::uint8_t>((crc >> (8 * i)) & 0xFF);
        CHECK_THROWS_WITH(deserialize_model(patched),
                          Catch::Contains("inconsistent") || Catch::Contains("truncated"));
    }
    SECTION("serialize rejects a mismatched classifier") {
        PcaNetModel bad = m;
        bad.classifier.weights.resize(7);
        CHECK_THROWS_AS(serialize_model(bad), param_error);
    }
}
