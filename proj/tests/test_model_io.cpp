#include <doctest.h>

#include <cstring>
#include <filesystem>

#include <zlib.h>

#include "exiffi/errors.hpp"
#include "exiffi/forest.hpp"
#include "exiffi/importance.hpp"
#include "exiffi/model_io.hpp"
#include "test_util.hpp"
#include "testkit.hpp"

using namespace exiffi;
using namespace exiffi::testkit;

namespace {

Forest fitted_example(Mode mode, std::uint64_t seed) {
    Dataset d = random_dataset(400, 5, seed, 0.1);
    ForestParams params;
    params.mode = mode;
    params.n_trees = 25;
    params.sample_size = 128;
    params.seed = seed;
    params.contamination = 0.1;
    return fit(d, params);
}

void patch_u32(std::vector<std::uint8_t>& bytes, std::size_t offset,
               std::uint32_t value) {
    std::memcpy(bytes.data() + offset, &value, 4);
}

void refresh_checksum(std::vector<std::uint8_t>& bytes) {
    auto crc = ::crc32(0L, bytes.data(),
                       static_cast<uInt>(bytes.size() - 4));
    patch_u32(bytes, bytes.size() - 4, static_cast<std::uint32_t>(crc));
}

}  // namespace

TEST_CASE("serialized models restore every score bit for bit") {
    for (Mode mode : {Mode::IF, Mode::EIF, Mode::EIFPlus}) {
        Forest f = fitted_example(mode, 42);
        std::vector<std::uint8_t> bytes = serialize_model(f);
        Forest g = deserialize_model(bytes);

        CHECK(g.params.mode == f.params.mode);
        CHECK(g.params.n_trees == f.params.n_trees);
        CHECK(g.sample_size_used == f.sample_size_used);
        CHECK(g.max_depth_used == f.max_depth_used);
        CHECK(g.threshold == f.threshold);
        CHECK(g.contamination_used == f.contamination_used);

        Dataset probe = random_dataset(100, 5, 7);
        CHECK(anomaly_scores(f, probe) == anomaly_scores(g, probe));
        // Importance paths survive as well, not just scores.
        auto r = probe.row(3);
        std::vector<double> x(r.begin(), r.end());
        CHECK(local_importance(f, x).lfi == local_importance(g, x).lfi);
        // Re-serializing is byte-identical.
        CHECK(serialize_model(g) == bytes);
    }
}

TEST_CASE("model files round trip on disk") {
    TempDir dir("model_io");
    Forest f = fitted_example(Mode::EIFPlus, 11);
    save_model(f, dir.file("model.bin"));
    Forest g = load_model(dir.file("model.bin"));
    CHECK(serialize_model(g) == serialize_model(f));

    CHECK_THROWS_AS(load_model(dir.file("absent.bin")), IoError);
}

TEST_CASE("corruption is detected, not silently accepted") {
    Forest f = fitted_example(Mode::EIF, 5);
    std::vector<std::uint8_t> bytes = serialize_model(f);

    SUBCASE("byte flips anywhere in the payload") {
        for (std::size_t pos : {8UL, 40UL, bytes.size() / 2, bytes.size() - 5}) {
            std::vector<std::uint8_t> bad = bytes;
            bad[pos] ^= 0x40;
            CHECK_THROWS_AS(deserialize_model(bad), CorruptionError);
        }
    }

    SUBCASE("truncation") {
        for (std::size_t keep : {0UL, 3UL, 12UL, bytes.size() - 1}) {
            std::vector<std::uint8_t> bad(bytes.begin(), bytes.begin() + keep);
            CHECK_THROWS_AS(deserialize_model(bad), CorruptionError);
        }
    }

    SUBCASE("wrong magic") {
        std::vector<std::uint8_t> bad = bytes;
        bad[0] = 'Y';
        CHECK_THROWS_AS(deserialize_model(bad), CorruptionError);
    }

    SUBCASE("trailing garbage") {
        std::vector<std::uint8_t> bad = bytes;
        bad.push_back(0);
        CHECK_THROWS_AS(deserialize_model(bad), CorruptionError);
    }
}

TEST_CASE("future format versions are refused distinctly") {
    Forest f = fitted_example(Mode::IF, 5);
    std::vector<std::uint8_t> bytes = serialize_model(f);
    // Bump the version field and fix up the checksum so only the version
    // check can object.
    patch_u32(bytes, 4, 99);
    refresh_checksum(bytes);
    CHECK_THROWS_AS(deserialize_model(bytes), VersionError);
}

TEST_CASE("structural violations in node tables are rejected") {
    Forest f = fitted_example(Mode::IF, 8);
    std::vector<std::uint8_t> bytes = serialize_model(f);
    // Clobber a chunk in the middle of the node table and fix the checksum:
    // the structural validation still has to fire.
    std::size_t mid = bytes.size() / 2;
    for (std::size_t i = mid; i < mid + 16; ++i) bytes[i] = 0xFF;
    refresh_checksum(bytes);
    CHECK_THROWS_AS(deserialize_model(bytes), CorruptionError);
}
