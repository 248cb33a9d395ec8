#include "exiffi/model_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "exiffi/errors.hpp"

namespace exiffi {

namespace {

constexpr char kMagic[4] = {'X', 'I', 'F', 'M'};

std::uint32_t crc_of(const std::uint8_t* data, std::size_t len) {
    uLong crc = crc32(0L, Z_NULL, 0);
    while (len > 0) {
        const auto chunk = static_cast<uInt>(
            std::min<std::size_t>(len, std::numeric_limits<uInt>::max() / 2));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        len -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

struct Writer {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

struct Reader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > size) throw CorruptionError("model file is truncated");
    }
    std::uint8_t u8() {
        need(1);
        return data[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

double recompute_threshold(const Node& nd) {
    double s = 0.0;
    for (std::size_t i = 0; i < nd.normal.size(); ++i)
        s += nd.normal[i] * nd.intercept[i];
    return s;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Forest& f) {
    Writer w;
    w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
    w.u32(kModelFormatVersion);

    w.u32(static_cast<std::uint32_t>(f.params.mode));
    w.u64(f.params.n_trees);
    w.u64(f.params.sample_size);
    w.u64(f.params.max_depth);
    w.u64(f.params.seed);
    w.f64(f.params.eta);
    w.u8(f.params.contamination ? 1 : 0);
    w.f64(f.params.contamination ? *f.params.contamination : 0.0);

    w.u64(f.n_features);
    w.u64(f.sample_size_used);
    w.u64(f.max_depth_used);
    w.u8(f.contamination_used ? 1 : 0);
    w.f64(f.contamination_used ? *f.contamination_used : 0.0);
    w.u8(f.threshold ? 1 : 0);
    w.f64(f.threshold ? *f.threshold : 0.0);

    w.u64(f.trees.size());
    for (const Tree& tree : f.trees) {
        w.u64(tree.nodes.size());
        for (const Node& nd : tree.nodes) {
            w.u8(nd.is_leaf() ? 1 : 0);
            w.u32(nd.n_node);
            if (nd.is_leaf()) continue;
            w.i32(nd.left);
            w.i32(nd.right);
            w.u32(nd.n_left);
            w.u32(nd.n_right);
            w.i32(nd.axis);
            for (double v : nd.normal) w.f64(v);
            for (double v : nd.intercept) w.f64(v);
        }
    }
    w.u32(crc_of(w.bytes.data(), w.bytes.size()));
    return std::move(w.bytes);
}

Forest deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8) throw CorruptionError("model file is truncated");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw CorruptionError("not a model file (bad magic)");
    Reader r{bytes.data(), bytes.size()};
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version > kModelFormatVersion)
        throw VersionError("model format version " + std::to_string(version) +
                           " is newer than supported version " +
                           std::to_string(kModelFormatVersion));
    if (version == 0) throw CorruptionError("model format version 0 is invalid");
    if (bytes.size() < 12) throw CorruptionError("model file is truncated");
    const std::uint32_t stored_crc =
        static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
        static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8 |
        static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16 |
        static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24;
    if (crc_of(bytes.data(), bytes.size() - 4) != stored_crc)
        throw CorruptionError("model file checksum mismatch");
    r.size = bytes.size() - 4;

    Forest f;
    const std::uint32_t mode = r.u32();
    if (mode > 2) throw CorruptionError("invalid mode tag");
    f.params.mode = static_cast<Mode>(mode);
    f.params.n_trees = r.u64();
    f.params.sample_size = r.u64();
    f.params.max_depth = r.u64();
    f.params.seed = r.u64();
    f.params.eta = r.f64();
    const bool has_cparam = r.u8() != 0;
    const double cparam = r.f64();
    if (has_cparam) f.params.contamination = cparam;

    f.n_features = r.u64();
    f.sample_size_used = r.u64();
    f.max_depth_used = r.u64();
    const bool has_cused = r.u8() != 0;
    const double cused = r.f64();
    if (has_cused) f.contamination_used = cused;
    const bool has_threshold = r.u8() != 0;
    const double threshold = r.f64();
    if (has_threshold) f.threshold = threshold;

    if (f.n_features == 0 || f.n_features > (1u << 24))
        throw CorruptionError("implausible feature count");
    if (f.sample_size_used < 2) throw CorruptionError("implausible sample size");

    const std::uint64_t n_trees = r.u64();
    if (n_trees == 0 || n_trees > (1u << 24))
        throw CorruptionError("implausible tree count");
    f.trees.resize(n_trees);
    for (auto& tree : f.trees) {
        const std::uint64_t n_nodes = r.u64();
        if (n_nodes == 0 || n_nodes > (1u << 26))
            throw CorruptionError("implausible node count");
        tree.nodes.resize(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            Node& nd = tree.nodes[i];
            const bool leaf = r.u8() != 0;
            nd.n_node = r.u32();
            if (leaf) continue;
            nd.left = r.i32();
            nd.right = r.i32();
            nd.n_left = r.u32();
            nd.n_right = r.u32();
            nd.axis = r.i32();
            // Children always follow their parent, which also rules out
            // cycles.
            if (nd.left <= static_cast<std::int32_t>(i) ||
                nd.right <= static_cast<std::int32_t>(i) ||
                nd.left >= static_cast<std::int32_t>(n_nodes) ||
                nd.right >= static_cast<std::int32_t>(n_nodes))
                throw CorruptionError("invalid child reference");
            if (nd.n_left == 0 || nd.n_right == 0 ||
                nd.n_left + nd.n_right != nd.n_node)
                throw CorruptionError("inconsistent node counts");
            if (nd.axis < -1 || nd.axis >= static_cast<std::int32_t>(f.n_features))
                throw CorruptionError("invalid split axis");
            nd.normal.resize(f.n_features);
            nd.intercept.resize(f.n_features);
            for (auto& v : nd.normal) v = r.f64();
            for (auto& v : nd.intercept) v = r.f64();
            for (double v : nd.normal)
                if (!std::isfinite(v))
                    throw CorruptionError("non-finite split coefficient");
            for (double v : nd.intercept)
                if (!std::isfinite(v))
                    throw CorruptionError("non-finite split intercept");
            nd.threshold = recompute_threshold(nd);
        }
    }
    if (r.pos != r.size) throw CorruptionError("trailing bytes after model data");

    f.c_table = avg_path_table(f.sample_size_used);
    f.c_psi = f.c_table[f.sample_size_used];
    return f;
}

void save_model(const Forest& f, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_model(f);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

Forest load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace exiffi
