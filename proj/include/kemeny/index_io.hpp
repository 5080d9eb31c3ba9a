#pragma once

// Binary index format, all integers little-endian:
//   "KFI1" | u32 format | u64 n | u64 m | u64 omega | u32 root | u64 seed
//   | u32 mode | u64 next_stream | u64 graph version
//   | tau0 parents (n x u32, root = 0xFFFFFFFF)
//   | omega x { parents (n x u32) | f (i128) | w (binary64 bits) }

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "kemeny/dynamic.hpp"
#include "kemeny/error.hpp"
#include "kemeny/graph.hpp"
#include "kemeny/rooted_tree.hpp"

namespace kemeny {

inline constexpr char kIndexMagic[4] = {'K', 'F', 'I', '1'};
inline constexpr std::uint32_t kIndexFormat = 1;

namespace detail {

class ByteWriter {
public:
    void put_bytes(const void* data, std::size_t n) {
        auto p = static_cast<const std::uint8_t*>(data);
        out_.insert(out_.end(), p, p + n);
    }
    template <typename T>
    void put(T value) {
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
    void put_i128(Int128 value) {
        auto u = static_cast<unsigned __int128>(value);
        for (int i = 0; i < 16; ++i) out_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
    void put_f64(double value) { put(std::bit_cast<std::uint64_t>(value)); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    ByteReader(const std::vector<std::uint8_t>& in, std::size_t pos) : in_(in), pos_(pos) {}

    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw CorruptIndexError("index truncated at byte " + std::to_string(pos_));
    }
    template <typename T>
    T get() {
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<std::make_unsigned_t<T>>(in_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    Int128 get_i128() {
        need(16);
        unsigned __int128 u = 0;
        for (int i = 0; i < 16; ++i) u |= static_cast<unsigned __int128>(in_[pos_ + i]) << (8 * i);
        pos_ += 16;
        return static_cast<Int128>(u);
    }
    double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    bool at_end() const noexcept { return pos_ == in_.size(); }

private:
    const std::vector<std::uint8_t>& in_;
    std::size_t pos_;
};

inline void put_parents(ByteWriter& out, const RootedTree& tree) {
    for (NodeId p : tree.parents()) out.put<std::uint32_t>(p);
}

inline RootedTree get_parents(ByteReader& in, std::size_t n, NodeId root, const Graph& g, const std::string& what) {
    in.need(4 * n);
    std::vector<NodeId> parent(n);
    for (auto& p : parent) p = in.get<std::uint32_t>();
    if (parent[root] != kNoNode) throw CorruptIndexError(what + ": root has a parent");
    RootedTree tree(root, std::move(parent));
    if (auto msg = validate_tree(tree, g); !msg.empty()) throw CorruptIndexError(what + ": " + msg);
    return tree;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const SampleStore& store) {
    detail::ByteWriter out;
    const std::size_t n = store.tau0.node_count();
    out.put_bytes(kIndexMagic, 4);
    out.put<std::uint32_t>(kIndexFormat);
    out.put<std::uint64_t>(n);
    out.put<std::uint64_t>(static_cast<std::uint64_t>(store.two_m / 2));
    out.put<std::uint64_t>(store.records.size());
    out.put<std::uint32_t>(store.root);
    out.put<std::uint64_t>(store.seed);
    out.put<std::uint32_t>(static_cast<std::uint32_t>(store.mode));
    out.put<std::uint64_t>(store.next_stream);
    out.put<std::uint64_t>(store.version);
    detail::put_parents(out, store.tau0);
    for (const auto& rec : store.records) {
        detail::put_parents(out, rec.tree);
        out.put_i128(rec.f);
        out.put_f64(rec.weight);
    }
    return out.take();
}

/// Rebuilds a store from bytes, revalidating every tree against g.
inline SampleStore deserialize(const std::vector<std::uint8_t>& bytes, const Graph& g) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kIndexMagic, 4) != 0)
        throw CorruptIndexError("bad magic: not a sample index");
    detail::ByteReader in(bytes, 4);
    const auto format = in.get<std::uint32_t>();
    if (format != kIndexFormat) throw CorruptIndexError("unsupported index format " + std::to_string(format));
    const auto n = in.get<std::uint64_t>();
    const auto m = in.get<std::uint64_t>();
    const auto omega = in.get<std::uint64_t>();
    if (n != g.node_count() || m != g.edge_count())
        throw CorruptIndexError("index was built for a graph with n=" + std::to_string(n) + ", m=" + std::to_string(m));
    if (omega == 0) throw CorruptIndexError("index holds no samples");

    SampleStore store;
    store.root = in.get<std::uint32_t>();
    if (store.root >= n) throw CorruptIndexError("root out of range");
    store.seed = in.get<std::uint64_t>();
    const auto mode = in.get<std::uint32_t>();
    if (mode > 1) throw CorruptIndexError("unknown maintenance mode " + std::to_string(mode));
    store.mode = static_cast<MaintenanceMode>(mode);
    store.next_stream = in.get<std::uint64_t>();
    store.version = in.get<std::uint64_t>();
    store.two_m = static_cast<std::int64_t>(2 * m);

    // bound omega by what the remaining bytes can hold before allocating
    const std::size_t per_sample = 4 * n + 24;
    if (omega > (bytes.size() / per_sample) + 1) throw CorruptIndexError("sample count exceeds file size");
    store.tau0 = detail::get_parents(in, n, store.root, g, "reference tree");
    compute_dfn(store.tau0);
    store.records.resize(omega);
    long double total = 0.0L;
    for (std::uint64_t i = 0; i < omega; ++i) {
        auto& rec = store.records[i];
        rec.tree = detail::get_parents(in, n, store.root, g, "sample " + std::to_string(i));
        rec.f = in.get_i128();
        rec.weight = in.get_f64();
        if (!(rec.weight > 0.0)) throw CorruptIndexError("sample " + std::to_string(i) + " has non-positive weight");
        total += rec.weight;
    }
    if (!in.at_end()) throw CorruptIndexError("trailing bytes after last sample");
    if (std::fabs(static_cast<double>(total) - 1.0) > 1e-12) throw CorruptIndexError("weights do not sum to 1");
    return store;
}

inline void write_index_file(const SampleStore& store, const std::string& path) {
    auto bytes = serialize(store);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("failed writing " + path);
}

inline SampleStore read_index_file(const std::string& path, const Graph& g) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes, g);
}

}  // namespace kemeny
