#pragma once

// Binary model checkpoints.
//
// Layout (all integers and floats little-endian):
//   "WIMP1"               5-byte magic
//   u32 format version
//   u64 payload length
//   payload:
//     u8 head, u64 word_dim, char_dim, char_hidden, word_hidden, num_classes
//     f64 lr0, lr_decay, dropout_p, clip_norm; u64 batch_size, max_epochs, patience, seed
//     u64 word count, then per word: u32 byte length + UTF-8 bytes
//     u64 char count, then per char: u32 code point
//     u64 tensor count, then per tensor: u32 name length + name, u32 rank,
//         u64 extents, f64 values (row-major)
//   u32 CRC-32 of every preceding byte

#include "wimp/autodiff.hpp"
#include "wimp/error.hpp"
#include "wimp/model.hpp"
#include "wimp/training.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

namespace wimp {

inline constexpr std::string_view kCheckpointMagic = "WIMP1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    Model model;
    TrainConfig config;
};

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s);
    }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == size_; }

private:
    void need(std::size_t n) const {
        if (size_ - pos_ < n) throw TruncationError("checkpoint payload ends early");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = ::crc32(crc, data, chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

inline constexpr std::size_t kHeaderSize = 5 + 4 + 8;

} // namespace detail

inline std::vector<std::uint8_t> serialize_checkpoint(const Model& model, const TrainConfig& config) {
    detail::ByteWriter payload;
    const auto& mc = model.config();
    payload.u8(static_cast<std::uint8_t>(mc.head));
    payload.u64(mc.encoder.word_dim);
    payload.u64(mc.encoder.char_dim);
    payload.u64(mc.encoder.char_hidden);
    payload.u64(mc.encoder.word_hidden);
    payload.u64(mc.num_classes);
    payload.f64(config.lr0);
    payload.f64(config.lr_decay);
    payload.f64(config.dropout_p);
    payload.f64(config.clip_norm);
    payload.u64(config.batch_size);
    payload.u64(config.max_epochs);
    payload.u64(config.patience);
    payload.u64(config.seed);

    payload.u64(model.vocab().words().size());
    for (const auto& w : model.vocab().words()) payload.str(w);
    payload.u64(model.vocab().chars().size());
    for (char32_t c : model.vocab().chars()) payload.u32(static_cast<std::uint32_t>(c));

    const auto params = model.parameters();
    payload.u64(params.size());
    for (const auto& p : params) {
        payload.str(p.name());
        payload.u32(static_cast<std::uint32_t>(p.shape().size()));
        for (auto d : p.shape()) payload.u64(d);
        for (double v : p.value().data()) payload.f64(v);
    }

    detail::ByteWriter out;
    out.raw(kCheckpointMagic);
    out.u32(kCheckpointVersion);
    out.u64(payload.bytes().size());
    auto& bytes = out.bytes();
    bytes.insert(bytes.end(), payload.bytes().begin(), payload.bytes().end());
    out.u32(detail::crc32_of(bytes.data(), bytes.size()));
    return std::move(bytes);
}

inline Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    const std::size_t magic = kCheckpointMagic.size();
    if (bytes.size() < magic) throw TruncationError("checkpoint shorter than its magic header");
    if (std::memcmp(bytes.data(), kCheckpointMagic.data(), magic) != 0) {
        throw VersionError("not a checkpoint (bad magic)");
    }
    if (bytes.size() < detail::kHeaderSize) throw TruncationError("checkpoint header truncated");
    detail::ByteReader header(bytes.data() + magic, detail::kHeaderSize - magic);
    const auto version = header.u32();
    if (version != kCheckpointVersion) {
        throw VersionError("checkpoint format version " + std::to_string(version) + ", expected " +
                           std::to_string(kCheckpointVersion));
    }
    const auto length = header.u64();
    const std::size_t body_end = detail::kHeaderSize + length;
    if (length > bytes.size() || bytes.size() < body_end + 4) {
        throw TruncationError("checkpoint truncated: " + std::to_string(bytes.size()) + " bytes on disk");
    }
    if (bytes.size() != body_end + 4) throw ChecksumError("checkpoint has trailing bytes after its checksum");
    detail::ByteReader tail(bytes.data() + body_end, 4);
    if (tail.u32() != detail::crc32_of(bytes.data(), body_end)) throw ChecksumError("checkpoint CRC-32 mismatch");

    detail::ByteReader in(bytes.data() + detail::kHeaderSize, length);
    ModelConfig mc;
    const auto head = in.u8();
    if (head > 1) throw VersionError("checkpoint names unknown head " + std::to_string(head));
    mc.head = static_cast<HeadKind>(head);
    mc.encoder.word_dim = in.u64();
    mc.encoder.char_dim = in.u64();
    mc.encoder.char_hidden = in.u64();
    mc.encoder.word_hidden = in.u64();
    mc.num_classes = in.u64();
    TrainConfig tc;
    tc.lr0 = in.f64();
    tc.lr_decay = in.f64();
    tc.dropout_p = in.f64();
    tc.clip_norm = in.f64();
    tc.batch_size = in.u64();
    tc.max_epochs = in.u64();
    tc.patience = in.u64();
    tc.seed = in.u64();

    std::vector<std::string> words(in.u64());
    for (auto& w : words) w = in.str();
    std::vector<char32_t> chars(in.u64());
    for (auto& c : chars) c = static_cast<char32_t>(in.u32());

    Rng scratch(0);
    Model model(mc, Vocabulary::from_lists(std::move(words), std::move(chars)), scratch);
    auto params = model.parameters();
    const auto count = in.u64();
    if (count != params.size()) {
        throw ConfigError("checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                          std::to_string(params.size()));
    }
    for (auto& p : params) {
        const auto name = in.str();
        if (name != p.name()) throw ConfigError("checkpoint tensor '" + name + "' where '" + p.name() + "' expected");
        ad::Shape shape(in.u32());
        for (auto& d : shape) d = in.u64();
        if (shape != p.shape()) {
            throw ShapeError("checkpoint tensor '" + name + "' has shape " + ad::shape_string(shape) + ", expected " +
                             ad::shape_string(p.shape()));
        }
        for (auto& v : p.mutable_value().data()) v = in.f64();
    }
    if (!in.done()) throw ConfigError("checkpoint payload has unread bytes");
    return {std::move(model), tc};
}

inline void save_checkpoint(const std::string& path, const Model& model, const TrainConfig& config) {
    const auto bytes = serialize_checkpoint(model, config);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("io", "failed writing '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

} // namespace wimp
