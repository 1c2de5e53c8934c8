#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace homechain {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

Bytes to_bytes(std::string_view s);
std::string to_string(ByteView b);

std::string hex_encode(ByteView b);
std::optional<Bytes> hex_decode(std::string_view hex);

// Little-endian append/read helpers used by the canonical wire format.
void put_u8(Bytes& out, std::uint8_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
void put_str(Bytes& out, std::string_view s);  // u32 length prefix + bytes
void put_blob(Bytes& out, ByteView b);         // u32 length prefix + bytes

// Cursor-style reader; returns nullopt past the end instead of throwing.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::optional<std::uint8_t> u8();
    std::optional<std::uint32_t> u32();
    std::optional<std::uint64_t> u64();
    std::optional<std::string> str();
    std::optional<Bytes> blob();
    std::optional<Bytes> raw(std::size_t n);
    bool done() const { return pos_ == data_.size(); }

private:
    ByteView data_;
    std::size_t pos_ = 0;
};

}  // namespace homechain
