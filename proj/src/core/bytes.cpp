#include "homechain/core/bytes.hpp"

namespace homechain {

Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

std::string to_string(ByteView b) {
    return std::string(b.begin(), b.end());
}

static constexpr char kHexDigits[] = "0123456789abcdef";

std::string hex_encode(ByteView b) {
    std::string out;
    out.reserve(b.size() * 2);
    for (std::uint8_t byte : b) {
        out.push_back(kHexDigits[byte >> 4]);
        out.push_back(kHexDigits[byte & 0x0f]);
    }
    return out;
}

static int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::optional<Bytes> hex_decode(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_val(hex[i]);
        int lo = hex_val(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

void put_u8(Bytes& out, std::uint8_t v) {
    out.push_back(v);
}

void put_u32(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_str(Bytes& out, std::string_view s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

void put_blob(Bytes& out, ByteView b) {
    put_u32(out, static_cast<std::uint32_t>(b.size()));
    out.insert(out.end(), b.begin(), b.end());
}

std::optional<std::uint8_t> ByteReader::u8() {
    if (pos_ + 1 > data_.size()) return std::nullopt;
    return data_[pos_++];
}

std::optional<std::uint32_t> ByteReader::u32() {
    if (pos_ + 4 > data_.size()) return std::nullopt;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
}

std::optional<std::uint64_t> ByteReader::u64() {
    if (pos_ + 8 > data_.size()) return std::nullopt;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return v;
}

std::optional<std::string> ByteReader::str() {
    auto b = blob();
    if (!b) return std::nullopt;
    return std::string(b->begin(), b->end());
}

std::optional<Bytes> ByteReader::blob() {
    auto n = u32();
    if (!n) return std::nullopt;
    return raw(*n);
}

std::optional<Bytes> ByteReader::raw(std::size_t n) {
    if (pos_ + n > data_.size()) return std::nullopt;
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

}  // namespace homechain
