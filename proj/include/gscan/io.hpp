/**
 * @file io.hpp
 * @brief Little-endian byte containers, sha256, and whole-file I/O.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "gscan/error.hpp"

namespace gscan::io {

/// Lowercase hex sha256.
std::string sha256_hex(std::string_view bytes);
/// Raw 32-byte sha256.
std::string sha256_raw(std::string_view bytes);

class ByteWriter
{
public:
    void u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f32(float v);
    /// u64 length prefix followed by the bytes.
    void str(std::string_view s);
    void raw(std::string_view s) { buffer_.append(s); }

    const std::string& bytes() const noexcept { return buffer_; }
    std::string take() { return std::move(buffer_); }

private:
    std::string buffer_;
};

/// Every read past the end throws `code` with `module` provenance.
class ByteReader
{
public:
    ByteReader(std::string_view bytes, ErrorCode code, std::string_view module)
        : bytes_(bytes)
        , code_(code)
        , module_(module)
    {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    float f32();
    std::string str();
    std::string_view raw(std::size_t n);
    /// A count that must fit in the remaining bytes at `min_item_size` each.
    std::size_t count(std::size_t min_item_size);

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }
    [[noreturn]] void fail(const std::string& what) const;

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
    ErrorCode code_;
    std::string_view module_;
};

/// Throws Io.
std::string read_file(const std::filesystem::path& path);
/// Writes through a sibling temp file and renames. Throws Io.
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace gscan::io
