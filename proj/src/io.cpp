#include "gscan/io.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace gscan::io {

namespace {

constexpr std::string_view kModule = "io";

} // namespace

std::string sha256_raw(std::string_view bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::Io, kModule, "sha256 failed");
    return {reinterpret_cast<const char*>(digest.data()), length};
}

std::string sha256_hex(std::string_view bytes)
{
    static constexpr char kHex[] = "0123456789abcdef";
    const std::string raw = sha256_raw(bytes);
    std::string out;
    out.reserve(raw.size() * 2);
    for (const char c : raw) {
        const auto b = static_cast<unsigned char>(c);
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xf]);
    }
    return out;
}

void ByteWriter::u32(std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v)
{
    u32(std::bit_cast<std::uint32_t>(v));
}

void ByteWriter::str(std::string_view s)
{
    u64(s.size());
    raw(s);
}

void ByteReader::fail(const std::string& what) const
{
    throw Error(code_, module_, what + " at byte " + std::to_string(pos_));
}

std::string_view ByteReader::raw(std::size_t n)
{
    if (n > remaining())
        fail("truncated input");
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::u8()
{
    return static_cast<std::uint8_t>(raw(1)[0]);
}

std::uint32_t ByteReader::u32()
{
    const auto b = raw(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

std::uint64_t ByteReader::u64()
{
    const auto b = raw(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

float ByteReader::f32()
{
    return std::bit_cast<float>(u32());
}

std::string ByteReader::str()
{
    const std::uint64_t n = u64();
    if (n > remaining())
        fail("string length " + std::to_string(n) + " exceeds input");
    return std::string(raw(static_cast<std::size_t>(n)));
}

std::size_t ByteReader::count(std::size_t min_item_size)
{
    const std::uint64_t n = u64();
    if (min_item_size > 0 && n > remaining() / min_item_size)
        fail("count " + std::to_string(n) + " exceeds input");
    return static_cast<std::size_t>(n);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, kModule, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad())
        throw Error(ErrorCode::Io, kModule, "cannot read " + path.string());
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    auto temp = path;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::Io, kModule, "cannot create " + temp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error(ErrorCode::Io, kModule, "cannot write " + temp.string());
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec)
        throw Error(ErrorCode::Io, kModule, "cannot rename " + temp.string() + ": " + ec.message());
}

} // namespace gscan::io
