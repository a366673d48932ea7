#include "aerofuse/pmap_io.hpp"

#include "aerofuse/text.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>

namespace aerofuse::pmap {

namespace {

constexpr std::string_view kMagic = "PMAP";
constexpr std::size_t kHeaderSize = 16;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    }
    return v;
}

}  // namespace

std::string encode(const Raster& raster) {
    std::string out;
    out.reserve(kHeaderSize + raster.values().size() * 4);
    out.append(kMagic);
    put_u32(out, static_cast<std::uint32_t>(raster.width()));
    put_u32(out, static_cast<std::uint32_t>(raster.height()));
    put_u32(out, static_cast<std::uint32_t>(raster.channels()));
    for (float v : raster.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

Raster decode(std::string_view bytes) {
    if (bytes.size() < kHeaderSize || bytes.substr(0, 4) != kMagic) {
        throw RasterError("malformed PMAP header");
    }
    const std::uint32_t w = get_u32(bytes, 4);
    const std::uint32_t h = get_u32(bytes, 8);
    const std::uint32_t c = get_u32(bytes, 12);
    constexpr std::uint64_t kMaxDim = 1u << 20;
    if (w > kMaxDim || h > kMaxDim || c > 4096) throw RasterError("malformed PMAP header");
    const std::uint64_t count = std::uint64_t{w} * h * c;
    if (bytes.size() != kHeaderSize + count * 4) {
        throw RasterError("PMAP payload size " + std::to_string(bytes.size() - kHeaderSize) +
                          " does not match header (" + std::to_string(count * 4) + ")");
    }
    std::vector<float> values(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        values[i] = std::bit_cast<float>(get_u32(bytes, kHeaderSize + 4 * i));
    }
    return Raster(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c),
                  std::move(values));
}

Raster read(const std::string& path) {
    try {
        return decode(text::read_file(path));
    } catch (const RasterError& e) {
        throw RasterError(path + ": " + e.what());
    }
}

void write(const std::string& path, const Raster& raster) { text::write_file(path, encode(raster)); }

Raster mask_to_raster(const BinaryMask& mask) {
    Raster r(mask.width(), mask.height(), 1);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) r.at(x, y, 0) = mask.get(x, y) ? 1.0f : 0.0f;
    }
    return r;
}

}  // namespace aerofuse::pmap
