#pragma once

/// @file pmap_io.hpp
/// @brief PMAP raster interchange format.
///
/// Little-endian: magic "PMAP", u32 width, u32 height, u32 channels, then
/// width*height*channels IEEE-754 float32 values, row-major and
/// channel-interleaved per pixel.

#include "aerofuse/raster.hpp"

#include <string>
#include <string_view>

namespace aerofuse::pmap {

std::string encode(const Raster& raster);
/// Throws RasterError on a bad magic, truncated payload or trailing bytes.
Raster decode(std::string_view bytes);

Raster read(const std::string& path);
void write(const std::string& path, const Raster& raster);

Raster mask_to_raster(const BinaryMask& mask);

}  // namespace aerofuse::pmap
