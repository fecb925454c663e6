#ifndef PROMPTCD_IMAGE_IO_H_
#define PROMPTCD_IMAGE_IO_H_

#include <cstdint>
#include <filesystem>

#include "promptcd/grid.h"

namespace promptcd {

// 8-bit PNG, any nonzero value (in any channel) is foreground.
BinaryMask read_mask_png(const std::filesystem::path& path);
// Writes 255 for foreground, 0 for background.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);

// Single-channel 8-bit raster of small integers (class ids).
Grid<std::uint8_t> read_gray_png(const std::filesystem::path& path);
void write_gray_png(const std::filesystem::path& path,
                    const Grid<std::uint8_t>& image);

void write_gray16_png(const std::filesystem::path& path,
                      const Grid<std::uint16_t>& image);

}  // namespace promptcd

#endif  // PROMPTCD_IMAGE_IO_H_
