#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fusionattack/image.hpp"

namespace fusion {

// Baseline JPEG, 4:2:0 chroma subsampling, standard (Annex K) tables scaled
// by the usual quality mapping. Values are quantized to 8 bits on entry.
std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality);
Image decode_jpeg(std::span<const std::uint8_t> bytes);

// 8-bit RGB PNG. Encoding quantizes with round-half-up; decoding accepts
// any PNG colour type and converts it to RGB.
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

}  // namespace fusion
