#pragma once

// FVL1 binary volume files:
//   "FVL1" | u32 D | u8 domain (0 spatial f64, 1 Fourier complex f64 re/im)
//   | u8 hermitian | f64 pixel_size | payload [z][y][x], x fastest.
// All multi-byte fields little-endian.

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "dproj/grid.hpp"

namespace dproj {

enum class VolumeDomain : std::uint8_t { Spatial = 0, Fourier = 1 };

using AnyVolume = std::variant<VoxelVolume, FourierVolume>;

[[nodiscard]] std::vector<std::uint8_t> encode_fvl(const VoxelVolume& volume);
[[nodiscard]] std::vector<std::uint8_t> encode_fvl(const FourierVolume& volume);
[[nodiscard]] AnyVolume decode_fvl(std::span<const std::uint8_t> bytes);

void write_fvl(const std::filesystem::path& path, const VoxelVolume& volume);
void write_fvl(const std::filesystem::path& path, const FourierVolume& volume);
[[nodiscard]] AnyVolume read_fvl(const std::filesystem::path& path);

/// Reads a file that must hold the given domain; IoError otherwise.
[[nodiscard]] VoxelVolume read_spatial_fvl(const std::filesystem::path& path);
[[nodiscard]] FourierVolume read_fourier_fvl(const std::filesystem::path& path);

// Little-endian primitives shared with the dataset image stream.
void append_f64_le(std::vector<std::uint8_t>& out, double value);
[[nodiscard]] double read_f64_le(const std::uint8_t* p) noexcept;

[[nodiscard]] std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace dproj
