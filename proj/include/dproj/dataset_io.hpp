#pragma once

// Dataset directories:
//   manifest.json  metadata plus one record per observation (id, pose or null)
//   images.bin     D*D little-endian f64 values per image, in manifest order,
//                  rows y-major with x fastest
//   gt.fvl         optional ground-truth volume
//
// Manifest keys: format, side, pixel_size_angstrom, snr (null when noise-free),
// snr_definition, sigma_eps, signal_variance, cone_half_angle_deg (or null),
// translation_range, seed, count, ground_truth (file name or null),
// images {file, dtype}, observations [{id, pose {alpha, beta, gamma, tx, ty, tz}}].

#include <filesystem>
#include <optional>
#include <string>

#include "dproj/grid.hpp"
#include "dproj/simulator.hpp"

namespace dproj {

inline constexpr const char* kDatasetFormat = "dproj-dataset-1";

/// Writes the directory; gt.fvl is written when ground_truth is given.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset,
                   const VoxelVolume* ground_truth = nullptr);

/// IoError for missing or unreadable files, DataContractError for content
/// that contradicts the manifest.
[[nodiscard]] Dataset read_dataset(const std::filesystem::path& dir);

/// Ground truth recorded in the manifest, if any.
[[nodiscard]] std::optional<VoxelVolume> read_dataset_ground_truth(const std::filesystem::path& dir);

/// Writes a text file byte-for-byte.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace dproj
