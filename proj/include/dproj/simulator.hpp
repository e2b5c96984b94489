#pragma once

// Synthetic ground truth and observation datasets. Observations are rendered
// with the position-space projector only, so the Fourier path stays an
// independent subject of test.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dproj/geometry.hpp"
#include "dproj/grid.hpp"
#include "dproj/rng.hpp"

namespace dproj {

struct PhantomOptions {
    double pixel_size = 1.0;
    /// Blob centers are drawn uniformly inside this fraction of D (radius).
    double center_radius = 0.25;
    double min_width = 1.0;  // voxels, per-axis standard deviation
    double max_width = 2.0;
    int symmetry_order = 7;  // used when symmetric
};

/// Sum of anisotropic Gaussian blobs, normalized to unit maximum. With
/// symmetric set, every blob is replicated under rotations by 2 pi k / n
/// about z.
[[nodiscard]] VoxelVolume make_phantom(int side, int blob_count, std::uint64_t seed, bool symmetric,
                                       const PhantomOptions& options = {});

struct PoseSampling {
    std::optional<double> cone_half_angle_deg;
    double translation_range = 2.0;  // t ~ U[-range, range] per axis, voxels
};

/// Uniform on SO(3) without a cone. With a cone, beta ~ U(-h, h).
[[nodiscard]] Pose sample_pose(Rng& rng, const PoseSampling& sampling = {});

/// sigma_eps = sqrt(pooled pixel variance / snr). DegenerateSignal for constant images.
[[nodiscard]] double snr_to_sigma(std::span<const ProjectionImage> clean, double snr);
[[nodiscard]] double pooled_variance(std::span<const ProjectionImage> images);

struct ObservationRecord {
    int id = 0;
    ProjectionImage image;
    std::optional<Pose> pose;
};

struct DatasetMetadata {
    int side = 0;
    double pixel_size = 1.0;
    std::optional<double> snr;  // nullopt: noise-free
    double sigma_eps = 0.0;     // 0 for noise-free data
    double signal_variance = 0.0;
    std::optional<double> cone_half_angle_deg;
    double translation_range = 2.0;
    std::uint64_t seed = 0;
    std::optional<std::string> ground_truth_path;
    std::string snr_definition = "signal_variance/noise_variance";
};

struct Dataset {
    DatasetMetadata meta;
    std::vector<ObservationRecord> observations;

    [[nodiscard]] bool has_all_poses() const;
};

struct SynthesisConfig {
    int count = 1;
    std::optional<double> snr;  // nullopt: noise-free
    PoseSampling poses;
    std::uint64_t seed = 0;
    bool drop_poses = false;
};

[[nodiscard]] Dataset synthesize_dataset(const VoxelVolume& ground_truth, const SynthesisConfig& config);

} // namespace dproj
