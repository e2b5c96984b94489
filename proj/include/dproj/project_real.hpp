#pragma once

// Position-space projector: resample the volume under a pose with the
// trilinear kernel (gather form), then integrate along z.

#include <vector>

#include "dproj/geometry.hpp"
#include "dproj/grid.hpp"
#include "dproj/trilinear.hpp"

namespace dproj {

/// Sample location in the source volume for output voxel (z, y, x):
/// R (zeta - t), zeta the centered coordinate of the output voxel.
[[nodiscard]] Eigen::Vector3d sample_point(const RotationMatrix& rot, const Eigen::Vector3d& shift,
                                           int z, int y, int x, int side);

/// The <= 8 in-grid taps feeding one output voxel.
[[nodiscard]] std::vector<ResampleTap> resample_taps(const Eigen::Vector3d& point, int side);

[[nodiscard]] VoxelVolume resample_affine(const VoxelVolume& volume, const Pose& pose);
[[nodiscard]] ProjectionImage project_z(const VoxelVolume& volume);
[[nodiscard]] ProjectionImage project_real(const VoxelVolume& volume, const Pose& pose);

struct RealProjectionGradient {
    VoxelVolume volume;
    PoseGradient pose;
};

[[nodiscard]] RealProjectionGradient project_real_vjp(const VoxelVolume& volume, const Pose& pose,
                                                      const ProjectionImage& upstream);

} // namespace dproj
