#pragma once

// Fourier-space projector. By the projection-slice theorem the 2D transform of
// a projection is a central plane of the 3D transform; with the pose
// convention of geometry.hpp the plane is sampled at R (w1, w2, 0) and the
// in-plane shift becomes a phase ramp.
//
// Unitary transforms make the two sides differ by a constant:
//   dft2(project_real(v, p)) ~= sqrt(D) * ramp(extract_slice(dft3(v), R)).
// project_fourier includes that factor; extract_slice does not.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dproj/geometry.hpp"
#include "dproj/grid.hpp"

namespace dproj {

/// A predicted slice plus its validity mask. Masked pixels (beyond the shell
/// limit, or whose interpolation neighborhood leaves the grid) hold zero and
/// are excluded from likelihoods.
struct SliceProjection {
    FourierSlice slice;
    std::vector<std::uint8_t> valid;

    [[nodiscard]] std::size_t valid_count() const noexcept;
};

[[nodiscard]] SliceProjection extract_slice(const FourierVolume& fvol, const RotationMatrix& rot,
                                            std::optional<int> max_shell = std::nullopt);

/// out[w] = exp(-2 pi i (tau . w) / D) * slice[w], w the centered 2D index.
[[nodiscard]] FourierSlice apply_phase_ramp(const FourierSlice& slice, const Eigen::Vector2d& tau);

[[nodiscard]] double slice_scale(int side) noexcept;

[[nodiscard]] SliceProjection project_fourier(const FourierVolume& fvol, const Pose& pose,
                                              std::optional<int> max_shell = std::nullopt,
                                              int oversampling = 1);

/// Complex gradients use the convention dL/dRe + i dL/dIm for real L.
/// Indices are sorted and unique.
struct SparseVolumeGradient {
    std::vector<std::pair<std::size_t, cplx>> entries;

    [[nodiscard]] std::size_t touched() const noexcept { return entries.size(); }
    void add_to(std::span<cplx> dense) const;
};

struct FourierProjectionGradient {
    SparseVolumeGradient volume;
    PoseGradient pose;
};

[[nodiscard]] FourierProjectionGradient project_fourier_vjp(const FourierVolume& fvol,
                                                            const Pose& pose,
                                                            const FourierSlice& upstream,
                                                            std::optional<int> max_shell =
                                                                std::nullopt,
                                                            int oversampling = 1);

/// Projector bound to one Fourier volume, optionally oversampled: the volume
/// is zero-padded in position space to (factor * D)^3 before slicing, which
/// shrinks the Fourier-domain interpolation error. factor = 1 slices the
/// volume as given. Building costs one (factor * D)^3 FFT, amortized over
/// every projection taken from the same volume.
class SliceProjector {
public:
    explicit SliceProjector(const FourierVolume& fvol, int oversampling = 1);

    [[nodiscard]] int side() const noexcept { return side_; }
    [[nodiscard]] int oversampling() const noexcept { return factor_; }
    [[nodiscard]] int grid_side() const noexcept { return grid_.side(); }
    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_.size(); }

    [[nodiscard]] SliceProjection project(const Pose& pose, std::optional<int> max_shell) const;

    /// Adds the volume gradient w.r.t. the (possibly oversampled) internal
    /// grid into grid_gradient and returns the pose gradient (zero when
    /// want_pose is false). An empty grid_gradient skips the volume part.
    PoseGradient accumulate_vjp(const Pose& pose, const FourierSlice& upstream,
                                std::optional<int> max_shell, std::span<cplx> grid_gradient,
                                bool want_pose = true) const;

    /// Maps a gradient on the internal grid back to the D^3 input volume
    /// (adjoint of the oversampling isometry; identity when factor is 1).
    [[nodiscard]] std::vector<cplx> pull_back(std::span<const cplx> grid_gradient) const;

private:
    int side_;
    int factor_;
    FourierVolume grid_;
};

} // namespace dproj
