#pragma once

// Trilinear sampling kernel k(d) = prod_m max(0, 1 - |d_m|) on a centered
// lattice, shared by the position-space and Fourier-space projectors.
// Points are given in centered coordinates ordered (x, y, z).

#include <array>
#include <cmath>
#include <cstddef>

#include <Eigen/Core>

namespace dproj {

/// One contributing lattice entry of a sample: flat source index and kernel weight.
struct ResampleTap {
    std::size_t index = 0;
    double weight = 0.0;
};

/// Floor corner and fractional offsets of a sample point. The derivative
/// along m uses the floor-based split (-1 for the lower tap, +1 for the
/// upper), i.e. the one-sided derivative from above at integer coordinates.
struct TrilinearStencil {
    std::array<int, 3> base{};     // lattice index of the floor corner, per axis (x, y, z)
    std::array<double, 3> frac{};  // in [0, 1)

    TrilinearStencil(const Eigen::Vector3d& point, int side) {
        const int c = side / 2;
        for (int m = 0; m < 3; ++m) {
            const double f = std::floor(point[m]);
            base[m] = static_cast<int>(f) + c;
            frac[m] = point[m] - f;
        }
    }

    [[nodiscard]] static double axis_weight(double frac, int bit) noexcept {
        return bit ? frac : 1.0 - frac;
    }

    /// Calls fn(flat_index, weight, dweight_dx, dweight_dy, dweight_dz) for
    /// each in-grid corner. Corners outside the lattice are skipped (zero padding).
    template <typename Fn>
    void for_each_tap(int side, Fn&& fn) const {
        for (int bz = 0; bz < 2; ++bz) {
            const int kz = base[2] + bz;
            if (kz < 0 || kz >= side)
                continue;
            for (int by = 0; by < 2; ++by) {
                const int ky = base[1] + by;
                if (ky < 0 || ky >= side)
                    continue;
                for (int bx = 0; bx < 2; ++bx) {
                    const int kx = base[0] + bx;
                    if (kx < 0 || kx >= side)
                        continue;
                    const double wx = axis_weight(frac[0], bx);
                    const double wy = axis_weight(frac[1], by);
                    const double wz = axis_weight(frac[2], bz);
                    const double sx = bx ? 1.0 : -1.0;
                    const double sy = by ? 1.0 : -1.0;
                    const double sz = bz ? 1.0 : -1.0;
                    const auto d = static_cast<std::size_t>(side);
                    const std::size_t flat =
                        (static_cast<std::size_t>(kz) * d + static_cast<std::size_t>(ky)) * d
                        + static_cast<std::size_t>(kx);
                    fn(flat, wx * wy * wz, sx * wy * wz, wx * sy * wz, wx * wy * sz);
                }
            }
        }
    }

    /// True when every corner with nonzero weight lies inside the lattice.
    [[nodiscard]] bool interior(int side) const noexcept {
        for (int m = 0; m < 3; ++m) {
            if (base[m] < 0)
                return false;
            const int top = frac[m] > 0.0 ? base[m] + 1 : base[m];
            if (top >= side)
                return false;
        }
        return true;
    }
};

} // namespace dproj
