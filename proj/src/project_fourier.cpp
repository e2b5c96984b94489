#include "dproj/project_fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dproj/trilinear.hpp"

namespace dproj {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool beyond_shell(int wx, int wy, std::optional<int> max_shell) {
    if (!max_shell)
        return false;
    const double r = *max_shell;
    return static_cast<double>(wx) * wx + static_cast<double>(wy) * wy > r * r;
}

void check_shell(std::optional<int> max_shell, int side) {
    if (max_shell && (*max_shell < 0 || *max_shell >= side / 2))
        throw ConfigError("max_shell must lie in [0, D/2)");
}

cplx ramp(const Eigen::Vector2d& tau, int wx, int wy, int side) {
    const double phase = -kTwoPi * (tau.x() * wx + tau.y() * wy) / side;
    return {std::cos(phase), std::sin(phase)};
}

} // namespace

std::size_t SliceProjection::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

double slice_scale(int side) noexcept { return std::sqrt(static_cast<double>(side)); }

SliceProjection extract_slice(const FourierVolume& fvol, const RotationMatrix& rot,
                              std::optional<int> max_shell) {
    const int d = fvol.side();
    check_shell(max_shell, d);
    const int c = center_index(d);
    SliceProjection out{FourierSlice(d), std::vector<std::uint8_t>(static_cast<std::size_t>(d) * d, 0)};
    const auto values = fvol.values();
    for (int ky = 0; ky < d; ++ky)
        for (int kx = 0; kx < d; ++kx) {
            const int wx = kx - c;
            const int wy = ky - c;
            if (beyond_shell(wx, wy, max_shell))
                continue;
            const TrilinearStencil st(rot * Eigen::Vector3d(wx, wy, 0.0), d);
            if (!st.interior(d))
                continue;
            cplx acc{};
            st.for_each_tap(d, [&](std::size_t i, double w, double, double, double) {
                acc += w * values[i];
            });
            const std::size_t p = out.slice.flat(ky, kx);
            out.slice[p] = acc;
            out.valid[p] = 1;
        }
    return out;
}

FourierSlice apply_phase_ramp(const FourierSlice& slice, const Eigen::Vector2d& tau) {
    const int d = slice.side();
    const int c = center_index(d);
    FourierSlice out(d);
    for (int ky = 0; ky < d; ++ky)
        for (int kx = 0; kx < d; ++kx)
            out(ky, kx) = ramp(tau, kx - c, ky - c, d) * slice(ky, kx);
    return out;
}

void SparseVolumeGradient::add_to(std::span<cplx> dense) const {
    for (const auto& [i, g] : entries)
        dense[i] += g;
}

SliceProjector::SliceProjector(const FourierVolume& fvol, int oversampling)
    : side_(fvol.side()), factor_(oversampling) {
    if (oversampling < 1)
        throw ConfigError("oversampling factor must be >= 1");
    if (oversampling == 1) {
        grid_ = fvol;
        return;
    }
    const int d = side_;
    const int p = d * oversampling;
    const int offset = p / 2 - d / 2;
    const auto spatial = dft_centered(fvol.values(), d, 3, true);
    std::vector<cplx> padded(static_cast<std::size_t>(p) * p * p);
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x)
                padded[(static_cast<std::size_t>(z + offset) * p + (y + offset)) * p + (x + offset)] =
                    spatial[(static_cast<std::size_t>(z) * d + y) * d + x];
    grid_ = FourierVolume(p, fvol.pixel_size(), dft_centered(padded, p, 3, false), fvol.hermitian());
}

std::vector<cplx> SliceProjector::pull_back(std::span<const cplx> grid_gradient) const {
    if (factor_ == 1)
        return {grid_gradient.begin(), grid_gradient.end()};
    const int d = side_;
    const int p = grid_.side();
    const int offset = p / 2 - d / 2;
    const auto spatial = dft_centered(grid_gradient, p, 3, true);
    std::vector<cplx> cropped(static_cast<std::size_t>(d) * d * d);
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x)
                cropped[(static_cast<std::size_t>(z) * d + y) * d + x] =
                    spatial[(static_cast<std::size_t>(z + offset) * p + (y + offset)) * p + (x + offset)];
    return dft_centered(cropped, d, 3, false);
}

SliceProjection SliceProjector::project(const Pose& pose, std::optional<int> max_shell) const {
    const int d = side_;
    check_shell(max_shell, d);
    const int g = grid_.side();
    const int c = center_index(d);
    const double f = factor_;
    const RotationMatrix rot = rotation_zyz(pose);
    const Eigen::Vector2d tau = inplane_translation(pose);
    const double scale = slice_scale(d) * std::pow(f, 1.5);
    const auto values = grid_.values();

    SliceProjection out{FourierSlice(d), std::vector<std::uint8_t>(static_cast<std::size_t>(d) * d, 0)};
    for (int ky = 0; ky < d; ++ky)
        for (int kx = 0; kx < d; ++kx) {
            const int wx = kx - c;
            const int wy = ky - c;
            if (beyond_shell(wx, wy, max_shell))
                continue;
            const TrilinearStencil st(rot * Eigen::Vector3d(f * wx, f * wy, 0.0), g);
            if (!st.interior(g))
                continue;
            cplx acc{};
            st.for_each_tap(g, [&](std::size_t i, double w, double, double, double) {
                acc += w * values[i];
            });
            const std::size_t px = out.slice.flat(ky, kx);
            out.slice[px] = scale * ramp(tau, wx, wy, d) * acc;
            out.valid[px] = 1;
        }
    return out;
}

PoseGradient SliceProjector::accumulate_vjp(const Pose& pose, const FourierSlice& upstream,
                                            std::optional<int> max_shell,
                                            std::span<cplx> grid_gradient, bool want_pose) const {
    const int d = side_;
    if (upstream.side() != d)
        throw ShapeMismatch("upstream slice side differs from volume side");
    const bool want_volume = !grid_gradient.empty();
    if (want_volume && grid_gradient.size() != grid_.size())
        throw ShapeMismatch("gradient buffer does not match the projector grid");
    check_shell(max_shell, d);
    const int g = grid_.side();
    const int c = center_index(d);
    const double f = factor_;
    const RotationMatrix rot = rotation_zyz(pose);
    const RotationJacobian jac = rotation_zyz_grad(pose.alpha, pose.beta, pose.gamma);
    const Eigen::Vector2d tau = inplane_translation(pose);
    const double scale = slice_scale(d) * std::pow(f, 1.5);
    const auto values = grid_.values();

    PoseGradient pg;
    for (int ky = 0; ky < d; ++ky)
        for (int kx = 0; kx < d; ++kx) {
            const cplx up = upstream(ky, kx);
            if (up == cplx{})
                continue;
            const int wx = kx - c;
            const int wy = ky - c;
            if (beyond_shell(wx, wy, max_shell))
                continue;
            const Eigen::Vector3d w3(f * wx, f * wy, 0.0);
            const TrilinearStencil st(rot * w3, g);
            if (!st.interior(g))
                continue;
            const cplx a = scale * ramp(tau, wx, wy, d);
            const cplx back = std::conj(a) * up;
            cplx sample{};
            cplx dx{}, dy{}, dz{};
            st.for_each_tap(g, [&](std::size_t i, double w, double gx, double gy, double gz) {
                if (want_volume)
                    grid_gradient[i] += w * back;
                if (want_pose) {
                    sample += w * values[i];
                    dx += gx * values[i];
                    dy += gy * values[i];
                    dz += gz * values[i];
                }
            });
            if (!want_pose)
                continue;
            // dL/dq = Re(conj(up) * d(out)/dq)
            const cplx cg = std::conj(up) * a;
            auto rot_term = [&](const RotationMatrix& dr) {
                const Eigen::Vector3d dp = dr * w3;
                return std::real(cg * (dx * dp.x() + dy * dp.y() + dz * dp.z()));
            };
            pg.alpha += rot_term(jac.d_alpha);
            pg.beta += rot_term(jac.d_beta);
            pg.gamma += rot_term(jac.d_gamma);
            const cplx d_tau = cg * sample * cplx(0.0, -kTwoPi / d);
            pg.shift.x() += std::real(d_tau * static_cast<double>(wx));
            pg.shift.y() += std::real(d_tau * static_cast<double>(wy));
        }
    return pg;
}

SliceProjection project_fourier(const FourierVolume& fvol, const Pose& pose,
                                std::optional<int> max_shell, int oversampling) {
    if (oversampling != 1)
        return SliceProjector(fvol, oversampling).project(pose, max_shell);
    // Direct path: touches O(D^2) entries, no copy of the volume.
    SliceProjection out = extract_slice(fvol, rotation_zyz(pose), max_shell);
    const int d = fvol.side();
    const int c = center_index(d);
    const double scale = slice_scale(d);
    const Eigen::Vector2d tau = inplane_translation(pose);
    for (int ky = 0; ky < d; ++ky)
        for (int kx = 0; kx < d; ++kx) {
            const std::size_t px = out.slice.flat(ky, kx);
            if (out.valid[px])
                out.slice[px] = scale * ramp(tau, kx - c, ky - c, d) * out.slice[px];
        }
    return out;
}

FourierProjectionGradient project_fourier_vjp(const FourierVolume& fvol, const Pose& pose,
                                              const FourierSlice& upstream,
                                              std::optional<int> max_shell, int oversampling) {
    const SliceProjector projector(fvol, oversampling);
    std::vector<cplx> grid_grad(projector.grid_size());
    FourierProjectionGradient out;
    out.pose = projector.accumulate_vjp(pose, upstream, max_shell, grid_grad, true);

    if (oversampling > 1) {
        // The oversampling map is dense; every entry is touched.
        const auto dense = projector.pull_back(grid_grad);
        for (std::size_t i = 0; i < dense.size(); ++i)
            out.volume.entries.emplace_back(i, dense[i]);
        return out;
    }

    // Touched set: every tap of every contributing pixel, even when the
    // accumulated value cancels to zero.
    const int d = fvol.side();
    const int c = center_index(d);
    const RotationMatrix rot = rotation_zyz(pose);
    std::vector<std::uint8_t> touched(fvol.size(), 0);
    for (int ky = 0; ky < d; ++ky)
        for (int kx = 0; kx < d; ++kx) {
            if (upstream(ky, kx) == cplx{} || beyond_shell(kx - c, ky - c, max_shell))
                continue;
            const TrilinearStencil st(rot * Eigen::Vector3d(kx - c, ky - c, 0.0), d);
            if (!st.interior(d))
                continue;
            st.for_each_tap(d, [&](std::size_t i, double w, double, double, double) {
                if (w > 0.0)
                    touched[i] = 1;
            });
        }
    for (std::size_t i = 0; i < grid_grad.size(); ++i)
        if (touched[i])
            out.volume.entries.emplace_back(i, grid_grad[i]);
    return out;
}

} // namespace dproj
