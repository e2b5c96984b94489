#include "dproj/project_real.hpp"

namespace dproj {

namespace {

double gather(std::span<const double> values, const TrilinearStencil& st, int side) {
    double acc = 0.0;
    st.for_each_tap(side, [&](std::size_t i, double w, double, double, double) {
        acc += values[i] * w;
    });
    return acc;
}

} // namespace

Eigen::Vector3d sample_point(const RotationMatrix& rot, const Eigen::Vector3d& shift, int z, int y,
                             int x, int side) {
    const int c = center_index(side);
    const Eigen::Vector3d zeta(x - c, y - c, z - c);
    return rot * (zeta - shift);
}

std::vector<ResampleTap> resample_taps(const Eigen::Vector3d& point, int side) {
    std::vector<ResampleTap> taps;
    taps.reserve(8);
    TrilinearStencil(point, side).for_each_tap(side, [&](std::size_t i, double w, double, double,
                                                         double) {
        if (w > 0.0)
            taps.push_back({i, w});
    });
    return taps;
}

VoxelVolume resample_affine(const VoxelVolume& volume, const Pose& pose) {
    const int d = volume.side();
    const RotationMatrix rot = rotation_zyz(pose);
    VoxelVolume out(d, volume.pixel_size());
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x) {
                const TrilinearStencil st(sample_point(rot, pose.shift, z, y, x, d), d);
                out(z, y, x) = gather(volume.values(), st, d);
            }
    return out;
}

ProjectionImage project_z(const VoxelVolume& volume) {
    const int d = volume.side();
    ProjectionImage img(d);
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x)
                img(y, x) += volume(z, y, x);
    return img;
}

ProjectionImage project_real(const VoxelVolume& volume, const Pose& pose) {
    const int d = volume.side();
    const RotationMatrix rot = rotation_zyz(pose);
    ProjectionImage img(d);
    // Same z-ascending summation order as project_z(resample_affine(...)).
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x) {
                const TrilinearStencil st(sample_point(rot, pose.shift, z, y, x, d), d);
                img(y, x) += gather(volume.values(), st, d);
            }
    return img;
}

RealProjectionGradient project_real_vjp(const VoxelVolume& volume, const Pose& pose,
                                        const ProjectionImage& upstream) {
    const int d = volume.side();
    if (upstream.side() != d)
        throw ShapeMismatch("upstream gradient side differs from volume side");
    const RotationMatrix rot = rotation_zyz(pose);
    const RotationJacobian jac = rotation_zyz_grad(pose.alpha, pose.beta, pose.gamma);
    const int c = center_index(d);

    RealProjectionGradient out{VoxelVolume(d, volume.pixel_size()), {}};
    auto grad_vol = out.volume.values();
    const auto values = volume.values();

    for (int z = 0; z < d; ++z)
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x) {
                const double u = upstream(y, x);
                if (u == 0.0)
                    continue;
                const Eigen::Vector3d rel = Eigen::Vector3d(x - c, y - c, z - c) - pose.shift;
                const TrilinearStencil st(rot * rel, d);
                Eigen::Vector3d dsample = Eigen::Vector3d::Zero();
                st.for_each_tap(d, [&](std::size_t i, double w, double gx, double gy, double gz) {
                    grad_vol[i] += u * w;
                    dsample += values[i] * Eigen::Vector3d(gx, gy, gz);
                });
                dsample *= u;
                out.pose.alpha += dsample.dot(jac.d_alpha * rel);
                out.pose.beta += dsample.dot(jac.d_beta * rel);
                out.pose.gamma += dsample.dot(jac.d_gamma * rel);
                out.pose.shift -= rot.transpose() * dsample;
            }
    return out;
}

} // namespace dproj
