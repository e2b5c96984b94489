#pragma once

#include <Eigen/Core>

namespace dproj {

using RotationMatrix = Eigen::Matrix3d;

/// Per-observation pose: Z-Y-Z Euler angles (radians, stored unwrapped) and a
/// translation in voxel units. The rotation R = Rz(alpha) Ry(beta) Rz(gamma)
/// maps imaging-frame coordinates to specimen coordinates: the rendered
/// volume is v'(x) = v(R (x - t)), so alpha turns the specimen about its own
/// z axis and beta tilts the viewing direction away from it.
struct Pose {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    Eigen::Vector3d shift = Eigen::Vector3d::Zero();

    friend bool operator==(const Pose&, const Pose&) = default;
};

/// Gradient of a scalar with respect to every pose scalar. The z shift is
/// carried for completeness; the Fourier path never depends on it.
struct PoseGradient {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    Eigen::Vector3d shift = Eigen::Vector3d::Zero();

    PoseGradient& operator+=(const PoseGradient& o) {
        alpha += o.alpha;
        beta += o.beta;
        gamma += o.gamma;
        shift += o.shift;
        return *this;
    }

    /// Norm over the five dofs that affect a projection (alpha, beta, gamma, t_x, t_y).
    [[nodiscard]] double norm5() const;
};

[[nodiscard]] RotationMatrix rotation_z(double angle);
[[nodiscard]] RotationMatrix rotation_y(double angle);
[[nodiscard]] RotationMatrix rotation_zyz(double alpha, double beta, double gamma);
[[nodiscard]] inline RotationMatrix rotation_zyz(const Pose& p) {
    return rotation_zyz(p.alpha, p.beta, p.gamma);
}

struct RotationJacobian {
    RotationMatrix d_alpha;
    RotationMatrix d_beta;
    RotationMatrix d_gamma;
};

[[nodiscard]] RotationJacobian rotation_zyz_grad(double alpha, double beta, double gamma);

/// Orthographic projection along e_z drops the z component of the shift.
[[nodiscard]] Eigen::Vector2d inplane_translation(const Pose& pose);

/// Angles wrapped to alpha, gamma in [0, 2pi), beta in [0, pi] with the
/// equivalent (alpha + pi, -beta, gamma + pi) rewrite for negative beta.
[[nodiscard]] Pose canonicalize(const Pose& pose);

} // namespace dproj
