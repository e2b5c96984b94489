#include "dproj/geometry.hpp"

#include <cmath>
#include <numbers>

namespace dproj {

namespace {

RotationMatrix d_rotation_z(double a) {
    const double c = std::cos(a);
    const double s = std::sin(a);
    RotationMatrix m;
    m << -s, -c, 0.0,
          c, -s, 0.0,
        0.0, 0.0, 0.0;
    return m;
}

RotationMatrix d_rotation_y(double b) {
    const double c = std::cos(b);
    const double s = std::sin(b);
    RotationMatrix m;
    m << -s, 0.0,  c,
        0.0, 0.0, 0.0,
         -c, 0.0, -s;
    return m;
}

double wrap_two_pi(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a, two_pi);
    if (w < 0.0)
        w += two_pi;
    return w;
}

} // namespace

double PoseGradient::norm5() const {
    return std::sqrt(alpha * alpha + beta * beta + gamma * gamma + shift.x() * shift.x()
                     + shift.y() * shift.y());
}

RotationMatrix rotation_z(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    RotationMatrix m;
    m <<   c,  -s, 0.0,
           s,   c, 0.0,
         0.0, 0.0, 1.0;
    return m;
}

RotationMatrix rotation_y(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    RotationMatrix m;
    m <<   c, 0.0,   s,
         0.0, 1.0, 0.0,
          -s, 0.0,   c;
    return m;
}

RotationMatrix rotation_zyz(double alpha, double beta, double gamma) {
    return rotation_z(alpha) * rotation_y(beta) * rotation_z(gamma);
}

RotationJacobian rotation_zyz_grad(double alpha, double beta, double gamma) {
    const RotationMatrix za = rotation_z(alpha);
    const RotationMatrix yb = rotation_y(beta);
    const RotationMatrix zg = rotation_z(gamma);
    return {d_rotation_z(alpha) * yb * zg, za * d_rotation_y(beta) * zg,
            za * yb * d_rotation_z(gamma)};
}

Eigen::Vector2d inplane_translation(const Pose& pose) { return pose.shift.head<2>(); }

Pose canonicalize(const Pose& pose) {
    constexpr double pi = std::numbers::pi;
    Pose out = pose;
    double beta = std::remainder(pose.beta, 2.0 * pi);  // (-pi, pi]
    if (beta < 0.0) {
        beta = -beta;
        out.alpha += pi;
        out.gamma += pi;
    }
    out.beta = beta;
    out.alpha = wrap_two_pi(out.alpha);
    out.gamma = wrap_two_pi(out.gamma);
    return out;
}

} // namespace dproj
