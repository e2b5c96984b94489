#include <doctest.h>

#include <Eigen/Dense>

#include "dproj/geometry.hpp"
#include "support.hpp"

using namespace dproj;

namespace {

std::vector<std::array<double, 3>> random_angles(int count, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-2.0 * oracle::kPi, 2.0 * oracle::kPi);
    std::vector<std::array<double, 3>> out(count);
    for (auto& a : out)
        a = {u(rng), u(rng), u(rng)};
    return out;
}

} // namespace

TEST_CASE("zero angles give the identity") {
    CHECK(rotation_zyz(0.0, 0.0, 0.0).isApprox(RotationMatrix::Identity(), 0.0));
}

TEST_CASE("alpha = pi/2 maps e_x to e_y") {
    const Eigen::Vector3d v = rotation_zyz(oracle::kPi / 2, 0.0, 0.0) * Eigen::Vector3d::UnitX();
    CHECK((v - Eigen::Vector3d::UnitY()).norm() < 1e-15);
}

TEST_CASE("rotations are orthonormal with determinant one") {
    for (const auto& [a, b, g] : random_angles(100, 1)) {
        const RotationMatrix r = rotation_zyz(a, b, g);
        CHECK((r * r.transpose() - RotationMatrix::Identity()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(r.determinant() - 1.0) < 1e-10);
    }
}

TEST_CASE("z rotations compose additively when beta is zero") {
    for (const auto& [a, b, g] : random_angles(20, 2)) {
        (void)b;
        const RotationMatrix lhs = rotation_zyz(a, 0.0, g);
        const RotationMatrix rhs = rotation_zyz(a + g, 0.0, 0.0);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("rotation derivatives match central differences") {
    const double h = 1e-6;
    for (const auto& [a, b, g] : random_angles(20, 3)) {
        const auto jac = rotation_zyz_grad(a, b, g);
        const RotationMatrix fa = (rotation_zyz(a + h, b, g) - rotation_zyz(a - h, b, g)) / (2 * h);
        const RotationMatrix fb = (rotation_zyz(a, b + h, g) - rotation_zyz(a, b - h, g)) / (2 * h);
        const RotationMatrix fg = (rotation_zyz(a, b, g + h) - rotation_zyz(a, b, g - h)) / (2 * h);
        CHECK((jac.d_alpha - fa).cwiseAbs().maxCoeff() < 1e-5);
        CHECK((jac.d_beta - fb).cwiseAbs().maxCoeff() < 1e-5);
        CHECK((jac.d_gamma - fg).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("d/dbeta at beta = 0 is the antisymmetric y generator") {
    const RotationMatrix d = rotation_zyz_grad(0.0, 0.0, 0.0).d_beta;
    RotationMatrix gy;
    gy << 0, 0, 1,
          0, 0, 0,
         -1, 0, 0;
    CHECK((d - gy).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((d + d.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("in-plane translation drops the z component") {
    Pose p;
    p.shift = {0.0, 0.0, 5.0};
    CHECK(inplane_translation(p) == Eigen::Vector2d(0.0, 0.0));
    p.shift = {1.5, -2.0, 3.0};
    CHECK(inplane_translation(p) == Eigen::Vector2d(1.5, -2.0));
    CHECK(inplane_translation(Pose{}) == Eigen::Vector2d::Zero());
}

TEST_CASE("canonicalize preserves the rotation") {
    for (const auto& [a, b, g] : random_angles(50, 4)) {
        Pose p{a, b, g};
        const Pose c = canonicalize(p);
        CHECK(c.beta >= 0.0);
        CHECK(c.beta <= oracle::kPi);
        CHECK(c.alpha >= 0.0);
        CHECK(c.alpha < 2 * oracle::kPi);
        CHECK((rotation_zyz(c) - rotation_zyz(p)).cwiseAbs().maxCoeff() < 1e-12);
    }
}
