#include <doctest.h>

#include "dproj/project_real.hpp"
#include "dproj/simulator.hpp"
#include "support.hpp"

using namespace dproj;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double total(std::span<const double> a) {
    double s = 0.0;
    for (double v : a)
        s += v;
    return s;
}

// Pose away from kernel kinks for every output voxel.
Pose kink_free_pose(Rng& rng, int side, double h) {
    const auto offsets = oracle::voxel_offsets(side);
    for (;;) {
        const Pose p = oracle::random_pose(rng);
        if (oracle::kink_free(p, offsets, h))
            return p;
    }
}

} // namespace

TEST_CASE("identity pose reproduces the volume exactly") {
    const auto v = oracle::random_volume(8, 1);
    CHECK(resample_affine(v, Pose{}).storage() == v.storage());
}

TEST_CASE("quarter turn about z permutes voxels") {
    const int d = 4, c = 2;
    const auto v = oracle::random_volume(d, 2);
    const auto out = resample_affine(v, Pose{oracle::kPi / 2, 0.0, 0.0});
    for (int z = 0; z < d; ++z)
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x) {
                // Output voxel zeta gathers from R zeta = (-Y, X, Z).
                const int sx = -(y - c) + c;
                const int sy = (x - c) + c;
                const double expected = (sx >= 0 && sx < d) ? v(z, sy, sx) : 0.0;
                CHECK(std::abs(out(z, y, x) - expected) < 1e-12);
            }
}

TEST_CASE("half-voxel shift splits a delta between two voxels") {
    VoxelVolume v(4);
    v(2, 2, 2) = 1.0;
    Pose p;
    p.shift = {0.5, 0.0, 0.0};
    const auto out = resample_affine(v, p);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i == out.flat(2, 2, 2) || i == out.flat(2, 2, 3))
            CHECK(out[i] == doctest::Approx(0.5));
        else
            CHECK(out[i] == 0.0);
    }
}

TEST_CASE("projection along z") {
    VoxelVolume ones(4, 1.0, std::vector<double>(64, 1.0));
    const auto flat = project_z(ones);
    for (double px : flat.values())
        CHECK(px == 4.0);

    VoxelVolume hot(4);
    hot(1, 3, 0) = 1.0;
    const auto img = project_z(hot);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            CHECK(img(y, x) == ((y == 3 && x == 0) ? 1.0 : 0.0));

    const auto v = oracle::random_volume(8, 3);
    const auto p = project_z(v);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double s = 0.0;
            for (int z = 0; z < 8; ++z)
                s += v(z, y, x);
            CHECK(p(y, x) == s);
        }
}

TEST_CASE("project_real composes resampling and z integration") {
    VoxelVolume ones(4, 1.0, std::vector<double>(64, 1.0));
    const auto flat = project_real(ones, Pose{});
    for (double px : flat.values())
        CHECK(px == 4.0);

    const auto v = make_phantom(4, 2, 5, false);
    const auto turned = project_real(v, Pose{oracle::kPi / 2, 0.0, 0.0});
    const auto reference = project_z(resample_affine(v, Pose{oracle::kPi / 2, 0.0, 0.0}));
    CHECK(turned.storage() == reference.storage());

    Rng rng(9);
    const Pose p = oracle::random_pose(rng);
    CHECK(project_real(v, p).storage() == project_z(resample_affine(v, p)).storage());
}

TEST_CASE("z translation is invisible for interior-supported volumes") {
    PhantomOptions opts;
    opts.center_radius = 0.05;
    opts.min_width = 0.8;
    opts.max_width = 1.0;
    const auto v = make_phantom(16, 3, 6, false, opts);
    Pose p;
    p.shift = {0.0, 0.0, 1.5};
    const auto shifted = project_real(v, p);
    const auto plain = project_real(v, Pose{});
    for (std::size_t i = 0; i < plain.size(); ++i)
        CHECK(std::abs(shifted[i] - plain[i]) < 1e-6);
}

TEST_CASE("projection is linear in the volume") {
    Rng rng(7);
    const Pose p = oracle::random_pose(rng);
    const auto a = oracle::random_volume(8, 10);
    const auto b = oracle::random_volume(8, 11);
    VoxelVolume mix(8);
    for (std::size_t i = 0; i < mix.size(); ++i)
        mix[i] = 2.0 * a[i] - 0.5 * b[i];
    const auto pa = project_real(a, p);
    const auto pb = project_real(b, p);
    const auto pm = project_real(mix, p);
    for (std::size_t i = 0; i < pm.size(); ++i)
        CHECK(std::abs(pm[i] - (2.0 * pa[i] - 0.5 * pb[i])) < 1e-12);
}

TEST_CASE("translations conserve mass of interior-supported volumes") {
    PhantomOptions opts;
    opts.center_radius = 0.05;
    opts.min_width = 0.8;
    opts.max_width = 1.2;
    const auto v = make_phantom(16, 4, 8, false, opts);
    Rng rng(12);
    std::uniform_real_distribution<double> t(-1.5, 1.5);
    for (int k = 0; k < 10; ++k) {
        Pose p;
        p.shift = {t(rng), t(rng), t(rng)};
        const double mass = total(v.values());
        CHECK(std::abs(total(project_real(v, p).values()) - mass) / mass < 1e-6);
    }
}

TEST_CASE("interior samples reproduce a constant volume exactly under any pose") {
    // Partition of unity: every fully interior sample of a constant field
    // returns that constant.
    VoxelVolume ones(8, 1.0, std::vector<double>(512, 1.0));
    Rng rng(13);
    for (int k = 0; k < 5; ++k) {
        const Pose p = oracle::random_pose(rng);
        const auto out = resample_affine(ones, p);
        const RotationMatrix r = rotation_zyz(p);
        for (int z = 0; z < 8; ++z)
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    if (TrilinearStencil(sample_point(r, p.shift, z, y, x, 8), 8).interior(8))
                        CHECK(out(z, y, x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("identity pose: volume gradient broadcasts the upstream along z") {
    const auto v = oracle::random_volume(4, 14);
    const auto up = oracle::random_image(4, 15);
    const auto g = project_real_vjp(v, Pose{}, up);
    for (int z = 0; z < 4; ++z)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x)
                CHECK(g.volume(z, y, x) == up(y, x));
}

TEST_CASE("vjp passes the dot-product test") {
    Rng rng(16);
    const auto v = oracle::random_volume(8, 17);
    const auto delta = oracle::random_volume(8, 18);
    const auto up = oracle::random_image(8, 19);
    for (int k = 0; k < 5; ++k) {
        const Pose p = kink_free_pose(rng, 8, 1e-5);
        const auto g = project_real_vjp(v, p, up);
        const double lhs = dot(up.values(), project_real(delta, p).values());
        const double rhs = dot(g.volume.values(), delta.values());
        CHECK(std::abs(lhs - rhs) / std::abs(lhs) < 1e-8);
    }
}

TEST_CASE("pose gradients match central differences away from kinks") {
    Rng rng(20);
    const double h = 1e-5;
    const auto v = make_phantom(8, 3, 21, false);
    const auto up = oracle::random_image(8, 22);
    for (int k = 0; k < 5; ++k) {
        const Pose p = kink_free_pose(rng, 8, h);
        const auto g = project_real_vjp(v, p, up).pose;
        auto loss = [&](const Pose& q) { return dot(up.values(), project_real(v, q).values()); };
        auto fd = [&](auto setter) {
            Pose a = p, b = p;
            setter(a, h);
            setter(b, -h);
            return (loss(a) - loss(b)) / (2 * h);
        };
        CHECK(oracle::relative_error(g.alpha, fd([](Pose& q, double s) { q.alpha += s; })) < 1e-4);
        CHECK(oracle::relative_error(g.beta, fd([](Pose& q, double s) { q.beta += s; })) < 1e-4);
        CHECK(oracle::relative_error(g.gamma, fd([](Pose& q, double s) { q.gamma += s; })) < 1e-4);
        for (int m = 0; m < 3; ++m)
            CHECK(oracle::relative_error(g.shift[m], fd([m](Pose& q, double s) { q.shift[m] += s; })) < 1e-4);
    }
}

TEST_CASE("t_z gradient vanishes for interior-supported volumes") {
    PhantomOptions opts;
    opts.center_radius = 0.05;
    opts.min_width = 0.8;
    opts.max_width = 1.0;
    const auto v = make_phantom(16, 3, 23, false, opts);
    const auto up = oracle::random_image(16, 24);
    Pose p;
    p.shift = {0.3, -0.2, 0.4};
    const auto g = project_real_vjp(v, p, up).pose;
    CHECK(std::abs(g.shift.z()) < 1e-6 * std::max(1.0, std::abs(g.shift.x())));
}
