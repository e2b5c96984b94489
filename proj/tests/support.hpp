#pragma once

// Independent reference implementations and small helpers for the test
// binaries. Nothing here calls the library code it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "dproj/geometry.hpp"
#include "dproj/grid.hpp"
#include "dproj/rng.hpp"

namespace oracle {

using dproj::cplx;

inline constexpr double kPi = std::numbers::pi;

/// Direct-summation centered unitary DFT over a side^rank row-major array.
inline std::vector<cplx> naive_dft(const std::vector<cplx>& in, int side, int rank, bool inverse = false) {
    const int c = side / 2;
    const double sign = inverse ? 1.0 : -1.0;
    const double norm = std::pow(static_cast<double>(side), -0.5 * rank);
    const std::size_t n = in.size();
    std::vector<cplx> out(n);
    auto coords = [&](std::size_t flat) {
        std::array<int, 3> k{};
        for (int r = 0; r < rank; ++r) {
            k[r] = static_cast<int>(flat % side) - c;
            flat /= side;
        }
        return k;
    };
    for (std::size_t a = 0; a < n; ++a) {
        const auto ka = coords(a);
        cplx acc{};
        for (std::size_t b = 0; b < n; ++b) {
            const auto kb = coords(b);
            double dot = 0.0;
            for (int r = 0; r < rank; ++r)
                dot += static_cast<double>(ka[r]) * kb[r];
            acc += in[b] * std::polar(1.0, sign * 2.0 * kPi * dot / side);
        }
        out[a] = acc * norm;
    }
    return out;
}

/// Mirror partner found by searching for the index whose centered coordinates
/// are the negation of k, modulo side.
inline std::size_t brute_mirror(std::size_t flat, int side, int rank) {
    const int c = side / 2;
    std::array<int, 3> k{};
    std::size_t f = flat;
    for (int r = 0; r < rank; ++r) {
        k[r] = static_cast<int>(f % side) - c;
        f /= side;
    }
    const std::size_t n = static_cast<std::size_t>(std::pow(side, rank));
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t g = j;
        bool match = true;
        for (int r = 0; r < rank; ++r) {
            const int q = static_cast<int>(g % side) - c;
            g /= side;
            if (((q + k[r]) % side + side) % side != 0)
                match = false;
        }
        if (match)
            return j;
    }
    return n;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline std::vector<double> normal_vector(std::size_t n, std::uint64_t seed) {
    dproj::Rng rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> out(n);
    for (auto& v : out)
        v = g(rng);
    return out;
}

inline std::vector<cplx> normal_complex(std::size_t n, std::uint64_t seed) {
    dproj::Rng rng(seed);
    std::normal_distribution<double> g;
    std::vector<cplx> out(n);
    for (auto& v : out)
        v = {g(rng), g(rng)};
    return out;
}

inline dproj::VoxelVolume random_volume(int side, std::uint64_t seed) {
    return dproj::VoxelVolume(side, 1.0, normal_vector(static_cast<std::size_t>(side) * side * side, seed));
}

inline dproj::ProjectionImage random_image(int side, std::uint64_t seed) {
    return dproj::ProjectionImage(side, normal_vector(static_cast<std::size_t>(side) * side, seed));
}

/// Every trilinear sample coordinate keeps its floor when any angle moves by
/// +-h, so central differences never straddle a kernel kink. points holds
/// the unrotated, unshifted sample offsets.
inline bool kink_free(const dproj::Pose& pose, const std::vector<Eigen::Vector3d>& points, double h,
                      bool shift_inside = true) {
    auto floors = [&](const dproj::Pose& p) {
        const dproj::RotationMatrix r = dproj::rotation_zyz(p);
        std::vector<Eigen::Vector3d> out;
        out.reserve(points.size());
        for (const auto& q : points)
            out.push_back((r * (shift_inside ? Eigen::Vector3d(q - p.shift) : q)).array().floor());
        return out;
    };
    const auto base = floors(pose);
    for (int dof = 0; dof < 6; ++dof)
        for (double s : {-h, h}) {
            dproj::Pose p = pose;
            switch (dof) {
            case 0: p.alpha += s; break;
            case 1: p.beta += s; break;
            case 2: p.gamma += s; break;
            default: p.shift[dof - 3] += s; break;
            }
            if (floors(p) != base)
                return false;
        }
    return true;
}

/// Centered coordinates of every voxel of a side^3 grid.
inline std::vector<Eigen::Vector3d> voxel_offsets(int side) {
    const int c = side / 2;
    std::vector<Eigen::Vector3d> out;
    for (int z = 0; z < side; ++z)
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x)
                out.emplace_back(x - c, y - c, z - c);
    return out;
}

/// Centered in-plane frequencies of a side^2 slice, lifted to w3 = 0.
inline std::vector<Eigen::Vector3d> slice_offsets(int side, double scale = 1.0) {
    const int c = side / 2;
    std::vector<Eigen::Vector3d> out;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            out.emplace_back(scale * (x - c), scale * (y - c), 0.0);
    return out;
}

inline dproj::Pose random_pose(dproj::Rng& rng, double shift_range = 1.5) {
    std::uniform_real_distribution<double> angle(0.1, 2.0 * kPi - 0.1);
    std::uniform_real_distribution<double> tilt(0.2, kPi - 0.2);
    std::uniform_real_distribution<double> t(-shift_range, shift_range);
    dproj::Pose p{angle(rng), tilt(rng), angle(rng), {t(rng), t(rng), t(rng)}};
    return p;
}

} // namespace oracle
