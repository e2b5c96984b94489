#include "dproj/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "dproj/project_real.hpp"

namespace dproj {

namespace {

struct Blob {
    Eigen::Vector3d center;
    Eigen::Matrix3d precision;
    double amplitude;
    double reach;  // bounding half-width in voxels
};

Eigen::Matrix3d random_rotation(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double a = 2.0 * std::numbers::pi * u(rng);
    const double b = std::acos(2.0 * u(rng) - 1.0);
    const double g = 2.0 * std::numbers::pi * u(rng);
    return rotation_zyz(a, b, g);
}

void splat(VoxelVolume& vol, const Blob& blob) {
    const int d = vol.side();
    const int c = center_index(d);
    auto lo = [&](int m) { return std::max(0, static_cast<int>(std::floor(blob.center[m] - blob.reach)) + c); };
    auto hi = [&](int m) { return std::min(d - 1, static_cast<int>(std::ceil(blob.center[m] + blob.reach)) + c); };
    for (int z = lo(2); z <= hi(2); ++z)
        for (int y = lo(1); y <= hi(1); ++y)
            for (int x = lo(0); x <= hi(0); ++x) {
                const Eigen::Vector3d r = Eigen::Vector3d(x - c, y - c, z - c) - blob.center;
                vol(z, y, x) += blob.amplitude * std::exp(-0.5 * r.dot(blob.precision * r));
            }
}

} // namespace

bool Dataset::has_all_poses() const {
    return std::all_of(observations.begin(), observations.end(),
                       [](const ObservationRecord& o) { return o.pose.has_value(); });
}

VoxelVolume make_phantom(int side, int blob_count, std::uint64_t seed, bool symmetric,
                         const PhantomOptions& options) {
    require_even_side(side);
    if (blob_count < 1)
        throw ConfigError("blob_count must be >= 1");
    if (options.min_width <= 0.0 || options.max_width < options.min_width)
        throw ConfigError("invalid blob width range");
    Rng rng = make_stream(seed, {0x70686e74});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double radius = options.center_radius * side;

    VoxelVolume vol(side, options.pixel_size);
    for (int b = 0; b < blob_count; ++b) {
        Eigen::Vector3d dir(n01(rng), n01(rng), n01(rng));
        dir.normalize();
        const Eigen::Vector3d center = dir * radius * std::cbrt(u(rng));
        Eigen::Vector3d widths;
        for (int m = 0; m < 3; ++m)
            widths[m] = options.min_width + (options.max_width - options.min_width) * u(rng);
        const Eigen::Matrix3d orient = random_rotation(rng);
        const Eigen::Matrix3d precision =
            orient * widths.cwiseInverse().cwiseAbs2().asDiagonal() * orient.transpose();
        const double amplitude = 0.5 + 0.5 * u(rng);
        const double reach = 4.0 * widths.maxCoeff();

        const int copies = symmetric ? options.symmetry_order : 1;
        for (int k = 0; k < copies; ++k) {
            const Eigen::Matrix3d rz = rotation_z(2.0 * std::numbers::pi * k / copies);
            splat(vol, {rz * center, rz * precision * rz.transpose(), amplitude, reach});
        }
    }
    const double peak = *std::max_element(vol.values().begin(), vol.values().end());
    for (double& v : vol.values())
        v /= peak;
    return vol;
}

Pose sample_pose(Rng& rng, const PoseSampling& sampling) {
    constexpr double pi = std::numbers::pi;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Pose p;
    p.alpha = 2.0 * pi * u(rng);
    if (sampling.cone_half_angle_deg) {
        const double h = *sampling.cone_half_angle_deg;
        if (!(h > 0.0 && h <= 90.0))
            throw ConfigError("cone half-angle must lie in (0, 90] degrees");
        p.beta = (2.0 * u(rng) - 1.0) * h * pi / 180.0;
    } else {
        p.beta = std::acos(2.0 * u(rng) - 1.0);
    }
    p.gamma = 2.0 * pi * u(rng);
    const double t = sampling.translation_range;
    for (int m = 0; m < 3; ++m)
        p.shift[m] = (2.0 * u(rng) - 1.0) * t;
    return p;
}

double pooled_variance(std::span<const ProjectionImage> images) {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& img : images)
        for (double v : img.values()) {
            sum += v;
            sum_sq += v * v;
            ++n;
        }
    if (n == 0)
        return 0.0;
    const double mean = sum / n;
    return std::max(0.0, sum_sq / n - mean * mean);
}

double snr_to_sigma(std::span<const ProjectionImage> clean, double snr) {
    if (!(snr > 0.0))
        throw ConfigError("snr must be positive");
    const double var = pooled_variance(clean);
    if (!(var > 0.0))
        throw DegenerateSignal("clean projections have zero pooled variance");
    return std::sqrt(var / snr);
}

Dataset synthesize_dataset(const VoxelVolume& ground_truth, const SynthesisConfig& config) {
    if (config.count < 1)
        throw ConfigError("dataset size must be >= 1");
    Dataset ds;
    ds.meta.side = ground_truth.side();
    ds.meta.pixel_size = ground_truth.pixel_size();
    ds.meta.snr = config.snr;
    ds.meta.cone_half_angle_deg = config.poses.cone_half_angle_deg;
    ds.meta.translation_range = config.poses.translation_range;
    ds.meta.seed = config.seed;

    std::vector<Pose> poses(static_cast<std::size_t>(config.count));
    std::vector<ProjectionImage> clean(poses.size());
    for (std::size_t n = 0; n < poses.size(); ++n) {
        Rng rng = make_stream(config.seed, {n, 0});
        poses[n] = sample_pose(rng, config.poses);
        clean[n] = project_real(ground_truth, poses[n]);
    }
    ds.meta.signal_variance = pooled_variance(clean);
    ds.meta.sigma_eps = config.snr ? snr_to_sigma(clean, *config.snr) : 0.0;

    ds.observations.resize(poses.size());
    for (std::size_t n = 0; n < poses.size(); ++n) {
        auto& obs = ds.observations[n];
        obs.id = static_cast<int>(n);
        obs.image = std::move(clean[n]);
        if (config.snr) {
            Rng rng = make_stream(config.seed, {n, 1});
            std::normal_distribution<double> noise(0.0, ds.meta.sigma_eps);
            for (double& v : obs.image.values())
                v += noise(rng);
        }
        if (!config.drop_poses)
            obs.pose = poses[n];
    }
    return ds;
}

} // namespace dproj
