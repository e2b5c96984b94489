#include <doctest.h>

#include "dproj/pose_scan.hpp"
#include "dproj/simulator.hpp"
#include "dproj/trainer.hpp"
#include "support.hpp"

using namespace dproj;

namespace {

// Asymmetric D = 16 volume observed noise-free at a pose lying on the
// default scan grid.
struct Scene {
    FourierVolume volume;
    SliceProjector projector;
    Pose truth;
    FourierSlice observation;

    Scene()
        : volume(dft3_centered(make_phantom(16, 5, 3, false))), projector(volume, 1),
          truth(on_grid_pose()), observation(projector.project(truth, std::nullopt).slice) {}

    static Pose on_grid_pose() {
        Pose p;
        p.gamma = 0.7;
        p.shift = {0.4, -0.3, 0.0};
        const ScanSpec spec = default_scan(p);
        p.alpha = spec.cols.at(17);
        p.beta = spec.rows.at(20);
        return p;
    }

    [[nodiscard]] PoseObjective objective() const { return PoseObjective(projector, observation, 1.0); }
};

std::vector<double> periodic_profile(int points, int order, double depth_step) {
    // cos-shaped wells of slowly increasing depth offset.
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) {
        const double x = 2.0 * oracle::kPi * i / (points - 1);
        const int well = static_cast<int>(std::floor(x * order / (2.0 * oracle::kPi) + 0.5)) % order;
        v[i] = 2.0 - std::cos(order * x) + depth_step * well;
    }
    return v;
}

} // namespace

TEST_CASE("the surface argmin sits at the generating pose") {
    const Scene s;
    const auto surface = pose_error_surface(s.objective(), default_scan(s.truth));
    CHECK(std::abs(surface.argmin_col - 17) <= 1);
    CHECK(std::abs(surface.argmin_row - 20) <= 1);
    CHECK(surface.min_value() < 1e-20);
    const Pose best = surface.pose_at(surface.argmin_row, surface.argmin_col);
    CHECK(best.gamma == s.truth.gamma);
    CHECK(best.shift == s.truth.shift);
}

TEST_CASE("the surface is periodic in alpha") {
    const Scene s;
    Pose base = s.truth;
    base.shift = {0.0, 0.0, 0.0};
    const auto surface = pose_error_surface(s.objective(), default_scan(base));
    const int last = surface.spec.cols.points - 1;
    CHECK(spans_full_turn(surface.spec.cols));
    CHECK_FALSE(spans_full_turn(surface.spec.rows));
    for (int r = 0; r < surface.spec.rows.points; ++r)
        CHECK(std::abs(surface.at(r, 0) - surface.at(r, last)) < 1e-10);
}

TEST_CASE("zero learning rate gives a constant trajectory") {
    const Scene s;
    Rng rng(1);
    const Pose init = oracle::random_pose(rng);
    const auto t = fit_pose_trajectory(s.objective(), init, 20, 0.0);
    REQUIRE(t.points.size() == 21);
    for (const auto& p : t.points) {
        CHECK(p.pose.alpha == init.alpha);
        CHECK(p.pose.shift == init.shift);
        CHECK(p.loss == t.points.front().loss);
    }
    CHECK_THROWS_AS((void)fit_pose_trajectory(s.objective(), init, 0, 1e-3), ConfigError);
}

TEST_CASE("descent started at the truth stays within one grid cell") {
    const Scene s;
    const auto spec = default_scan(s.truth);
    const double cell_a = spec.cols.at(1) - spec.cols.at(0);
    const double cell_b = spec.rows.at(1) - spec.rows.at(0);
    const auto t = fit_pose_trajectory(s.objective(), s.truth, 500, 1e-3);
    for (const auto& p : t.points) {
        CHECK(std::abs(p.pose.alpha - s.truth.alpha) <= cell_a);
        CHECK(std::abs(p.pose.beta - s.truth.beta) <= cell_b);
    }
}

TEST_CASE("small-step descent never increases the loss") {
    const Scene s;
    const auto objective = s.objective();
    Rng rng(2);
    for (int k = 0; k < 4; ++k) {
        Pose init = s.truth;
        init.alpha += 0.3 * (k + 1) * (k % 2 ? 1 : -1);
        init.beta += 0.1 * k;
        auto monotone = [&](double lr) {
            const auto t = fit_pose_trajectory(objective, init, 300, lr);
            for (std::size_t i = 1; i < t.points.size(); ++i)
                if (t.points[i].loss > t.points[i - 1].loss)
                    return false;
            return true;
        };
        CHECK((monotone(1e-3) || monotone(5e-4)));
    }
}

TEST_CASE("the surface minimum bounds every trajectory from below") {
    const Scene s;
    const auto objective = s.objective();
    const auto surface = pose_error_surface(objective, default_scan(s.truth));
    Rng rng(3);
    for (int k = 0; k < 5; ++k) {
        Pose init = sample_pose(rng, {std::nullopt, 0.0});
        init.shift = s.truth.shift;
        const auto t = fit_pose_trajectory(objective, init, 400, 1e-3, 1e-4);
        CHECK(surface.min_value() <= t.points.back().loss);
    }
}

TEST_CASE("near-global minima of synthetic profiles") {
    SUBCASE("seven equal wells are all found once, endpoint duplicate skipped") {
        const auto v = periodic_profile(361, 7, 0.0);
        const auto mins = near_global_minima(v, true, 0.05);
        CHECK(mins.size() == 7);
    }
    SUBCASE("the tolerance excludes shallow wells") {
        // Well depths rise by 0.02 from a minimum of 1: wells 0..2 are within 5%.
        const auto v = periodic_profile(721, 7, 0.02);
        CHECK(near_global_minima(v, true, 0.05).size() == 3);
        CHECK(near_global_minima(v, true, 1.0).size() == 7);
    }
    SUBCASE("non-periodic ends count as minima only against their inner neighbor") {
        const std::vector<double> v{1.0, 2.0, 3.0, 2.0, 1.02};
        CHECK(near_global_minima(v, false, 0.05).size() == 2);
        CHECK(near_global_minima(v, false, 0.01).size() == 1);
    }
}

TEST_CASE("a seven-fold phantom scanned in alpha has seven near-global minima") {
    // A noisy observation gives the loss a floor, so the tolerance is
    // relative to a nonzero minimum.
    const auto gt = make_phantom(32, 4, 3, true);
    SynthesisConfig cfg;
    cfg.count = 1;
    cfg.snr = 1.0;
    cfg.seed = 21;
    const Dataset ds = synthesize_dataset(gt, cfg);
    const auto obs = to_fourier(ds);
    const SliceProjector projector(dft3_centered(gt), 1);
    const PoseObjective objective(projector, obs[0].data, ds.meta.sigma_eps);
    const Pose truth = *ds.observations[0].pose;
    const auto profile = pose_error_profile(objective, {EulerAngle::Alpha, 0.0, 2.0 * oracle::kPi, 361}, truth);
    CHECK(near_global_minima(profile.values, true, 0.05).size() >= 7);
}

TEST_CASE("axis names and CSV layouts") {
    CHECK(parse_euler_angle("beta") == EulerAngle::Beta);
    CHECK(std::string(to_string(EulerAngle::Gamma)) == "gamma");
    CHECK_THROWS_AS((void)parse_euler_angle("delta"), ConfigError);

    const Scene s;
    ScanSpec small = default_scan(s.truth);
    small.cols.points = 3;
    small.rows.points = 2;
    const auto surface = pose_error_surface(s.objective(), small);
    const auto csv = surface_csv(surface);
    CHECK(csv.rfind("beta\\alpha,0,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    const auto t = fit_pose_trajectory(s.objective(), s.truth, 2, 1e-3);
    const auto tcsv = trajectory_csv(t);
    CHECK(tcsv.rfind("step,alpha,beta,gamma,tx,ty,loss\n", 0) == 0);
    CHECK(std::count(tcsv.begin(), tcsv.end(), '\n') == 4);
    CHECK(surface_svg(surface, &t).find("<svg") != std::string::npos);
}
