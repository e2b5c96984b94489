#pragma once

// Pose error landscapes for a fixed volume and one observation: exhaustive
// scans over Euler-angle grids, plain gradient-descent pose fits, and a
// local-minimum counter.
//
// The pose objective is the Fourier negative log-likelihood without its
// normalizing constant, averaged over valid slice entries:
//   loss(p) = mean_valid |obs - pred(p)|^2 / (2 sigma^2).
// The default shell limit D/2 - 1 keeps the valid set independent of the
// pose, so the average differs from the full negative log-likelihood only
// by a pose-independent affine map.

#include <optional>
#include <string>
#include <vector>

#include "dproj/geometry.hpp"
#include "dproj/grid.hpp"
#include "dproj/project_fourier.hpp"

namespace dproj {

enum class EulerAngle { Alpha, Beta, Gamma };

[[nodiscard]] const char* to_string(EulerAngle angle) noexcept;
/// "alpha", "beta" or "gamma"; ConfigError otherwise.
[[nodiscard]] EulerAngle parse_euler_angle(const std::string& name);

/// points values from lo to hi, both endpoints included.
struct ScanAxis {
    EulerAngle angle = EulerAngle::Alpha;
    double lo = 0.0;
    double hi = 0.0;
    int points = 2;

    [[nodiscard]] double at(int i) const noexcept;
};

struct PoseObjective {
    const SliceProjector* projector = nullptr;
    const FourierSlice* observation = nullptr;
    double sigma = 1.0;
    std::optional<int> max_shell;

    /// Objective bound to a projector; max_shell defaults to D/2 - 1.
    PoseObjective(const SliceProjector& proj, const FourierSlice& obs, double noise_sigma,
                  std::optional<int> shell_limit = std::nullopt);

    [[nodiscard]] double loss(const Pose& pose) const;
    /// Loss and its gradient over the five projection dofs.
    [[nodiscard]] std::pair<double, PoseGradient> loss_and_grad(const Pose& pose) const;
};

struct ScanSpec {
    ScanAxis cols{EulerAngle::Alpha, 0.0, 0.0, 90};  // hi filled by default_scan
    ScanAxis rows{EulerAngle::Beta, 0.0, 0.0, 45};
    /// Values of the angle not scanned and the translation.
    Pose fixed;
};

/// alpha in [0, 2 pi] by beta in [0, pi], 90 x 45, other dofs from base.
[[nodiscard]] ScanSpec default_scan(const Pose& base);

struct PoseSurface {
    ScanSpec spec;
    std::vector<double> values;  // row-major: values[r * cols + c]
    int argmin_row = 0;
    int argmin_col = 0;

    [[nodiscard]] double at(int r, int c) const { return values[static_cast<std::size_t>(r) * spec.cols.points + c]; }
    [[nodiscard]] double min_value() const { return at(argmin_row, argmin_col); }
    [[nodiscard]] Pose pose_at(int r, int c) const;
};

[[nodiscard]] PoseSurface pose_error_surface(const PoseObjective& objective, const ScanSpec& spec);

/// Loss along one angle with all other dofs from base.
struct PoseProfile {
    ScanAxis axis;
    std::vector<double> values;
    std::size_t argmin = 0;
};
[[nodiscard]] PoseProfile pose_error_profile(const PoseObjective& objective, const ScanAxis& axis,
                                             const Pose& base);

struct TrajectoryPoint {
    Pose pose;
    double loss = 0.0;
};

struct PoseTrajectory {
    std::vector<TrajectoryPoint> points;  // initial pose first
    double final_grad_norm = 0.0;
    bool converged = false;  // stopped because the gradient norm fell below tol
};

/// Gradient descent on (alpha, beta, gamma, t_x, t_y). Stops after steps
/// updates or once the gradient norm is below tol.
[[nodiscard]] PoseTrajectory fit_pose_trajectory(const PoseObjective& objective, const Pose& init, int steps,
                                                 double lr, double tol = 0.0);

struct LocalMinimum {
    std::size_t index = 0;  // profile index, or r * cols + c for surfaces
    double value = 0.0;
};

/// Strict-or-plateau local minima (value <= every neighbor) whose value is at
/// most (1 + rel_tol) times the global minimum. With periodic set, the axis
/// wraps and a duplicated endpoint (lo and hi one period apart) is skipped.
[[nodiscard]] std::vector<LocalMinimum> near_global_minima(const std::vector<double>& values, bool periodic,
                                                           double rel_tol);
[[nodiscard]] std::vector<LocalMinimum> near_global_minima(const PoseSurface& surface, double rel_tol);

/// Whether an axis spans exactly one full turn.
[[nodiscard]] bool spans_full_turn(const ScanAxis& axis) noexcept;

[[nodiscard]] std::string surface_csv(const PoseSurface& surface);
[[nodiscard]] std::string trajectory_csv(const PoseTrajectory& trajectory);
[[nodiscard]] std::string surface_svg(const PoseSurface& surface, const PoseTrajectory* trajectory);

} // namespace dproj
