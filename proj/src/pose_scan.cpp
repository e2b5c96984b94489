#include "dproj/pose_scan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include <fmt/format.h>

#include "dproj/svg.hpp"

namespace dproj {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double& angle_ref(Pose& p, EulerAngle a) {
    switch (a) {
    case EulerAngle::Alpha: return p.alpha;
    case EulerAngle::Beta: return p.beta;
    case EulerAngle::Gamma: return p.gamma;
    }
    return p.alpha;
}

double angle_of(const Pose& p, EulerAngle a) {
    Pose copy = p;
    return angle_ref(copy, a);
}

bool duplicated_endpoint(const ScanAxis& axis) noexcept {
    return spans_full_turn(axis) && axis.points > 2;
}

void check_axis(const ScanAxis& axis) {
    if (axis.points < 2)
        throw ConfigError("scan resolution must be >= 2 per axis");
    if (!(axis.hi > axis.lo))
        throw ConfigError("scan range must be increasing");
}

} // namespace

const char* to_string(EulerAngle angle) noexcept {
    switch (angle) {
    case EulerAngle::Alpha: return "alpha";
    case EulerAngle::Beta: return "beta";
    case EulerAngle::Gamma: return "gamma";
    }
    return "?";
}

EulerAngle parse_euler_angle(const std::string& name) {
    if (name == "alpha")
        return EulerAngle::Alpha;
    if (name == "beta")
        return EulerAngle::Beta;
    if (name == "gamma")
        return EulerAngle::Gamma;
    throw ConfigError("unknown Euler angle: " + name);
}

double ScanAxis::at(int i) const noexcept {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
}

bool spans_full_turn(const ScanAxis& axis) noexcept {
    return std::abs(axis.hi - axis.lo - kTwoPi) < 1e-12;
}

PoseObjective::PoseObjective(const SliceProjector& proj, const FourierSlice& obs, double noise_sigma,
                             std::optional<int> shell_limit)
    : projector(&proj), observation(&obs), sigma(noise_sigma),
      max_shell(shell_limit ? shell_limit : std::optional<int>(proj.side() / 2 - 1)) {
    if (obs.side() != proj.side())
        throw ShapeMismatch("observation side differs from the volume side");
    if (!(noise_sigma > 0.0))
        throw ConfigError("noise sigma must be positive");
}

double PoseObjective::loss(const Pose& pose) const {
    const SliceProjection pred = projector->project(pose, max_shell);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < pred.valid.size(); ++i)
        if (pred.valid[i]) {
            sum += std::norm((*observation)[i] - pred.slice[i]);
            ++n;
        }
    return n ? sum / (2.0 * sigma * sigma * static_cast<double>(n)) : 0.0;
}

std::pair<double, PoseGradient> PoseObjective::loss_and_grad(const Pose& pose) const {
    const SliceProjection pred = projector->project(pose, max_shell);
    const std::size_t n = pred.valid_count();
    if (n == 0)
        return {0.0, PoseGradient{}};
    const double scale = 1.0 / (sigma * sigma * static_cast<double>(n));
    FourierSlice upstream(observation->side());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.valid.size(); ++i)
        if (pred.valid[i]) {
            const cplx r = (*observation)[i] - pred.slice[i];
            sum += std::norm(r);
            upstream[i] = -r * scale;
        }
    PoseGradient g = projector->accumulate_vjp(pose, upstream, max_shell, {}, true);
    return {0.5 * sum * scale, g};
}

ScanSpec default_scan(const Pose& base) {
    ScanSpec s;
    s.cols = {EulerAngle::Alpha, 0.0, kTwoPi, 90};
    s.rows = {EulerAngle::Beta, 0.0, std::numbers::pi, 45};
    s.fixed = base;
    return s;
}

Pose PoseSurface::pose_at(int r, int c) const {
    Pose p = spec.fixed;
    angle_ref(p, spec.cols.angle) = spec.cols.at(c);
    angle_ref(p, spec.rows.angle) = spec.rows.at(r);
    return p;
}

PoseSurface pose_error_surface(const PoseObjective& objective, const ScanSpec& spec) {
    check_axis(spec.cols);
    check_axis(spec.rows);
    if (spec.cols.angle == spec.rows.angle)
        throw ConfigError("scan axes must be two different angles");
    PoseSurface s;
    s.spec = spec;
    s.values.resize(static_cast<std::size_t>(spec.rows.points) * spec.cols.points);
    for (int r = 0; r < spec.rows.points; ++r)
        for (int c = 0; c < spec.cols.points; ++c)
            s.values[static_cast<std::size_t>(r) * spec.cols.points + c] = objective.loss(s.pose_at(r, c));
    const auto it = std::min_element(s.values.begin(), s.values.end());
    const auto idx = static_cast<int>(it - s.values.begin());
    s.argmin_row = idx / spec.cols.points;
    s.argmin_col = idx % spec.cols.points;
    return s;
}

PoseProfile pose_error_profile(const PoseObjective& objective, const ScanAxis& axis, const Pose& base) {
    check_axis(axis);
    PoseProfile p;
    p.axis = axis;
    p.values.resize(static_cast<std::size_t>(axis.points));
    for (int i = 0; i < axis.points; ++i) {
        Pose q = base;
        angle_ref(q, axis.angle) = axis.at(i);
        p.values[i] = objective.loss(q);
    }
    p.argmin = static_cast<std::size_t>(std::min_element(p.values.begin(), p.values.end()) - p.values.begin());
    return p;
}

PoseTrajectory fit_pose_trajectory(const PoseObjective& objective, const Pose& init, int steps, double lr,
                                   double tol) {
    if (steps < 1)
        throw ConfigError("trajectory needs at least one step");
    if (!(lr >= 0.0))
        throw ConfigError("learning rate must be non-negative");
    PoseTrajectory t;
    Pose p = init;
    auto [loss, g] = objective.loss_and_grad(p);
    t.points.push_back({p, loss});
    for (int s = 0; s < steps; ++s) {
        if (g.norm5() < tol) {
            t.converged = true;
            break;
        }
        p.alpha -= lr * g.alpha;
        p.beta -= lr * g.beta;
        p.gamma -= lr * g.gamma;
        p.shift.x() -= lr * g.shift.x();
        p.shift.y() -= lr * g.shift.y();
        std::tie(loss, g) = objective.loss_and_grad(p);
        t.points.push_back({p, loss});
    }
    t.final_grad_norm = g.norm5();
    if (t.final_grad_norm < tol)
        t.converged = true;
    return t;
}

std::vector<LocalMinimum> near_global_minima(const std::vector<double>& values, bool periodic, double rel_tol) {
    std::size_t n = values.size();
    if (periodic && n > 2)
        --n;  // last sample repeats the first
    std::vector<LocalMinimum> out;
    if (n == 0)
        return out;
    const double gmin = *std::min_element(values.begin(), values.begin() + static_cast<long>(n));
    const double limit = gmin + rel_tol * std::abs(gmin);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = values[i];
        bool is_min = true;
        for (int step : {-1, 1}) {
            long j = static_cast<long>(i) + step;
            if (periodic)
                j = (j + static_cast<long>(n)) % static_cast<long>(n);
            else if (j < 0 || j >= static_cast<long>(n))
                continue;
            if (values[static_cast<std::size_t>(j)] < v)
                is_min = false;
        }
        if (is_min && v <= limit)
            out.push_back({i, v});
    }
    return out;
}

std::vector<LocalMinimum> near_global_minima(const PoseSurface& surface, double rel_tol) {
    const bool wrap_c = duplicated_endpoint(surface.spec.cols);
    const bool wrap_r = duplicated_endpoint(surface.spec.rows);
    const int cols = surface.spec.cols.points - (wrap_c ? 1 : 0);
    const int rows = surface.spec.rows.points - (wrap_r ? 1 : 0);
    double gmin = surface.at(0, 0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            gmin = std::min(gmin, surface.at(r, c));
    const double limit = gmin + rel_tol * std::abs(gmin);
    std::vector<LocalMinimum> out;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double v = surface.at(r, c);
            if (v > limit)
                continue;
            bool is_min = true;
            for (int dr = -1; dr <= 1 && is_min; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0)
                        continue;
                    int rr = r + dr, cc = c + dc;
                    if (wrap_r)
                        rr = (rr + rows) % rows;
                    if (wrap_c)
                        cc = (cc + cols) % cols;
                    if (rr < 0 || rr >= rows || cc < 0 || cc >= cols)
                        continue;
                    if (surface.at(rr, cc) < v) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min)
                out.push_back({static_cast<std::size_t>(r) * surface.spec.cols.points + c, v});
        }
    return out;
}

std::string surface_csv(const PoseSurface& surface) {
    const ScanSpec& s = surface.spec;
    std::string out = fmt::format("{}\\{}", to_string(s.rows.angle), to_string(s.cols.angle));
    for (int c = 0; c < s.cols.points; ++c)
        out += fmt::format(",{:.17g}", s.cols.at(c));
    out += '\n';
    for (int r = 0; r < s.rows.points; ++r) {
        out += fmt::format("{:.17g}", s.rows.at(r));
        for (int c = 0; c < s.cols.points; ++c)
            out += fmt::format(",{:.17g}", surface.at(r, c));
        out += '\n';
    }
    return out;
}

std::string trajectory_csv(const PoseTrajectory& trajectory) {
    std::string out = "step,alpha,beta,gamma,tx,ty,loss\n";
    for (std::size_t i = 0; i < trajectory.points.size(); ++i) {
        const auto& [p, loss] = trajectory.points[i];
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", i, p.alpha, p.beta, p.gamma,
                           p.shift.x(), p.shift.y(), loss);
    }
    return out;
}

std::string surface_svg(const PoseSurface& surface, const PoseTrajectory* trajectory) {
    const ScanSpec& s = surface.spec;
    svg::Heatmap map;
    map.title = fmt::format("pose error surface over {} x {}", to_string(s.cols.angle), to_string(s.rows.angle));
    map.rows = s.rows.points;
    map.cols = s.cols.points;
    map.values = surface.values;
    map.x_label = fmt::format("{} [{:.3g}, {:.3g}] rad", to_string(s.cols.angle), s.cols.lo, s.cols.hi);
    map.y_label = fmt::format("{} [{:.3g}, {:.3g}] rad", to_string(s.rows.angle), s.rows.lo, s.rows.hi);
    map.star = std::make_pair(static_cast<double>(surface.argmin_col), static_cast<double>(surface.argmin_row));
    if (trajectory)
        for (const auto& pt : trajectory->points) {
            const double c = (angle_of(pt.pose, s.cols.angle) - s.cols.lo) / (s.cols.hi - s.cols.lo) * (s.cols.points - 1);
            const double r = (angle_of(pt.pose, s.rows.angle) - s.rows.lo) / (s.rows.hi - s.rows.lo) * (s.rows.points - 1);
            map.path.emplace_back(c, r);
        }
    return svg::heatmap(map);
}

} // namespace dproj
