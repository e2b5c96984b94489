#include "dproj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "dproj/svg.hpp"

namespace dproj {

namespace {

ShellCurve empty_curve(int side, double pixel_size) {
    ShellCurve c;
    c.side = side;
    c.pixel_size = pixel_size;
    const int shells = side / 2;
    c.shells.resize(static_cast<std::size_t>(shells));
    for (int k = 0; k < shells; ++k) {
        c.shells[k].shell = k;
        c.shells[k].frequency = k / (side * pixel_size);
    }
    return c;
}

} // namespace

double mse_per_voxel(const VoxelVolume& a, const VoxelVolume& b) {
    if (a.side() != b.side())
        throw ShapeMismatch("volumes differ in side");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

int shell_of(std::size_t flat, int side) noexcept {
    const auto d = static_cast<std::size_t>(side);
    const int c = center_index(side);
    const int x = static_cast<int>(flat % d) - c;
    const int y = static_cast<int>((flat / d) % d) - c;
    const int z = static_cast<int>(flat / (d * d)) - c;
    const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(x * x + y * y + z * z))));
    return k < side / 2 ? k : -1;
}

FscCurve fsc(const FourierVolume& a, const FourierVolume& b) {
    if (a.side() != b.side())
        throw ShapeMismatch("volumes differ in side");
    const int d = a.side();
    FscCurve curve = empty_curve(d, a.pixel_size());
    const auto shells = curve.shells.size();
    std::vector<double> num(shells, 0.0), pa(shells, 0.0), pb(shells, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int k = shell_of(i, d);
        if (k < 0)
            continue;
        num[k] += std::real(a[i] * std::conj(b[i]));
        pa[k] += std::norm(a[i]);
        pb[k] += std::norm(b[i]);
        ++curve.shells[k].n_entries;
    }
    for (std::size_t k = 0; k < shells; ++k) {
        const double den = std::sqrt(pa[k] * pb[k]);
        curve.shells[k].value = den > 0.0 ? num[k] / den : 0.0;
    }
    return curve;
}

Resolution resolution_at_threshold(const ShellCurve& curve, double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw ConfigError("threshold must lie in (0, 1)");
    Resolution r;
    const double extent = curve.side * curve.pixel_size;
    for (std::size_t k = 0; k < curve.shells.size(); ++k) {
        const double v1 = curve.shells[k].value;
        if (v1 >= tau)
            continue;
        r.reached = true;
        if (k == 0) {
            r.shell = 0.0;
            r.angstrom = std::numeric_limits<double>::infinity();
            return r;
        }
        const double v0 = curve.shells[k - 1].value;
        r.shell = static_cast<double>(k - 1) + (v0 - tau) / (v0 - v1);
        r.angstrom = extent / r.shell;
        return r;
    }
    r.shell = static_cast<double>(curve.side / 2);
    r.angstrom = 2.0 * curve.pixel_size;
    return r;
}

ShellCurve ss_snr(const VolumePosterior& post) {
    if (post.kind != PosteriorKind::DiagGaussian)
        throw KindError("spectral SNR needs a Gaussian posterior");
    const int d = post.side();
    ShellCurve curve = empty_curve(d, post.mu.pixel_size());
    std::vector<double> power(curve.shells.size(), 0.0), var(curve.shells.size(), 0.0);
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
        const int k = shell_of(i, d);
        if (k < 0)
            continue;
        power[k] += std::norm(post.mu[i]);
        var[k] += 2.0 * std::exp(2.0 * post.log_sigma[i]);
        ++curve.shells[k].n_entries;
    }
    for (std::size_t k = 0; k < power.size(); ++k)
        curve.shells[k].value = var[k] > 0.0 ? power[k] / var[k] : 0.0;
    return curve;
}

ShellCurve fsc_from_sssnr(const ShellCurve& alpha) {
    ShellCurve out = alpha;
    for (auto& s : out.shells) {
        if (s.value < 0.0)
            throw ConfigError("spectral SNR must be non-negative");
        s.value = s.value / (1.0 + s.value);
    }
    return out;
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.meta = dataset.meta;
    out.observations.reserve(indices.size());
    for (std::size_t i : indices)
        out.observations.push_back(dataset.observations.at(i));
    return out;
}

HalfsetResult halfset_fsc(const Dataset& dataset, const TrainerConfig& config, std::uint64_t split_seed) {
    if (dataset.observations.size() < 2)
        throw EmptyDataset("half-set FSC needs at least two observations");
    std::vector<std::size_t> order(dataset.observations.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_stream(split_seed, {0x68616c66});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i % 2 == 0 ? a : b).push_back(order[i]);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    HalfsetResult out;
    out.half_a = fit_structure(subset(dataset, a), config);
    out.half_b = fit_structure(subset(dataset, b), config);
    out.curve = fsc(out.half_a.posterior.mu, out.half_b.posterior.mu);
    return out;
}

std::string curve_csv(const ShellCurve& curve) {
    std::string out = "shell,frequency_inv_angstrom,value,n_entries\n";
    for (const auto& s : curve.shells)
        out += fmt::format("{},{:.17g},{:.17g},{}\n", s.shell, s.frequency, s.value, s.n_entries);
    return out;
}

std::string curves_svg(const std::vector<NamedCurve>& curves, const std::string& title, bool threshold_rules) {
    svg::LinePlot plot;
    plot.title = title;
    plot.x_label = "spatial frequency (1/A)";
    plot.y_label = "correlation";
    if (threshold_rules)
        plot.rules = {0.5, 0.143};
    for (const auto& nc : curves) {
        svg::Series s{nc.label, {}};
        for (const auto& r : nc.curve->shells)
            s.points.emplace_back(r.frequency, r.value);
        plot.series.push_back(std::move(s));
    }
    return svg::line_plot(plot);
}

} // namespace dproj
