#pragma once

// Reconstruction quality: voxel MSE, Fourier shell correlation, threshold
// resolution, and the spectral SNR of a Gaussian posterior.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dproj/grid.hpp"
#include "dproj/prob_model.hpp"
#include "dproj/simulator.hpp"
#include "dproj/trainer.hpp"

namespace dproj {

[[nodiscard]] double mse_per_voxel(const VoxelVolume& a, const VoxelVolume& b);

/// Shell of a centered 3D index: |k| rounded to the nearest integer, or -1
/// beyond the last shell D/2 - 1.
[[nodiscard]] int shell_of(std::size_t flat, int side) noexcept;

struct ShellRecord {
    int shell = 0;
    double frequency = 0.0;  // 1/Angstrom
    double value = 0.0;
    std::size_t n_entries = 0;
};

/// Per-shell curve, shells 0 .. D/2 - 1.
struct ShellCurve {
    int side = 0;
    double pixel_size = 1.0;
    std::vector<ShellRecord> shells;
};
using FscCurve = ShellCurve;

/// Re(sum A conj(B)) / sqrt(sum |A|^2 sum |B|^2) per shell; 0 where a shell
/// has no power.
[[nodiscard]] FscCurve fsc(const FourierVolume& a, const FourierVolume& b);

struct Resolution {
    bool reached = false;
    double shell = 0.0;      // interpolated crossing (last shell when not reached)
    double angstrom = 0.0;   // D * pixel / shell, or the Nyquist bound 2 * pixel
};

/// First shell whose value drops below tau, linearly interpolated with the
/// previous shell.
[[nodiscard]] Resolution resolution_at_threshold(const ShellCurve& curve, double tau);

/// alpha(f) = sum |mu|^2 / sum 2 sigma^2 over each shell (both parts of an
/// entry carry variance sigma^2). KindError for a Dirac posterior.
[[nodiscard]] ShellCurve ss_snr(const VolumePosterior& post);

/// alpha / (1 + alpha) per shell.
[[nodiscard]] ShellCurve fsc_from_sssnr(const ShellCurve& alpha);

struct HalfsetResult {
    FscCurve curve;
    FitReport half_a;
    FitReport half_b;
};

/// Seeded random split into two halves, independent fits, FSC of the two
/// posterior means.
[[nodiscard]] HalfsetResult halfset_fsc(const Dataset& dataset, const TrainerConfig& config,
                                        std::uint64_t split_seed);

/// Dataset restricted to the listed observations (ids are kept).
[[nodiscard]] Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices);

// ---------------------------------------------------------------------------
// Output

/// shell,frequency_inv_angstrom,value,n_entries
[[nodiscard]] std::string curve_csv(const ShellCurve& curve);

struct NamedCurve {
    std::string label;
    const ShellCurve* curve;
};

/// Line plot of value against frequency with threshold rules at 0.5 and 0.143.
[[nodiscard]] std::string curves_svg(const std::vector<NamedCurve>& curves, const std::string& title,
                                     bool threshold_rules = true);

} // namespace dproj
