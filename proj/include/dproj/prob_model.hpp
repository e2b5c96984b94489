#pragma once

// Probabilistic model: Gaussian observation noise, a variational posterior
// over the Fourier volume, Dirac pose posteriors, and the minibatch objective
// (negative ELBO) with gradients for every learnable parameter.
//
// Complex gradients follow dL/dRe + i dL/dIm. Gradients are unconstrained:
// each grid entry is its own parameter. The trainer projects them back onto
// the Hermitian / mirror-symmetric subspace before stepping.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dproj/geometry.hpp"
#include "dproj/grid.hpp"
#include "dproj/rng.hpp"

namespace dproj {

/// Isotropic pixel noise, stored as log sigma_eps.
struct NoiseModel {
    double log_sigma = 0.0;
    bool learnable = false;

    [[nodiscard]] static NoiseModel from_sigma(double sigma, bool learnable = false);
    [[nodiscard]] double sigma() const noexcept;
};

enum class PosteriorKind { Dirac, DiagGaussian };

[[nodiscard]] const char* to_string(PosteriorKind kind) noexcept;

/// q(v) over the Fourier volume. log_sigma is one value per entry, shared by
/// the real and imaginary parts and tied across conjugate pairs. It is empty
/// for the Dirac kind.
struct VolumePosterior {
    PosteriorKind kind = PosteriorKind::Dirac;
    FourierVolume mu;
    std::vector<double> log_sigma;

    /// mu = 0 and log_sigma = 0, i.e. the prior mean (and the prior itself
    /// for the Gaussian kind).
    [[nodiscard]] static VolumePosterior prior_like(PosteriorKind kind, int side, double pixel_size = 1.0);

    [[nodiscard]] int side() const noexcept { return mu.side(); }
    /// Posterior std. dev. as a real field (all zeros for Dirac).
    [[nodiscard]] std::vector<double> sigma() const;
};

/// Dirac pose posteriors, one mean per observation.
struct PosePosterior {
    std::vector<Pose> means;
};

// ---------------------------------------------------------------------------
// Likelihoods

[[nodiscard]] double loglik_spatial(const ProjectionImage& x, const ProjectionImage& predicted,
                                    const NoiseModel& noise);

/// Every unmasked entry contributes -|r|^2 / (2 s^2) - log(2 pi s^2) / 2.
/// Under a unitary transform a conjugate pair carries two real dofs of
/// variance s^2 / 2 each; with the change of variables back to pixel
/// coordinates this is exactly the spatial likelihood when nothing is masked.
/// An empty mask means every entry is valid.
[[nodiscard]] double loglik_fourier(const FourierSlice& observed, const FourierSlice& predicted,
                                    std::span<const std::uint8_t> mask, const NoiseModel& noise);

// ---------------------------------------------------------------------------
// KL against the standard-normal prior

struct KlValue {
    double value = 0.0;
    /// Set for a Dirac posterior: the true KL is infinite and 0 is returned,
    /// which turns the objective into maximum likelihood.
    bool map_mode = false;
};

[[nodiscard]] KlValue kl_volume(const VolumePosterior& post);

/// Per-entry KL share and its gradients. A conjugate pair contributes
/// sigma^2 + |mu|^2 / 2 - 1 - log sigma^2, split evenly between its two
/// entries; a self-conjugate entry contributes its real dof only.
struct KlGradient {
    std::vector<cplx> mu;
    std::vector<double> log_sigma;
};
[[nodiscard]] KlGradient kl_volume_grad(const VolumePosterior& post);

// ---------------------------------------------------------------------------
// Sampling

/// Standard-normal noise on the canonical half of the grid, mirrored
/// conjugate-symmetrically; self-conjugate entries are real.
[[nodiscard]] std::vector<cplx> hermitian_normal(int side, Rng& rng);

/// mu + sigma * eps for a given eps (Dirac: mu).
[[nodiscard]] FourierVolume reparameterize(const VolumePosterior& post, std::span<const cplx> eps);

[[nodiscard]] FourierVolume sample_volume(const VolumePosterior& post, Rng& rng);

// ---------------------------------------------------------------------------
// Objectives

/// One observation in Fourier form: the centered unitary DFT of its image.
struct FourierObservation {
    int id = 0;
    FourierSlice data;
    std::optional<Pose> pose;
};

struct ElboOptions {
    /// Monte Carlo draws; an even count is drawn as antithetic pairs (eps, -eps).
    int samples = 1;
    std::optional<int> max_shell;
    int oversampling = 1;
    std::uint64_t seed = 0;
    /// Selects the noise stream; the trainer passes its step counter.
    std::uint64_t step = 0;
};

struct ElboGradients {
    std::vector<cplx> mu;
    std::vector<double> log_sigma;  // empty for Dirac
    double log_sigma_eps = 0.0;     // zero unless the noise model is learnable
    std::vector<PoseGradient> poses;  // joint objective only, aligned with the batch
};

struct ElboResult {
    double loss = 0.0;       // nll + kl_weight * kl
    double nll = 0.0;        // averaged over samples, summed over the batch
    double kl = 0.0;
    double kl_weight = 0.0;  // |batch| / N_total
    bool map_mode = false;
    std::size_t valid_entries = 0;  // per sample, summed over the batch
    ElboGradients grad;
};

/// Negative ELBO on a minibatch with known poses. batch holds indices into
/// data; n_total is the dataset size used to scale the KL term.
[[nodiscard]] ElboResult elbo_minibatch(const VolumePosterior& post, const NoiseModel& noise,
                                        std::span<const FourierObservation> data,
                                        std::span<const std::size_t> batch, std::size_t n_total,
                                        const ElboOptions& options = {});

/// As elbo_minibatch with poses taken from the Dirac pose posteriors
/// (indexed like data) and pose gradients returned for the batch. With a
/// uniform pose prior the pose KL is constant and omitted.
[[nodiscard]] ElboResult elbo_joint_minibatch(const VolumePosterior& post, const PosePosterior& poses,
                                              const NoiseModel& noise,
                                              std::span<const FourierObservation> data,
                                              std::span<const std::size_t> batch, std::size_t n_total,
                                              const ElboOptions& options = {});

} // namespace dproj
