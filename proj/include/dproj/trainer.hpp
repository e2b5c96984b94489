#pragma once

// Stochastic optimization of the negative ELBO. fit_structure learns the
// volume posterior from observations with known poses; fit_joint also moves
// one Dirac pose per observation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dproj/prob_model.hpp"
#include "dproj/simulator.hpp"

namespace dproj {

enum class OptimizerKind { Sgd, Adam };

struct TrainerConfig {
    PosteriorKind posterior = PosteriorKind::DiagGaussian;
    int batch_size = 64;
    int max_epochs = 100;
    double learning_rate = 1e-2;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int elbo_samples = 1;
    std::optional<int> max_shell;
    int convergence_window = 50;
    double convergence_tol = 1e-4;
    std::uint64_t seed = 0;
    /// Fourier-grid oversampling used by the projector (1 = none).
    int oversampling = 1;

    bool learn_sigma = false;
    /// Overrides the dataset's sigma_eps when set.
    std::optional<double> noise_sigma;
    /// Noise-free datasets record sigma_eps = 0; the model then uses this
    /// fraction of the clean-signal std. dev. as its noise level.
    double noise_free_fraction = 0.01;

    /// Step size for Dirac pose parameters (radians / voxels) in fit_joint.
    double pose_learning_rate = 1e-2;

    bool keep_snapshots = false;

    void validate() const;
};

/// Optimizer state for a flat block of real parameters.
class OptimizerState {
public:
    OptimizerState() = default;
    explicit OptimizerState(std::size_t size) : m_(size, 0.0), v_(size, 0.0) {}

    /// SGD: p -= lr * g. Adam: bias-corrected first/second moment update.
    void step(std::span<double> params, std::span<const double> grads, const TrainerConfig& config,
              double learning_rate);

    [[nodiscard]] long steps() const noexcept { return t_; }

private:
    std::vector<double> m_;
    std::vector<double> v_;
    long t_ = 0;
};

/// Optimizer state for one volume posterior.
struct PosteriorOptimizer {
    OptimizerState mu;
    OptimizerState log_sigma;
    OptimizerState log_sigma_eps;
};

/// Projects the gradients onto the constrained subspace (Hermitian for mu,
/// mirror-symmetric for log sigma), steps, then re-applies the constraints
/// to the parameters so rounding can never accumulate.
void optimizer_step(VolumePosterior& post, NoiseModel& noise, const ElboGradients& grads,
                    PosteriorOptimizer& state, const TrainerConfig& config);

enum class PoseInit { Random, Perturbed, GroundTruth };

struct JointOptions {
    PoseInit init = PoseInit::GroundTruth;
    double perturb_deg = 2.0;  // std. dev. per Euler angle for Perturbed
};

struct FitReport {
    VolumePosterior posterior;
    NoiseModel noise;
    std::optional<PosePosterior> poses;  // fit_joint only
    std::vector<double> loss_trace;      // one entry per optimizer step
    double wall_seconds = 0.0;
    int epochs_run = 0;
    long steps = 0;
    bool converged = false;
    std::vector<FourierVolume> snapshots;  // posterior mean after each epoch, if requested
};

/// Unitary 2D transforms of the images, in dataset order.
[[nodiscard]] std::vector<FourierObservation> to_fourier(const Dataset& dataset);

/// Noise level the model assumes for this dataset under config.
[[nodiscard]] double model_noise_sigma(const Dataset& dataset, const TrainerConfig& config);

[[nodiscard]] FitReport fit_structure(const Dataset& dataset, const TrainerConfig& config);

[[nodiscard]] FitReport fit_joint(const Dataset& dataset, const TrainerConfig& config,
                                  const JointOptions& joint = {});

/// Initial Dirac poses for fit_joint.
[[nodiscard]] PosePosterior initial_poses(const Dataset& dataset, const JointOptions& joint,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Checkpoints: mu.fvl, sigma.fvl (Gaussian only), mean.fvl (spatial posterior
// mean), loss_trace.csv and manifest.json.

void write_checkpoint(const std::filesystem::path& dir, const FitReport& report,
                      const TrainerConfig& config);

struct Checkpoint {
    VolumePosterior posterior;
    NoiseModel noise;
    TrainerConfig config;  // as recorded in the manifest
    long steps = 0;
    int epochs = 0;
};

[[nodiscard]] Checkpoint read_checkpoint(const std::filesystem::path& dir);

} // namespace dproj
