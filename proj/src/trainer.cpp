#include "dproj/trainer.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "dproj/volume_io.hpp"

namespace dproj {

namespace {

using json = nlohmann::json;

std::span<double> as_reals(std::span<cplx> z) {
    return {reinterpret_cast<double*>(z.data()), 2 * z.size()};
}
std::span<const double> as_reals(std::span<const cplx> z) {
    return {reinterpret_cast<const double*>(z.data()), 2 * z.size()};
}

/// Mean over [from, to) of per-observation losses.
double window_mean(const std::vector<double>& per_obs, std::size_t from, std::size_t to) {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i)
        s += per_obs[i];
    return s / static_cast<double>(to - from);
}

bool windows_converged(const std::vector<double>& per_obs, const TrainerConfig& config) {
    const auto w = static_cast<std::size_t>(config.convergence_window);
    const std::size_t n = per_obs.size();
    if (n < 2 * w)
        return false;
    const double now = window_mean(per_obs, n - w, n);
    const double before = window_mean(per_obs, n - 2 * w, n - w);
    const double scale = std::max(std::abs(before), 1e-300);
    return std::abs(now - before) / scale < config.convergence_tol;
}

void pose_step(Pose& pose, const PoseGradient& g, OptimizerState& state, const TrainerConfig& config) {
    std::array<double, 5> p{pose.alpha, pose.beta, pose.gamma, pose.shift.x(), pose.shift.y()};
    const std::array<double, 5> grad{g.alpha, g.beta, g.gamma, g.shift.x(), g.shift.y()};
    state.step(p, grad, config, config.pose_learning_rate);
    pose.alpha = p[0];
    pose.beta = p[1];
    pose.gamma = p[2];
    pose.shift.x() = p[3];
    pose.shift.y() = p[4];
}

FitReport run(const Dataset& dataset, const TrainerConfig& config, std::optional<PosePosterior> poses) {
    config.validate();
    if (dataset.observations.empty())
        throw EmptyDataset("dataset has no observations");
    const auto start = std::chrono::steady_clock::now();
    const std::vector<FourierObservation> data = to_fourier(dataset);
    const std::size_t n_total = data.size();
    const int side = dataset.meta.side;

    FitReport report;
    report.posterior = VolumePosterior::prior_like(config.posterior, side, dataset.meta.pixel_size);
    report.noise = NoiseModel::from_sigma(model_noise_sigma(dataset, config), config.learn_sigma);
    report.poses = std::move(poses);

    PosteriorOptimizer opt{OptimizerState(2 * report.posterior.mu.size()),
                           OptimizerState(report.posterior.log_sigma.size()), OptimizerState(1)};
    std::vector<OptimizerState> pose_opt;
    if (report.poses)
        pose_opt.assign(n_total, OptimizerState(5));

    std::vector<std::size_t> order(n_total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto batch_size = static_cast<std::size_t>(config.batch_size);
    std::vector<double> per_obs_loss;

    ElboOptions eo;
    eo.samples = config.elbo_samples;
    eo.max_shell = config.max_shell;
    eo.oversampling = config.oversampling;
    eo.seed = config.seed;

    for (int epoch = 0; epoch < config.max_epochs && !report.converged; ++epoch) {
        Rng shuffle_rng = make_stream(config.seed, {static_cast<std::uint64_t>(epoch), 0x73687566});
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t b0 = 0; b0 < n_total; b0 += batch_size) {
            const std::span<const std::size_t> batch(order.data() + b0, std::min(batch_size, n_total - b0));
            eo.step = static_cast<std::uint64_t>(report.steps);
            const ElboResult res =
                report.poses ? elbo_joint_minibatch(report.posterior, *report.poses, report.noise, data,
                                                    batch, n_total, eo)
                             : elbo_minibatch(report.posterior, report.noise, data, batch, n_total, eo);
            optimizer_step(report.posterior, report.noise, res.grad, opt, config);
            if (report.poses)
                for (std::size_t b = 0; b < batch.size(); ++b)
                    pose_step(report.poses->means[batch[b]], res.grad.poses[b], pose_opt[batch[b]], config);
            report.loss_trace.push_back(res.loss);
            per_obs_loss.push_back(res.loss / static_cast<double>(batch.size()));
            ++report.steps;
            if (windows_converged(per_obs_loss, config)) {
                report.converged = true;
                break;
            }
        }
        report.epochs_run = epoch + 1;
        if (config.keep_snapshots)
            report.snapshots.push_back(report.posterior.mu);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace

void TrainerConfig::validate() const {
    if (batch_size < 1)
        throw ConfigError("batch_size must be >= 1");
    if (max_epochs < 0)
        throw ConfigError("max_epochs must be >= 0");
    if (!(learning_rate > 0.0))
        throw ConfigError("learning_rate must be positive");
    if (!(pose_learning_rate >= 0.0))
        throw ConfigError("pose_learning_rate must be non-negative");
    if (elbo_samples < 1)
        throw ConfigError("elbo_samples must be >= 1");
    if (convergence_window < 1)
        throw ConfigError("convergence_window must be >= 1");
    if (oversampling < 1)
        throw ConfigError("oversampling must be >= 1");
    if (!(noise_free_fraction > 0.0))
        throw ConfigError("noise_free_fraction must be positive");
    if (noise_sigma && !(*noise_sigma > 0.0))
        throw ConfigError("noise_sigma must be positive");
}

void OptimizerState::step(std::span<double> params, std::span<const double> grads,
                          const TrainerConfig& config, double learning_rate) {
    if (params.size() != grads.size())
        throw ShapeMismatch("parameter and gradient sizes differ");
    ++t_;
    if (config.optimizer == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] -= learning_rate * grads[i];
        return;
    }
    if (m_.size() != params.size()) {
        m_.assign(params.size(), 0.0);
        v_.assign(params.size(), 0.0);
    }
    const double b1 = config.beta1;
    const double b2 = config.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
        v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
        params[i] -= learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config.adam_eps);
    }
}

void optimizer_step(VolumePosterior& post, NoiseModel& noise, const ElboGradients& grads,
                    PosteriorOptimizer& state, const TrainerConfig& config) {
    const int d = post.side();
    std::vector<cplx> g_mu = grads.mu;
    enforce_hermitian(g_mu, d, 3);
    state.mu.step(as_reals(post.mu.values()), as_reals(std::span<const cplx>(g_mu)), config,
                  config.learning_rate);
    enforce_hermitian(post.mu.values(), d, 3);
    post.mu.set_hermitian(true);

    if (post.kind == PosteriorKind::DiagGaussian) {
        std::vector<double> g_ls = grads.log_sigma;
        symmetrize_mirror(g_ls, d, 3);
        state.log_sigma.step(post.log_sigma, g_ls, config, config.learning_rate);
        symmetrize_mirror(post.log_sigma, d, 3);
    }
    if (noise.learnable) {
        std::array<double, 1> p{noise.log_sigma};
        const std::array<double, 1> g{grads.log_sigma_eps};
        state.log_sigma_eps.step(p, g, config, config.learning_rate);
        noise.log_sigma = p[0];
    }
}

std::vector<FourierObservation> to_fourier(const Dataset& dataset) {
    std::vector<FourierObservation> out;
    out.reserve(dataset.observations.size());
    for (const auto& obs : dataset.observations) {
        if (obs.image.side() != dataset.meta.side)
            throw ShapeMismatch("observation side differs from the dataset side");
        out.push_back({obs.id, dft2_centered(obs.image), obs.pose});
    }
    return out;
}

double model_noise_sigma(const Dataset& dataset, const TrainerConfig& config) {
    if (config.noise_sigma)
        return *config.noise_sigma;
    if (dataset.meta.sigma_eps > 0.0)
        return dataset.meta.sigma_eps;
    double var = dataset.meta.signal_variance;
    if (!(var > 0.0)) {
        std::vector<ProjectionImage> images;
        for (const auto& o : dataset.observations)
            images.push_back(o.image);
        var = pooled_variance(images);
    }
    if (!(var > 0.0))
        throw DegenerateSignal("cannot derive a noise level from constant images");
    return config.noise_free_fraction * std::sqrt(var);
}

FitReport fit_structure(const Dataset& dataset, const TrainerConfig& config) {
    if (dataset.observations.empty())
        throw EmptyDataset("dataset has no observations");
    if (!dataset.has_all_poses())
        throw DataContractError("fit_structure needs a pose for every observation");
    return run(dataset, config, std::nullopt);
}

PosePosterior initial_poses(const Dataset& dataset, const JointOptions& joint, std::uint64_t seed) {
    PosePosterior out;
    out.means.reserve(dataset.observations.size());
    constexpr double deg = std::numbers::pi / 180.0;
    for (std::size_t n = 0; n < dataset.observations.size(); ++n) {
        const auto& truth = dataset.observations[n].pose;
        if (joint.init != PoseInit::Random && !truth)
            throw DataContractError("pose initialization needs ground-truth poses");
        Rng rng = make_stream(seed, {n, 0x706f7365});
        switch (joint.init) {
        case PoseInit::GroundTruth:
            out.means.push_back(*truth);
            break;
        case PoseInit::Perturbed: {
            std::normal_distribution<double> jitter(0.0, joint.perturb_deg * deg);
            Pose p = *truth;
            p.alpha += jitter(rng);
            p.beta += jitter(rng);
            p.gamma += jitter(rng);
            out.means.push_back(p);
            break;
        }
        case PoseInit::Random: {
            PoseSampling uniform;
            uniform.translation_range = 0.0;
            out.means.push_back(sample_pose(rng, uniform));
            break;
        }
        }
    }
    return out;
}

FitReport fit_joint(const Dataset& dataset, const TrainerConfig& config, const JointOptions& joint) {
    if (dataset.observations.empty())
        throw EmptyDataset("dataset has no observations");
    return run(dataset, config, initial_poses(dataset, joint, config.seed));
}

// ---------------------------------------------------------------------------
// Checkpoints

void write_checkpoint(const std::filesystem::path& dir, const FitReport& report,
                      const TrainerConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create checkpoint directory " + dir.string());
    const VolumePosterior& post = report.posterior;
    write_fvl(dir / "mu.fvl", post.mu);
    if (post.kind == PosteriorKind::DiagGaussian) {
        FourierVolume sigma(post.side(), post.mu.pixel_size(), true);
        const auto s = post.sigma();
        for (std::size_t i = 0; i < s.size(); ++i)
            sigma[i] = s[i];
        write_fvl(dir / "sigma.fvl", sigma);
    }
    write_fvl(dir / "mean.fvl", idft3_centered(post.mu));

    std::string trace = "step,loss\n";
    for (std::size_t i = 0; i < report.loss_trace.size(); ++i)
        trace += fmt::format("{},{:.17g}\n", i, report.loss_trace[i]);
    write_file_bytes(dir / "loss_trace.csv",
                     std::span(reinterpret_cast<const std::uint8_t*>(trace.data()), trace.size()));

    json m;
    m["format"] = "dproj-checkpoint-1";
    m["posterior"] = to_string(post.kind);
    m["side"] = post.side();
    m["pixel_size"] = post.mu.pixel_size();
    m["steps"] = report.steps;
    m["epochs"] = report.epochs_run;
    m["converged"] = report.converged;
    m["noise_sigma"] = report.noise.sigma();
    m["noise_learnable"] = report.noise.learnable;
    m["config"] = {{"batch_size", config.batch_size},
                   {"max_epochs", config.max_epochs},
                   {"learning_rate", config.learning_rate},
                   {"optimizer", config.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
                   {"beta1", config.beta1},
                   {"beta2", config.beta2},
                   {"adam_eps", config.adam_eps},
                   {"elbo_samples", config.elbo_samples},
                   {"max_shell", config.max_shell ? json(*config.max_shell) : json(nullptr)},
                   {"convergence_window", config.convergence_window},
                   {"convergence_tol", config.convergence_tol},
                   {"seed", config.seed},
                   {"oversampling", config.oversampling},
                   {"learn_sigma", config.learn_sigma},
                   {"pose_learning_rate", config.pose_learning_rate},
                   {"noise_free_fraction", config.noise_free_fraction},
                   {"noise_sigma", config.noise_sigma ? json(*config.noise_sigma) : json(nullptr)}};
    if (report.poses) {
        json poses = json::array();
        for (const Pose& p : report.poses->means)
            poses.push_back({p.alpha, p.beta, p.gamma, p.shift.x(), p.shift.y(), p.shift.z()});
        m["poses"] = std::move(poses);
    }
    const std::string text = m.dump(2) + "\n";
    write_file_bytes(dir / "manifest.json",
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Checkpoint read_checkpoint(const std::filesystem::path& dir) {
    const auto bytes = read_file_bytes(dir / "manifest.json");
    json m;
    try {
        m = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed checkpoint manifest: ") + e.what());
    }
    Checkpoint cp;
    try {
        const std::string kind = m.at("posterior").get<std::string>();
        if (kind != "dirac" && kind != "gaussian")
            throw IoError("unknown posterior kind in checkpoint: " + kind);
        cp.posterior.kind = kind == "dirac" ? PosteriorKind::Dirac : PosteriorKind::DiagGaussian;
        cp.noise = NoiseModel::from_sigma(m.at("noise_sigma").get<double>(),
                                          m.value("noise_learnable", false));
        cp.steps = m.value("steps", 0L);
        cp.epochs = m.value("epochs", 0);
        const json& c = m.at("config");
        TrainerConfig& tc = cp.config;
        tc.posterior = cp.posterior.kind;
        tc.batch_size = c.at("batch_size").get<int>();
        tc.max_epochs = c.at("max_epochs").get<int>();
        tc.learning_rate = c.at("learning_rate").get<double>();
        tc.optimizer = c.at("optimizer").get<std::string>() == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
        tc.beta1 = c.at("beta1").get<double>();
        tc.beta2 = c.at("beta2").get<double>();
        tc.adam_eps = c.at("adam_eps").get<double>();
        tc.elbo_samples = c.at("elbo_samples").get<int>();
        if (!c.at("max_shell").is_null())
            tc.max_shell = c.at("max_shell").get<int>();
        tc.convergence_window = c.at("convergence_window").get<int>();
        tc.convergence_tol = c.at("convergence_tol").get<double>();
        tc.seed = c.at("seed").get<std::uint64_t>();
        tc.oversampling = c.at("oversampling").get<int>();
        tc.learn_sigma = c.at("learn_sigma").get<bool>();
        tc.pose_learning_rate = c.at("pose_learning_rate").get<double>();
        tc.noise_free_fraction = c.value("noise_free_fraction", tc.noise_free_fraction);
        if (c.contains("noise_sigma") && !c.at("noise_sigma").is_null())
            tc.noise_sigma = c.at("noise_sigma").get<double>();
    } catch (const json::exception& e) {
        throw IoError(std::string("incomplete checkpoint manifest: ") + e.what());
    }
    cp.posterior.mu = read_fourier_fvl(dir / "mu.fvl");
    if (!is_hermitian(cp.posterior.mu.values(), cp.posterior.side(), 3))
        throw HermitianViolation("checkpoint mean is not Hermitian");
    cp.posterior.mu.set_hermitian(true);
    if (cp.posterior.kind == PosteriorKind::DiagGaussian) {
        const FourierVolume sigma = read_fourier_fvl(dir / "sigma.fvl");
        if (sigma.side() != cp.posterior.side())
            throw ShapeMismatch("sigma and mu sides differ");
        cp.posterior.log_sigma.resize(sigma.size());
        for (std::size_t i = 0; i < sigma.size(); ++i) {
            if (!(sigma[i].real() > 0.0))
                throw IoError("non-positive posterior sigma in checkpoint");
            cp.posterior.log_sigma[i] = std::log(sigma[i].real());
        }
    }
    return cp;
}

} // namespace dproj
