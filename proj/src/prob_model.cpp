#include "dproj/prob_model.hpp"

#include <cmath>
#include <numbers>

#include "dproj/parallel.hpp"
#include "dproj/project_fourier.hpp"

namespace dproj {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)
constexpr std::size_t kChunk = 32;

void require_same_side(int a, int b, const char* what) {
    if (a != b)
        throw ShapeMismatch(what);
}

struct ChunkResult {
    std::vector<cplx> grid_grad;
    double nll = 0.0;
    double d_log_sigma_eps = 0.0;
    std::size_t valid = 0;
};

ElboResult evaluate(const VolumePosterior& post, const NoiseModel& noise,
                    std::span<const FourierObservation> data, std::span<const std::size_t> batch,
                    std::size_t n_total, const ElboOptions& options, const PosePosterior* pose_post) {
    if (options.samples < 1)
        throw ConfigError("elbo sample count must be >= 1");
    if (n_total == 0 || batch.size() > n_total)
        throw ConfigError("batch larger than the dataset");
    const int d = post.side();
    const bool gaussian = post.kind == PosteriorKind::DiagGaussian;
    const bool joint = pose_post != nullptr;
    for (std::size_t n : batch) {
        if (n >= data.size())
            throw ConfigError("batch index out of range");
        require_same_side(data[n].data.side(), d, "observation side differs from the posterior");
        if (!joint && !data[n].pose)
            throw DataContractError("observation without a pose in a known-pose objective");
        if (joint && n >= pose_post->means.size())
            throw ConfigError("pose posterior does not cover the batch");
    }
    auto pose_of = [&](std::size_t n) -> const Pose& {
        return joint ? pose_post->means[n] : *data[n].pose;
    };

    const double s_eps = noise.sigma();
    const double inv_var = 1.0 / (s_eps * s_eps);
    const double log_norm = 0.5 * (kLog2Pi + 2.0 * noise.log_sigma);
    const double inv_samples = 1.0 / options.samples;

    ElboResult out;
    out.grad.mu.assign(post.mu.size(), cplx{});
    if (gaussian)
        out.grad.log_sigma.assign(post.mu.size(), 0.0);
    if (joint)
        out.grad.poses.assign(batch.size(), PoseGradient{});

    const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
    const bool antithetic = options.samples % 2 == 0;
    std::vector<cplx> eps;
    for (int s = 0; s < options.samples; ++s) {
        if (gaussian) {
            if (antithetic && s % 2 == 1) {
                for (auto& e : eps)
                    e = -e;
            } else {
                Rng rng = make_stream(options.seed, {options.step, static_cast<std::uint64_t>(s)});
                eps = hermitian_normal(d, rng);
            }
        }
        const SliceProjector projector(reparameterize(post, eps), options.oversampling);

        std::vector<ChunkResult> parts(chunks);
        std::vector<PoseGradient> pose_grads(batch.size());
        parallel_chunks(chunks, [&](std::size_t c) {
            ChunkResult& part = parts[c];
            part.grid_grad.assign(projector.grid_size(), cplx{});
            const std::size_t end = std::min(batch.size(), (c + 1) * kChunk);
            FourierSlice upstream(d);
            for (std::size_t b = c * kChunk; b < end; ++b) {
                const std::size_t n = batch[b];
                const Pose& pose = pose_of(n);
                const SliceProjection pred = projector.project(pose, options.max_shell);
                const auto obs = data[n].data.values();
                for (std::size_t i = 0; i < upstream.size(); ++i) {
                    if (!pred.valid[i]) {
                        upstream[i] = cplx{};
                        continue;
                    }
                    const cplx r = obs[i] - pred.slice[i];
                    const double r2 = std::norm(r);
                    part.nll += 0.5 * r2 * inv_var + log_norm;
                    part.d_log_sigma_eps += 1.0 - r2 * inv_var;
                    upstream[i] = -r * inv_var;
                    ++part.valid;
                }
                pose_grads[b] = projector.accumulate_vjp(pose, upstream, options.max_shell,
                                                         part.grid_grad, joint);
            }
        });

        std::vector<cplx> grid_grad(projector.grid_size());
        for (const ChunkResult& part : parts) {
            for (std::size_t i = 0; i < grid_grad.size(); ++i)
                grid_grad[i] += part.grid_grad[i];
            out.nll += part.nll * inv_samples;
            out.valid_entries += part.valid;
            if (noise.learnable)
                out.grad.log_sigma_eps += part.d_log_sigma_eps * inv_samples;
        }
        const std::vector<cplx> vol_grad = projector.pull_back(grid_grad);
        for (std::size_t i = 0; i < vol_grad.size(); ++i)
            out.grad.mu[i] += vol_grad[i] * inv_samples;
        if (gaussian)
            for (std::size_t i = 0; i < vol_grad.size(); ++i)
                out.grad.log_sigma[i] +=
                    std::real(std::conj(vol_grad[i]) * std::exp(post.log_sigma[i]) * eps[i]) * inv_samples;
        if (joint)
            for (std::size_t b = 0; b < batch.size(); ++b) {
                PoseGradient g = pose_grads[b];
                g.alpha *= inv_samples;
                g.beta *= inv_samples;
                g.gamma *= inv_samples;
                g.shift *= inv_samples;
                out.grad.poses[b] += g;
            }
    }
    out.valid_entries /= static_cast<std::size_t>(options.samples);

    const KlValue kl = kl_volume(post);
    out.kl = kl.value;
    out.map_mode = kl.map_mode;
    out.kl_weight = static_cast<double>(batch.size()) / static_cast<double>(n_total);
    out.loss = out.nll + out.kl_weight * out.kl;
    if (gaussian) {
        const KlGradient kg = kl_volume_grad(post);
        for (std::size_t i = 0; i < kg.mu.size(); ++i) {
            out.grad.mu[i] += out.kl_weight * kg.mu[i];
            out.grad.log_sigma[i] += out.kl_weight * kg.log_sigma[i];
        }
    }
    return out;
}

} // namespace

NoiseModel NoiseModel::from_sigma(double sigma, bool learnable) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw ConfigError("noise sigma must be positive and finite");
    return {std::log(sigma), learnable};
}

double NoiseModel::sigma() const noexcept { return std::exp(log_sigma); }

const char* to_string(PosteriorKind kind) noexcept {
    return kind == PosteriorKind::Dirac ? "dirac" : "gaussian";
}

VolumePosterior VolumePosterior::prior_like(PosteriorKind kind, int side, double pixel_size) {
    VolumePosterior post;
    post.kind = kind;
    post.mu = FourierVolume(side, pixel_size, true);
    if (kind == PosteriorKind::DiagGaussian)
        post.log_sigma.assign(post.mu.size(), 0.0);
    return post;
}

std::vector<double> VolumePosterior::sigma() const {
    std::vector<double> out(mu.size(), 0.0);
    if (kind == PosteriorKind::DiagGaussian)
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = std::exp(log_sigma[i]);
    return out;
}

double loglik_spatial(const ProjectionImage& x, const ProjectionImage& predicted, const NoiseModel& noise) {
    require_same_side(x.side(), predicted.side(), "image sides differ");
    const double var = noise.sigma() * noise.sigma();
    const double log_norm = 0.5 * (kLog2Pi + 2.0 * noise.log_sigma);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i] - predicted[i];
        total -= r * r / (2.0 * var) + log_norm;
    }
    return total;
}

double loglik_fourier(const FourierSlice& observed, const FourierSlice& predicted,
                      std::span<const std::uint8_t> mask, const NoiseModel& noise) {
    require_same_side(observed.side(), predicted.side(), "slice sides differ");
    if (!mask.empty() && mask.size() != observed.size())
        throw ShapeMismatch("mask length differs from the slice");
    const double var = noise.sigma() * noise.sigma();
    const double log_norm = 0.5 * (kLog2Pi + 2.0 * noise.log_sigma);
    double total = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (!mask.empty() && !mask[i])
            continue;
        total -= std::norm(observed[i] - predicted[i]) / (2.0 * var) + log_norm;
    }
    return total;
}

KlValue kl_volume(const VolumePosterior& post) {
    if (post.kind == PosteriorKind::Dirac)
        return {0.0, true};
    const int d = post.side();
    double total = 0.0;
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
        const double ls = post.log_sigma[i];
        const double var = std::exp(2.0 * ls);
        const cplx m = post.mu[i];
        if (is_self_conjugate(i, d, 3))
            total += 0.5 * (var + m.real() * m.real() - 1.0 - 2.0 * ls);
        else
            total += 0.5 * (var - 1.0 - 2.0 * ls) + 0.25 * std::norm(m);
    }
    return {total, false};
}

KlGradient kl_volume_grad(const VolumePosterior& post) {
    KlGradient g;
    if (post.kind == PosteriorKind::Dirac) {
        g.mu.assign(post.mu.size(), cplx{});
        return g;
    }
    const int d = post.side();
    g.mu.resize(post.mu.size());
    g.log_sigma.resize(post.mu.size());
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
        g.log_sigma[i] = std::exp(2.0 * post.log_sigma[i]) - 1.0;
        g.mu[i] = is_self_conjugate(i, d, 3) ? cplx(post.mu[i].real(), 0.0) : 0.5 * post.mu[i];
    }
    return g;
}

std::vector<cplx> hermitian_normal(int side, Rng& rng) {
    require_even_side(side);
    std::normal_distribution<double> n01(0.0, 1.0);
    const std::size_t n = static_cast<std::size_t>(side) * side * side;
    std::vector<cplx> eps(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t m = mirror_flat(i, side, 3);
        if (m == i) {
            eps[i] = {n01(rng), 0.0};
        } else if (i < m) {
            const double re = n01(rng);
            const double im = n01(rng);
            eps[i] = {re, im};
            eps[m] = {re, -im};
        }
    }
    return eps;
}

FourierVolume reparameterize(const VolumePosterior& post, std::span<const cplx> eps) {
    if (post.kind == PosteriorKind::Dirac)
        return post.mu;
    if (eps.size() != post.mu.size())
        throw ShapeMismatch("noise field does not match the posterior");
    FourierVolume out = post.mu;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += std::exp(post.log_sigma[i]) * eps[i];
    return out;
}

FourierVolume sample_volume(const VolumePosterior& post, Rng& rng) {
    if (post.kind == PosteriorKind::Dirac)
        return post.mu;
    return reparameterize(post, hermitian_normal(post.side(), rng));
}

ElboResult elbo_minibatch(const VolumePosterior& post, const NoiseModel& noise,
                          std::span<const FourierObservation> data, std::span<const std::size_t> batch,
                          std::size_t n_total, const ElboOptions& options) {
    return evaluate(post, noise, data, batch, n_total, options, nullptr);
}

ElboResult elbo_joint_minibatch(const VolumePosterior& post, const PosePosterior& poses,
                                const NoiseModel& noise, std::span<const FourierObservation> data,
                                std::span<const std::size_t> batch, std::size_t n_total,
                                const ElboOptions& options) {
    return evaluate(post, noise, data, batch, n_total, options, &poses);
}

} // namespace dproj
