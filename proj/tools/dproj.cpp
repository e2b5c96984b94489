// dproj: simulate datasets, reconstruct volumes, evaluate reconstructions and
// scan pose error surfaces.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 data-contract violation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dproj/dataset_io.hpp"
#include "dproj/metrics.hpp"
#include "dproj/parallel.hpp"
#include "dproj/pose_scan.hpp"
#include "dproj/svg.hpp"
#include "dproj/trainer.hpp"
#include "dproj/volume_io.hpp"

namespace fs = std::filesystem;
using namespace dproj;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitContract = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const UsageError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const KindError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const IoError& e) {
        fmt::print(stderr, "I/O error: {}\n", e.what());
        return kExitIo;
    } catch (const DataContractError& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kExitContract;
    } catch (const EmptyDataset& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kExitContract;
    } catch (const HermitianViolation& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kExitContract;
    } catch (const ShapeMismatch& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kExitContract;
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitContract;
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(item);
    return out;
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(fmt::format("cannot parse {} from '{}'", what, s));
    }
}

void write_svg_and_csv(const fs::path& stem, const std::string& csv, const std::string& svg_text) {
    write_text(fs::path(stem).replace_extension(".csv"), csv);
    write_text(fs::path(stem).replace_extension(".svg"), svg_text);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    int size = 32;
    int n = 100;
    std::optional<double> snr;
    bool noise_free = false;
    double pixel_size = 1.0;
    std::optional<double> cone;
    bool symmetric = false;
    bool drop_poses = false;
    std::uint64_t seed = 0;
    int blobs = 12;
    double translation_range = 2.0;
    std::string out;
};

void run_simulate(const SimulateArgs& a) {
    if (a.snr.has_value() == a.noise_free)
        throw UsageError("give exactly one of --snr or --noise-free");
    PhantomOptions po;
    po.pixel_size = a.pixel_size;
    const VoxelVolume gt = make_phantom(a.size, a.blobs, a.seed, a.symmetric, po);
    SynthesisConfig sc;
    sc.count = a.n;
    sc.snr = a.snr;
    sc.poses.cone_half_angle_deg = a.cone;
    sc.poses.translation_range = a.translation_range;
    sc.seed = a.seed;
    sc.drop_poses = a.drop_poses;
    const Dataset ds = synthesize_dataset(gt, sc);
    write_dataset(a.out, ds, &gt);
    fmt::print("dataset      {}\n", a.out);
    fmt::print("side         {}\n", ds.meta.side);
    fmt::print("observations {}\n", ds.observations.size());
    fmt::print("pixel size   {} A\n", ds.meta.pixel_size);
    fmt::print("snr          {}\n", ds.meta.snr ? fmt::format("{}", *ds.meta.snr) : std::string("noise-free"));
    fmt::print("sigma_eps    {:.6g}\n", ds.meta.sigma_eps);
    fmt::print("signal var   {:.6g}\n", ds.meta.signal_variance);
    fmt::print("cone         {}\n",
               ds.meta.cone_half_angle_deg ? fmt::format("+-{} deg", *ds.meta.cone_half_angle_deg)
                                           : std::string("none"));
    fmt::print("poses        {}\n", a.drop_poses ? "dropped" : "stored");
    fmt::print("symmetric    {}\n", a.symmetric ? "7-fold" : "no");
}

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructArgs {
    std::string data;
    std::string posterior = "gaussian";
    std::string poses = "known";
    int epochs = 100;
    int batch = 64;
    double lr = 1e-2;
    std::optional<int> max_shell;
    int elbo_samples = 1;
    bool learn_sigma = false;
    std::uint64_t seed = 0;
    std::string out;
    int oversampling = 1;
    std::string pose_init = "random";
    double perturb_deg = 2.0;
    double pose_lr = 1e-2;
    std::optional<double> noise_sigma;
    double tol = 1e-4;
    int window = 50;
};

void run_reconstruct(const ReconstructArgs& a) {
    TrainerConfig tc;
    tc.posterior = a.posterior == "dirac" ? PosteriorKind::Dirac : PosteriorKind::DiagGaussian;
    tc.max_epochs = a.epochs;
    tc.batch_size = a.batch;
    tc.learning_rate = a.lr;
    tc.max_shell = a.max_shell;
    tc.elbo_samples = a.elbo_samples;
    tc.learn_sigma = a.learn_sigma;
    tc.seed = a.seed;
    tc.oversampling = a.oversampling;
    tc.pose_learning_rate = a.pose_lr;
    tc.noise_sigma = a.noise_sigma;
    tc.convergence_tol = a.tol;
    tc.convergence_window = a.window;
    tc.validate();

    const Dataset ds = read_dataset(a.data);
    FitReport report;
    if (a.poses == "known") {
        report = fit_structure(ds, tc);
    } else {
        JointOptions jo;
        jo.init = a.pose_init == "random"      ? PoseInit::Random
                  : a.pose_init == "perturbed" ? PoseInit::Perturbed
                                               : PoseInit::GroundTruth;
        jo.perturb_deg = a.perturb_deg;
        report = fit_joint(ds, tc, jo);
    }
    write_checkpoint(a.out, report, tc);
    fmt::print("checkpoint   {}\n", a.out);
    fmt::print("posterior    {}\n", to_string(report.posterior.kind));
    fmt::print("steps        {} ({} epochs{})\n", report.steps, report.epochs_run,
               report.converged ? ", converged" : "");
    fmt::print("final loss   {:.10g}\n", report.loss_trace.empty() ? 0.0 : report.loss_trace.back());
    fmt::print("noise sigma  {:.6g}\n", report.noise.sigma());
    fmt::print("wall time    {:.2f} s\n", report.wall_seconds);
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string recon;
    std::optional<std::string> gt;
    bool halfset = false;
    std::optional<std::string> data;
    double tau = 0.5;
    bool sssnr = false;
    std::optional<std::string> sigma_slice;
    std::optional<std::string> out;
    std::uint64_t split_seed = 0;
};

std::string resolution_text(const Resolution& r) {
    if (!r.reached)
        return fmt::format("not reached (bound {:.4g} A, Nyquist)", r.angstrom);
    return fmt::format("{:.4g} A (shell {:.3f})", r.angstrom, r.shell);
}

nlohmann::json resolution_json(const Resolution& r) {
    return {{"reached", r.reached}, {"shell", r.shell}, {"angstrom", r.angstrom}};
}

void write_sigma_slices(const fs::path& out, const VolumePosterior& post, const std::string& axis) {
    if (axis != "x" && axis != "y" && axis != "z")
        throw UsageError("--sigma-slice takes the slice normal: x, y or z");
    const int d = post.side();
    const int c = center_index(d);
    const auto sigma = post.sigma();
    std::vector<double> plane(static_cast<std::size_t>(d) * d);
    std::string csv;
    for (int r = 0; r < d; ++r) {
        for (int q = 0; q < d; ++q) {
            int x = q, y = r, z = c;
            if (axis == "x") {
                x = c;
                y = q;
                z = r;
            } else if (axis == "y") {
                x = q;
                y = c;
                z = r;
            }
            const double v = sigma[post.mu.flat(z, y, x)];
            // Row 0 of the image is the highest frequency along the vertical axis.
            plane[static_cast<std::size_t>(d - 1 - r) * d + q] = v;
        }
    }
    for (int r = 0; r < d; ++r) {
        for (int q = 0; q < d; ++q)
            csv += fmt::format("{}{:.17g}", q ? "," : "", plane[static_cast<std::size_t>(r) * d + q]);
        csv += '\n';
    }
    const char* h = axis == "x" ? "ky" : "kx";
    const char* v = axis == "z" ? "ky" : "kz";
    // One std. dev. is shared by the real and imaginary part of each entry.
    for (const char* part : {"real", "imag"}) {
        svg::Heatmap map;
        map.title = fmt::format("posterior sigma, central slice normal to {} ({} part)", axis, part);
        map.rows = d;
        map.cols = d;
        map.values = plane;
        map.x_label = h;
        map.y_label = v;
        write_svg_and_csv(out / fmt::format("sigma_slice_{}_{}", axis, part), csv, svg::heatmap(map));
    }
}

void run_evaluate(const EvaluateArgs& a) {
    if (!(a.tau > 0.0 && a.tau < 1.0))
        throw UsageError("--tau must lie in (0, 1)");
    const Checkpoint cp = read_checkpoint(a.recon);
    if (a.sssnr && cp.posterior.kind != PosteriorKind::DiagGaussian)
        throw UsageError("--sssnr requires a gaussian posterior checkpoint");
    if (a.sigma_slice && cp.posterior.kind != PosteriorKind::DiagGaussian)
        throw UsageError("--sigma-slice requires a gaussian posterior checkpoint");
    if (a.halfset && !a.data)
        throw UsageError("--halfset requires --data");
    const fs::path out = a.out ? fs::path(*a.out) : fs::path(a.recon) / "evaluation";
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw IoError("cannot create " + out.string());

    nlohmann::json report;
    report["tau"] = a.tau;
    std::vector<ShellCurve> curves;
    std::vector<std::string> labels;
    if (a.gt) {
        const VoxelVolume gt = read_spatial_fvl(*a.gt);
        if (gt.side() != cp.posterior.side())
            throw DataContractError("ground truth and reconstruction differ in side");
        const VoxelVolume mean = idft3_centered(cp.posterior.mu);
        const double mse = mse_per_voxel(mean, gt);
        const ShellCurve curve = fsc(cp.posterior.mu, dft3_centered(gt));
        const Resolution res = resolution_at_threshold(curve, a.tau);
        write_text(out / "fsc_gt.csv", curve_csv(curve));
        fmt::print("mse per voxel      {:.6g}\n", mse);
        fmt::print("resolution vs gt   {}\n", resolution_text(res));
        report["mse_per_voxel"] = mse;
        report["resolution_vs_gt"] = resolution_json(res);
        curves.push_back(curve);
        labels.push_back("recon vs ground truth");
    }
    if (a.halfset) {
        const Dataset ds = read_dataset(*a.data);
        const HalfsetResult hs = halfset_fsc(ds, cp.config, a.split_seed);
        const Resolution res = resolution_at_threshold(hs.curve, a.tau);
        write_text(out / "fsc_halfset.csv", curve_csv(hs.curve));
        fmt::print("half-set resolution {}\n", resolution_text(res));
        report["resolution_halfset"] = resolution_json(res);
        curves.push_back(hs.curve);
        labels.push_back("half-set");
    }
    if (a.sssnr) {
        const ShellCurve alpha = ss_snr(cp.posterior);
        const ShellCurve predicted = fsc_from_sssnr(alpha);
        const Resolution res = resolution_at_threshold(predicted, a.tau);
        write_text(out / "sssnr.csv", curve_csv(alpha));
        write_text(out / "fsc_sssnr.csv", curve_csv(predicted));
        fmt::print("ss-snr resolution  {}\n", resolution_text(res));
        report["resolution_sssnr"] = resolution_json(res);
        curves.push_back(predicted);
        labels.push_back("alpha / (1 + alpha)");
    }
    if (!curves.empty()) {
        std::vector<NamedCurve> named;
        for (std::size_t i = 0; i < curves.size(); ++i)
            named.push_back({labels[i], &curves[i]});
        write_text(out / "fsc.svg", curves_svg(named, "Fourier shell correlation"));
    }
    if (a.sigma_slice) {
        write_sigma_slices(out, cp.posterior, *a.sigma_slice);
        fmt::print("sigma slices       {}\n", (out / fmt::format("sigma_slice_{}_*.svg", *a.sigma_slice)).string());
    }
    write_text(out / "evaluation.json", report.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// posescan

struct PosescanArgs {
    std::string gt;
    int obs = 0;
    std::string data;
    std::string axes = "alpha,beta";
    std::string res = "90x45";
    std::optional<std::string> descend_from;
    std::string out;
    int steps = 5000;
    double lr = 1e-3;
    double tol = 1e-4;
    double minima_tol = 0.05;
    std::optional<double> noise_sigma;
    int oversampling = 1;
};

ScanAxis full_axis(EulerAngle a, int points) {
    const double hi = a == EulerAngle::Beta ? std::numbers::pi : 2.0 * std::numbers::pi;
    return {a, 0.0, hi, points};
}

void run_posescan(const PosescanArgs& a) {
    const auto names = split(a.axes, ',');
    if (names.size() != 2)
        throw UsageError("--axes takes two comma-separated angles, e.g. alpha,beta");
    EulerAngle ax[2];
    try {
        ax[0] = parse_euler_angle(names[0]);
        ax[1] = parse_euler_angle(names[1]);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    if (ax[0] == ax[1])
        throw UsageError("--axes needs two different angles");
    const auto dims = split(a.res, 'x');
    if (dims.size() != 2)
        throw UsageError("--res takes COLSxROWS, e.g. 90x45");
    const int cols = static_cast<int>(parse_double(dims[0], "resolution"));
    const int rows = static_cast<int>(parse_double(dims[1], "resolution"));
    if (cols < 2 || rows < 2)
        throw UsageError("--res needs at least 2 points per axis");
    std::optional<Pose> start;
    if (a.descend_from) {
        const auto parts = split(*a.descend_from, ',');
        if (parts.size() != 3)
            throw UsageError("--descend-from takes alpha,beta,gamma in radians");
        start = Pose{};
        start->alpha = parse_double(parts[0], "alpha");
        start->beta = parse_double(parts[1], "beta");
        start->gamma = parse_double(parts[2], "gamma");
    }

    const Dataset ds = read_dataset(a.data);
    if (a.obs < 0 || static_cast<std::size_t>(a.obs) >= ds.observations.size())
        throw UsageError("--obs is out of range");
    const VoxelVolume gt = read_spatial_fvl(a.gt);
    if (gt.side() != ds.meta.side)
        throw DataContractError("ground truth and dataset differ in side");
    const auto& record = ds.observations[static_cast<std::size_t>(a.obs)];
    const Pose base = record.pose.value_or(Pose{});
    // Noise-free data: score residuals against the signal std itself so the
    // default step size stays stable.
    TrainerConfig tc;
    tc.noise_sigma = a.noise_sigma;
    tc.noise_free_fraction = 1.0;
    const double sigma = model_noise_sigma(ds, tc);

    const SliceProjector projector(dft3_centered(gt), a.oversampling);
    const FourierSlice observed = dft2_centered(record.image);
    const PoseObjective objective(projector, observed, sigma);

    ScanSpec spec;
    spec.cols = full_axis(ax[0], cols);
    spec.rows = full_axis(ax[1], rows);
    spec.fixed = base;
    const PoseSurface surface = pose_error_surface(objective, spec);
    const auto minima = near_global_minima(surface, a.minima_tol);

    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec)
        throw IoError("cannot create " + a.out);
    write_text(fs::path(a.out) / "surface.csv", surface_csv(surface));
    std::string mcsv = fmt::format("row,col,{},{},loss\n", to_string(spec.rows.angle), to_string(spec.cols.angle));
    for (const auto& m : minima) {
        const int r = static_cast<int>(m.index) / spec.cols.points;
        const int c = static_cast<int>(m.index) % spec.cols.points;
        mcsv += fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", r, c, spec.rows.at(r), spec.cols.at(c), m.value);
    }
    write_text(fs::path(a.out) / "minima.csv", mcsv);

    std::optional<PoseTrajectory> traj;
    if (start) {
        Pose init = base;
        init.alpha = start->alpha;
        init.beta = start->beta;
        init.gamma = start->gamma;
        traj = fit_pose_trajectory(objective, init, a.steps, a.lr, a.tol);
        write_text(fs::path(a.out) / "trajectory.csv", trajectory_csv(*traj));
    }
    write_text(fs::path(a.out) / "surface.svg", surface_svg(surface, traj ? &*traj : nullptr));

    fmt::print("surface        {} x {} over {} x {}\n", cols, rows, to_string(spec.cols.angle),
               to_string(spec.rows.angle));
    fmt::print("global minimum {:.6g} at {}={:.4f}, {}={:.4f}\n", surface.min_value(), to_string(spec.cols.angle),
               spec.cols.at(surface.argmin_col), to_string(spec.rows.angle), spec.rows.at(surface.argmin_row));
    fmt::print("near-global local minima (within {:.0f}%): {}\n", 100.0 * a.minima_tol, minima.size());
    if (traj) {
        const auto& last = traj->points.back();
        fmt::print("descent        {} steps, final loss {:.6g}, grad norm {:.3g}{}\n", traj->points.size() - 1,
                   last.loss, traj->final_grad_norm, traj->converged ? " (converged)" : "");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dproj: differentiable projection and variational 3D reconstruction"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Maximum worker threads (0 = hardware default)");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Generate a phantom and a synthetic observation dataset");
    s->add_option("--size", sim.size, "Volume side D (even)")->capture_default_str();
    s->add_option("--n", sim.n, "Number of observations")->capture_default_str();
    auto* snr_opt = s->add_option("--snr", sim.snr, "Signal-to-noise ratio (signal variance / noise variance)");
    auto* nf_opt = s->add_flag("--noise-free", sim.noise_free, "Store clean projections");
    snr_opt->excludes(nf_opt);
    s->add_option("--pixel-size", sim.pixel_size, "Pixel size in Angstrom")->capture_default_str();
    s->add_option("--cone", sim.cone, "Restrict beta to (-deg, +deg)");
    s->add_flag("--symmetric", sim.symmetric, "7-fold symmetric phantom about z");
    s->add_flag("--drop-poses", sim.drop_poses, "Do not store poses");
    s->add_option("--seed", sim.seed, "Root seed")->capture_default_str();
    s->add_option("--blobs", sim.blobs, "Number of phantom blobs")->capture_default_str();
    s->add_option("--translation-range", sim.translation_range, "Shift range per axis in voxels")
        ->capture_default_str();
    s->add_option("--out", sim.out, "Output dataset directory")->required();

    ReconstructArgs rec;
    auto* r = app.add_subcommand("reconstruct", "Fit a volume posterior to a dataset");
    r->add_option("--data", rec.data, "Dataset directory")->required();
    r->add_option("--posterior", rec.posterior, "dirac or gaussian")
        ->check(CLI::IsMember({"dirac", "gaussian"}))
        ->capture_default_str();
    r->add_option("--poses", rec.poses, "known or latent")
        ->check(CLI::IsMember({"known", "latent"}))
        ->capture_default_str();
    r->add_option("--epochs", rec.epochs, "Maximum epochs")->capture_default_str();
    r->add_option("--batch", rec.batch, "Minibatch size")->capture_default_str();
    r->add_option("--lr", rec.lr, "Learning rate")->capture_default_str();
    r->add_option("--max-shell", rec.max_shell, "Ignore slice entries beyond this radius");
    r->add_option("--elbo-samples", rec.elbo_samples, "Posterior samples per step")->capture_default_str();
    r->add_flag("--learn-sigma", rec.learn_sigma, "Learn the observation noise level");
    r->add_option("--seed", rec.seed, "Root seed")->capture_default_str();
    r->add_option("--out", rec.out, "Checkpoint directory")->required();
    r->add_option("--oversampling", rec.oversampling, "Fourier-grid oversampling factor")->capture_default_str();
    r->add_option("--pose-init", rec.pose_init, "Latent pose start: random, perturbed or truth")
        ->check(CLI::IsMember({"random", "perturbed", "truth"}))
        ->capture_default_str();
    r->add_option("--perturb-deg", rec.perturb_deg, "Angle jitter for --pose-init perturbed")
        ->capture_default_str();
    r->add_option("--pose-lr", rec.pose_lr, "Learning rate for latent poses")->capture_default_str();
    r->add_option("--noise-sigma", rec.noise_sigma, "Override the model noise level");
    r->add_option("--tol", rec.tol, "Convergence tolerance on the windowed loss")->capture_default_str();
    r->add_option("--window", rec.window, "Convergence window in steps")->capture_default_str();

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Score a checkpoint");
    e->add_option("--recon", ev.recon, "Checkpoint directory")->required();
    e->add_option("--gt", ev.gt, "Ground-truth volume (FVL1)");
    e->add_flag("--halfset", ev.halfset, "Half-set FSC (refits both halves; needs --data)");
    e->add_option("--data", ev.data, "Dataset directory for --halfset");
    e->add_option("--tau", ev.tau, "FSC threshold, e.g. 0.5 or 0.143")->capture_default_str();
    e->add_flag("--sssnr", ev.sssnr, "Spectral SNR and its predicted FSC (gaussian only)");
    e->add_option("--sigma-slice", ev.sigma_slice, "Central sigma slice normal to x, y or z");
    e->add_option("--out", ev.out, "Report directory (default RECON/evaluation)");
    e->add_option("--split-seed", ev.split_seed, "Seed of the half-set split")->capture_default_str();

    PosescanArgs ps;
    auto* p = app.add_subcommand("posescan", "Pose error surface and gradient-descent trajectory");
    p->add_option("--gt", ps.gt, "Volume (FVL1) to project")->required();
    p->add_option("--obs", ps.obs, "Observation index")->capture_default_str();
    p->add_option("--data", ps.data, "Dataset directory")->required();
    p->add_option("--axes", ps.axes, "Two angles to scan")->capture_default_str();
    p->add_option("--res", ps.res, "Grid points COLSxROWS")->capture_default_str();
    p->add_option("--descend-from", ps.descend_from, "Start pose alpha,beta,gamma (radians)");
    p->add_option("--out", ps.out, "Output directory")->required();
    p->add_option("--steps", ps.steps, "Maximum descent steps")->capture_default_str();
    p->add_option("--lr", ps.lr, "Descent step size")->capture_default_str();
    p->add_option("--tol", ps.tol, "Stop when the gradient norm is below this")->capture_default_str();
    p->add_option("--minima-tol", ps.minima_tol, "Relative band above the global minimum")->capture_default_str();
    p->add_option("--noise-sigma", ps.noise_sigma, "Override the noise level");
    p->add_option("--oversampling", ps.oversampling, "Fourier-grid oversampling factor")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitUsage;
    }
    set_worker_limit(threads);

    if (*s)
        return guarded([&] { run_simulate(sim); });
    if (*r)
        return guarded([&] { run_reconstruct(rec); });
    if (*e)
        return guarded([&] { run_evaluate(ev); });
    if (*p)
        return guarded([&] { run_posescan(ps); });
    return kExitUsage;
}
