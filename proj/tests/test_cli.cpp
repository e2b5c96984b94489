#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dproj/dataset_io.hpp"
#include "dproj/trainer.hpp"
#include "dproj/volume_io.hpp"

using namespace dproj;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

// Runs the CLI with stdout and stderr merged.
RunResult run(const std::string& args) {
    const std::string cmd = std::string(DPROJ_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe))
        r.output += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& p) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

// One scratch directory for the whole binary; cases use distinct children.
const fs::path& scratch() {
    static const fs::path root = [] {
        const fs::path p = fs::temp_directory_path() / "dproj_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string at(const std::string& name) { return (scratch() / name).string(); }

// Small noise-free dataset shared by the reconstruct and evaluate cases.
const std::string& toy_dataset() {
    static const std::string dir = [] {
        const auto r = run("simulate --size 8 --n 40 --noise-free --blobs 3 --seed 2 --out " + at("toy"));
        REQUIRE(r.code == 0);
        return at("toy");
    }();
    return dir;
}

const std::string kQuickFit = " --epochs 20 --batch 10 --lr 2e-2 --tol 0";

} // namespace

TEST_CASE("--help on every command exits 0 and lists its flags") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"simulate",
         {"--size", "--n", "--snr", "--noise-free", "--pixel-size", "--cone", "--symmetric", "--drop-poses", "--seed",
          "--out"}},
        {"reconstruct",
         {"--data", "--posterior", "--poses", "--epochs", "--batch", "--lr", "--max-shell", "--elbo-samples",
          "--learn-sigma", "--seed", "--out"}},
        {"evaluate", {"--recon", "--gt", "--halfset", "--tau", "--sssnr", "--sigma-slice"}},
        {"posescan", {"--gt", "--obs", "--data", "--axes", "--res", "--descend-from", "--out"}},
    };
    const auto top = run("--help");
    CHECK(top.code == 0);
    CHECK(top.output.find("--threads") != std::string::npos);
    for (const auto& [cmd, flags] : commands) {
        CAPTURE(cmd);
        const auto r = run(cmd + " --help");
        CHECK(r.code == 0);
        for (const auto& f : flags) {
            CAPTURE(f);
            CHECK(r.output.find(f) != std::string::npos);
        }
    }
}

TEST_CASE("simulate: usage and I/O failures") {
    const auto missing_out = run("simulate --size 8 --n 2 --noise-free");
    CHECK(missing_out.code == 2);
    CHECK(missing_out.output.find("Usage") != std::string::npos);
    CHECK(run("simulate --size 8 --n 2 --out " + at("x")).code == 2);  // neither --snr nor --noise-free
    CHECK(run("simulate --size 8 --n 2 --snr 1 --noise-free --out " + at("x")).code == 2);
    CHECK(run("simulate --size 7 --n 2 --noise-free --out " + at("x")).code == 2);
    CHECK(run("simulate --size 8 --n 0 --noise-free --out " + at("x")).code == 2);
    CHECK(run("simulate --size 8 --n 2 --noise-free --out /dev/null/sub").code == 1);
}

TEST_CASE("simulate: fixed-seed dataset matches its golden hashes") {
    const auto r = run("simulate --size 32 --n 2000 --snr 0.04 --seed 7 --out " + at("golden"));
    REQUIRE(r.code == 0);
    const fs::path dir = at("golden");
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::file_size(dir / "images.bin") == 2000u * 32u * 32u * 8u);
    CHECK(fnv1a(slurp(dir / "images.bin")) == 0x6320efedd2ca3ffaULL);
    CHECK(fnv1a(slurp(dir / "gt.fvl")) == 0x776e30fd67c1eec8ULL);
    const Dataset ds = read_dataset(dir);
    CHECK(ds.meta.snr == 0.04);
    CHECK(ds.meta.seed == 7u);
}

TEST_CASE("simulate: cone datasets keep every beta inside the cone") {
    REQUIRE(run("simulate --size 8 --n 500 --noise-free --cone 15 --seed 4 --out " + at("cone")).code == 0);
    const auto manifest = nlohmann::json::parse(slurp(fs::path(at("cone")) / "manifest.json"));
    const double limit = 15.0 * std::numbers::pi / 180.0;
    REQUIRE(manifest["observations"].size() == 500);
    for (const auto& o : manifest["observations"])
        CHECK(std::abs(o["pose"]["beta"].get<double>()) <= limit);
}

TEST_CASE("reconstruct: checkpoints, determinism and error paths") {
    const std::string data = toy_dataset();
    const auto first = run("reconstruct --data " + data + " --posterior gaussian --elbo-samples 2 --seed 1" + kQuickFit +
                           " --out " + at("fit_a"));
    REQUIRE(first.code == 0);
    const auto second = run("reconstruct --data " + data + " --posterior gaussian --elbo-samples 2 --seed 1" +
                            kQuickFit + " --out " + at("fit_b"));
    REQUIRE(second.code == 0);

    const Checkpoint cp = read_checkpoint(at("fit_a"));
    CHECK(cp.posterior.kind == PosteriorKind::DiagGaussian);
    CHECK(is_hermitian(cp.posterior.mu.values(), cp.posterior.side(), 3));
    for (const char* file : {"loss_trace.csv", "mu.fvl", "sigma.fvl", "mean.fvl"}) {
        CAPTURE(file);
        CHECK(slurp(fs::path(at("fit_a")) / file) == slurp(fs::path(at("fit_b")) / file));
    }

    REQUIRE(run("simulate --size 8 --n 4 --noise-free --drop-poses --seed 2 --out " + at("nopose")).code == 0);
    CHECK(run("reconstruct --data " + at("nopose") + " --poses known --out " + at("fit_c")).code == 3);
    CHECK(run("reconstruct --data " + data + " --posterior laplace --out " + at("fit_c")).code == 2);
    CHECK(run("reconstruct --data " + data + " --batch 0 --out " + at("fit_c")).code == 2);
    CHECK(run("reconstruct --data " + at("missing") + " --out " + at("fit_c")).code == 1);
}

TEST_CASE("evaluate: a reconstruction scored against its own mean") {
    const std::string data = toy_dataset();
    REQUIRE(run("reconstruct --data " + data + " --posterior dirac" + kQuickFit + " --out " + at("dirac")).code == 0);
    const fs::path ck = at("dirac");
    const auto r = run("evaluate --recon " + ck.string() + " --gt " + (ck / "mean.fvl").string() + " --out " +
                       at("self_eval"));
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(slurp(fs::path(at("self_eval")) / "evaluation.json"));
    CHECK(report["mse_per_voxel"].get<double>() < 1e-28);
    CHECK_FALSE(report["resolution_vs_gt"]["reached"].get<bool>());
    for (const auto& row : read_csv_rows(fs::path(at("self_eval")) / "fsc_gt.csv"))
        CHECK(row[2] == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(run("evaluate --recon " + ck.string() + " --sssnr --out " + at("bad_eval")).code == 2);
    CHECK(run("evaluate --recon " + ck.string() + " --tau 1 --out " + at("bad_eval")).code == 2);
    CHECK(run("evaluate --recon " + at("missing")).code == 1);
}

TEST_CASE("posescan: symmetric scan, stationary descent and bad axes") {
    REQUIRE(run("simulate --size 32 --n 1 --snr 2 --symmetric --blobs 4 --seed 3 --out " + at("sym")).code == 0);
    const std::string base = "posescan --gt " + at("sym") + "/gt.fvl --data " + at("sym");
    const auto scan = run(base + " --out " + at("scan"));
    REQUIRE(scan.code == 0);
    CHECK(read_csv_rows(fs::path(at("scan")) / "minima.csv").size() >= 7);

    // Descent from the truth of a noise-free observation: only the residual
    // mismatch between the real-space render and the slice model moves it.
    REQUIRE(run("simulate --size 16 --n 1 --noise-free --seed 3 --out " + at("clean")).code == 0);
    const Pose truth = *read_dataset(at("clean")).observations[0].pose;
    const std::string from = fmt::format("{:.17g},{:.17g},{:.17g}", truth.alpha, truth.beta, truth.gamma);
    const auto descent = run("posescan --gt " + at("clean") + "/gt.fvl --data " + at("clean") +
                             " --oversampling 3 --res 90x45 --steps 500 --descend-from " + from + " --out " +
                             at("descent"));
    REQUIRE(descent.code == 0);
    const auto traj = read_csv_rows(fs::path(at("descent")) / "trajectory.csv");
    REQUIRE(traj.size() >= 2);
    // Tenth of a grid cell: the grid step in alpha is 2 pi / 89.
    const double cell = 2.0 * std::numbers::pi / 89.0;
    for (const auto& row : traj) {
        CHECK(std::abs(row[1] - truth.alpha) < 0.1 * cell);
        CHECK(std::abs(row[2] - truth.beta) < 0.1 * cell);
        CHECK(std::abs(row[3] - truth.gamma) < 0.1 * cell);
    }

    CHECK(run(base + " --axes alpha --out " + at("bad")).code == 2);
    CHECK(run(base + " --axes alpha,delta --out " + at("bad")).code == 2);
    CHECK(run(base + " --axes beta,beta --out " + at("bad")).code == 2);
    CHECK(run(base + " --res 1x45 --out " + at("bad")).code == 2);
    CHECK(run("posescan --gt " + at("nope.fvl") + " --data " + at("sym") + " --out " + at("bad")).code == 1);
}

TEST_CASE("every command reruns byte-identically") {
    const std::string sim = "simulate --size 16 --n 30 --snr 0.5 --seed 11 --out ";
    REQUIRE(run(sim + at("rep_a")).code == 0);
    REQUIRE(run(sim + at("rep_b")).code == 0);
    for (const char* f : {"manifest.json", "images.bin", "gt.fvl"})
        CHECK(slurp(fs::path(at("rep_a")) / f) == slurp(fs::path(at("rep_b")) / f));

    const std::string rec = " --posterior gaussian --epochs 5 --batch 10 --seed 3 --out ";
    REQUIRE(run("reconstruct --data " + at("rep_a") + rec + at("rec_a")).code == 0);
    REQUIRE(run("reconstruct --data " + at("rep_a") + rec + at("rec_b")).code == 0);
    for (const char* f : {"loss_trace.csv", "mu.fvl", "sigma.fvl", "mean.fvl"})
        CHECK(slurp(fs::path(at("rec_a")) / f) == slurp(fs::path(at("rec_b")) / f));

    for (const char* side : {"ev_a", "ev_b"})
        REQUIRE(run("evaluate --recon " + at("rec_a") + " --gt " + at("rep_a") +
                    "/gt.fvl --sssnr --sigma-slice z --out " + at(side))
                    .code == 0);
    for (const auto& entry : fs::directory_iterator(at("ev_a")))
        CHECK(slurp(entry.path()) == slurp(fs::path(at("ev_b")) / entry.path().filename()));

    const std::string scan = "posescan --gt " + at("rep_a") + "/gt.fvl --data " + at("rep_a") +
                             " --res 12x6 --steps 20 --descend-from 0.5,1,0.2 --out ";
    REQUIRE(run(scan + at("ps_a")).code == 0);
    REQUIRE(run(scan + at("ps_b")).code == 0);
    for (const auto& entry : fs::directory_iterator(at("ps_a")))
        CHECK(slurp(entry.path()) == slurp(fs::path(at("ps_b")) / entry.path().filename()));
}
