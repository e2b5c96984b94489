#include "dproj/grid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace dproj {

namespace {

// FFTW planning is not re-entrant; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place unnormalized FFT over a side^rank row-major buffer.
void fft_inplace(std::vector<cplx>& buf, int side, int rank, bool inverse) {
    static_assert(sizeof(cplx) == sizeof(fftw_complex));
    std::array<int, 3> dims{side, side, side};
    auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft(rank, dims.data(), ptr, ptr, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                             FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
}

// Cyclic roll by side/2 along every axis. For even sides this is both
// fftshift and ifftshift.
std::vector<cplx> roll_half(std::span<const cplx> in, int side, int rank) {
    const int c = center_index(side);
    std::vector<cplx> out(in.size());
    if (rank == 2) {
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x)
                out[static_cast<std::size_t>(((y + c) % side) * side + (x + c) % side)] =
                    in[static_cast<std::size_t>(y * side + x)];
    } else {
        for (int z = 0; z < side; ++z)
            for (int y = 0; y < side; ++y)
                for (int x = 0; x < side; ++x)
                    out[(static_cast<std::size_t>((z + c) % side) * side + (y + c) % side) * side
                        + (x + c) % side] =
                        in[(static_cast<std::size_t>(z) * side + y) * side + x];
    }
    return out;
}

double max_abs(std::span<const cplx> data) {
    double m = 0.0;
    for (const auto& v : data)
        m = std::max(m, std::abs(v));
    return m;
}

} // namespace

void require_even_side(int side) {
    if (side <= 0 || side % 2 != 0)
        throw ConfigError("grid side must be a positive even integer, got " + std::to_string(side));
}

VoxelVolume::VoxelVolume(int side, double pixel_size) : Lattice(side), pixel_size_(pixel_size) {
    if (!(pixel_size > 0.0))
        throw ConfigError("pixel size must be positive");
}

VoxelVolume::VoxelVolume(int side, double pixel_size, std::vector<double> values)
    : Lattice(side, std::move(values)), pixel_size_(pixel_size) {
    if (!(pixel_size > 0.0))
        throw ConfigError("pixel size must be positive");
}

FourierVolume::FourierVolume(int side, double pixel_size, bool hermitian)
    : Lattice(side), pixel_size_(pixel_size), hermitian_(hermitian) {
    if (!(pixel_size > 0.0))
        throw ConfigError("pixel size must be positive");
}

FourierVolume::FourierVolume(int side, double pixel_size, std::vector<cplx> values, bool hermitian)
    : Lattice(side, std::move(values)), pixel_size_(pixel_size), hermitian_(hermitian) {
    if (!(pixel_size > 0.0))
        throw ConfigError("pixel size must be positive");
}

std::vector<cplx> dft_centered(std::span<const cplx> data, int side, int rank, bool inverse) {
    require_even_side(side);
    auto buf = roll_half(data, side, rank);
    fft_inplace(buf, side, rank, inverse);
    auto out = roll_half(buf, side, rank);
    const double scale = 1.0 / std::sqrt(static_cast<double>(data.size()));
    for (auto& v : out)
        v *= scale;
    return out;
}

FourierVolume dft3_centered(const VoxelVolume& volume) {
    std::vector<cplx> in(volume.values().begin(), volume.values().end());
    return {volume.side(), volume.pixel_size(), dft_centered(in, volume.side(), 3, false), true};
}

VoxelVolume idft3_centered(const FourierVolume& fvol) {
    if (fvol.hermitian() && !is_hermitian(fvol.values(), fvol.side(), 3))
        throw HermitianViolation("Fourier volume flagged Hermitian fails the symmetry check");
    const auto out = dft_centered(fvol.values(), fvol.side(), 3, true);
    double max_re = 0.0;
    double max_im = 0.0;
    std::vector<double> re(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        re[i] = out[i].real();
        max_re = std::max(max_re, std::abs(out[i].real()));
        max_im = std::max(max_im, std::abs(out[i].imag()));
    }
    if (fvol.hermitian() && max_im > 1e-5 * max_re && max_im > 1e-12)
        throw HermitianViolation("inverse transform left a non-negligible imaginary part");
    return {fvol.side(), fvol.pixel_size(), std::move(re)};
}

FourierSlice dft2_centered(const ProjectionImage& image) {
    std::vector<cplx> in(image.values().begin(), image.values().end());
    return {image.side(), dft_centered(in, image.side(), 2, false)};
}

ProjectionImage idft2_centered(const FourierSlice& slice) {
    const auto out = dft_centered(slice.values(), slice.side(), 2, true);
    std::vector<double> re(out.size());
    std::transform(out.begin(), out.end(), re.begin(), [](const cplx& v) { return v.real(); });
    return {slice.side(), std::move(re)};
}

std::size_t mirror_flat(std::size_t flat, int side, int rank) noexcept {
    const auto d = static_cast<std::size_t>(side);
    std::size_t out = 0;
    std::size_t stride = 1;
    for (int r = 0; r < rank; ++r) {
        const int k = static_cast<int>(flat % d);
        flat /= d;
        out += static_cast<std::size_t>(mirror_index(k, side)) * stride;
        stride *= d;
    }
    return out;
}

bool is_self_conjugate(std::size_t flat, int side, int rank) noexcept {
    return mirror_flat(flat, side, rank) == flat;
}

bool is_hermitian(std::span<const cplx> data, int side, int rank, double rel_tol) {
    const double tol = rel_tol * std::max(max_abs(data), 1e-300);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t m = mirror_flat(i, side, rank);
        if (std::abs(data[i] - std::conj(data[m])) > tol)
            return false;
    }
    return true;
}

void enforce_hermitian(std::span<cplx> data, int side, int rank) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t m = mirror_flat(i, side, rank);
        if (m < i)
            continue;
        if (m == i) {
            data[i] = cplx(data[i].real(), 0.0);
            continue;
        }
        const cplx a = (data[i] + std::conj(data[m])) * 0.5;
        data[i] = a;
        data[m] = std::conj(a);
    }
}

FourierVolume enforce_hermitian(const FourierVolume& fvol) {
    FourierVolume out = fvol;
    enforce_hermitian(out.values(), out.side(), 3);
    out.set_hermitian(true);
    return out;
}

void symmetrize_mirror(std::span<double> data, int side, int rank) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t m = mirror_flat(i, side, rank);
        if (m <= i)
            continue;
        const double a = (data[i] + data[m]) * 0.5;
        data[i] = a;
        data[m] = a;
    }
}

} // namespace dproj
