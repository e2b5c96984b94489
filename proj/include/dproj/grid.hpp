#pragma once

// Cubic/square lattices on a centered grid and the centered unitary DFTs
// that move between position and frequency space.
//
// Conventions shared by every module:
//   * side D is even, the center index is c = D/2 in both domains;
//   * 3D data is stored [z][y][x] with x fastest, 2D data [y][x];
//   * a lattice index k corresponds to the centered coordinate k - c;
//   * the DFT is unitary: X[k] = D^{-d/2} sum_n x[n] exp(-2 pi i (n-c).(k-c) / D).
//
// Hermitian mirror: the conjugate partner of index k is (D - k) mod D. This is
// the exact symmetry of the DFT of a real signal on an even grid; the -c
// boundary plane pairs with itself periodically. Entries whose every index is
// 0 or c are self-conjugate and must be real.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dproj/errors.hpp"

namespace dproj {

using cplx = std::complex<double>;

[[nodiscard]] constexpr int center_index(int side) noexcept { return side / 2; }

[[nodiscard]] constexpr int mirror_index(int k, int side) noexcept { return (side - k) % side; }

/// Throws ConfigError unless side is positive and even.
void require_even_side(int side);

template <typename T, int Rank>
class Lattice {
    static_assert(Rank == 2 || Rank == 3);

public:
    using value_type = T;
    static constexpr int rank = Rank;

    Lattice() = default;

    explicit Lattice(int side) : side_(side) {
        require_even_side(side);
        values_.assign(element_count(side), T{});
    }

    Lattice(int side, std::vector<T> values) : side_(side), values_(std::move(values)) {
        require_even_side(side);
        if (values_.size() != element_count(side))
            throw ShapeMismatch("lattice payload length does not match side^rank");
    }

    [[nodiscard]] int side() const noexcept { return side_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] std::span<T> values() noexcept { return values_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return values_; }
    [[nodiscard]] std::vector<T>& storage() noexcept { return values_; }
    [[nodiscard]] const std::vector<T>& storage() const noexcept { return values_; }

    [[nodiscard]] T& operator[](std::size_t i) noexcept { return values_[i]; }
    [[nodiscard]] const T& operator[](std::size_t i) const noexcept { return values_[i]; }

    [[nodiscard]] std::size_t flat(int z, int y, int x) const noexcept
        requires(Rank == 3)
    {
        const auto d = static_cast<std::size_t>(side_);
        return (static_cast<std::size_t>(z) * d + static_cast<std::size_t>(y)) * d
             + static_cast<std::size_t>(x);
    }

    [[nodiscard]] std::size_t flat(int y, int x) const noexcept
        requires(Rank == 2)
    {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(side_)
             + static_cast<std::size_t>(x);
    }

    [[nodiscard]] T& operator()(int z, int y, int x) noexcept
        requires(Rank == 3)
    {
        return values_[flat(z, y, x)];
    }
    [[nodiscard]] const T& operator()(int z, int y, int x) const noexcept
        requires(Rank == 3)
    {
        return values_[flat(z, y, x)];
    }
    [[nodiscard]] T& operator()(int y, int x) noexcept
        requires(Rank == 2)
    {
        return values_[flat(y, x)];
    }
    [[nodiscard]] const T& operator()(int y, int x) const noexcept
        requires(Rank == 2)
    {
        return values_[flat(y, x)];
    }

    [[nodiscard]] static std::size_t element_count(int side) noexcept {
        std::size_t n = 1;
        for (int r = 0; r < Rank; ++r)
            n *= static_cast<std::size_t>(side);
        return n;
    }

    friend bool operator==(const Lattice&, const Lattice&) = default;

private:
    int side_ = 0;
    std::vector<T> values_;
};

/// Real D^3 density on the centered grid; pixel_size in Angstrom per voxel.
class VoxelVolume : public Lattice<double, 3> {
public:
    VoxelVolume() = default;
    explicit VoxelVolume(int side, double pixel_size = 1.0);
    VoxelVolume(int side, double pixel_size, std::vector<double> values);

    [[nodiscard]] double pixel_size() const noexcept { return pixel_size_; }

    friend bool operator==(const VoxelVolume&, const VoxelVolume&) = default;

private:
    double pixel_size_ = 1.0;
};

/// Complex D^3 field with zero frequency at the center index.
class FourierVolume : public Lattice<cplx, 3> {
public:
    FourierVolume() = default;
    explicit FourierVolume(int side, double pixel_size = 1.0, bool hermitian = false);
    FourierVolume(int side, double pixel_size, std::vector<cplx> values, bool hermitian);

    [[nodiscard]] double pixel_size() const noexcept { return pixel_size_; }
    [[nodiscard]] bool hermitian() const noexcept { return hermitian_; }
    void set_hermitian(bool flag) noexcept { hermitian_ = flag; }

    friend bool operator==(const FourierVolume&, const FourierVolume&) = default;

private:
    double pixel_size_ = 1.0;
    bool hermitian_ = false;
};

struct ProjectionImage : Lattice<double, 2> {
    using Lattice::Lattice;
};

struct FourierSlice : Lattice<cplx, 2> {
    using Lattice::Lattice;
};

// ---------------------------------------------------------------------------
// Transforms

[[nodiscard]] FourierVolume dft3_centered(const VoxelVolume& volume);

/// Inverse of dft3_centered. When the hermitian flag is set the input is
/// checked first (HermitianViolation) and the imaginary residue, which must
/// be below 1e-5 of the largest real magnitude, is discarded.
[[nodiscard]] VoxelVolume idft3_centered(const FourierVolume& fvol);

[[nodiscard]] FourierSlice dft2_centered(const ProjectionImage& image);
[[nodiscard]] ProjectionImage idft2_centered(const FourierSlice& slice);

/// Unnormalized-direction complex transforms used by the above; exposed for
/// tests and for callers that already hold complex data.
[[nodiscard]] std::vector<cplx> dft_centered(std::span<const cplx> data, int side, int rank,
                                             bool inverse);

// ---------------------------------------------------------------------------
// Hermitian symmetry

[[nodiscard]] std::size_t mirror_flat(std::size_t flat, int side, int rank) noexcept;
[[nodiscard]] bool is_self_conjugate(std::size_t flat, int side, int rank) noexcept;

/// True when every entry is the conjugate of its mirror within rel_tol of the
/// largest magnitude, and self-conjugate entries are real to the same tolerance.
[[nodiscard]] bool is_hermitian(std::span<const cplx> data, int side, int rank,
                                double rel_tol = 1e-6);

/// Orthogonal projection onto Hermitian fields: (f[k] + conj f[-k]) / 2.
/// Idempotent; output is exactly Hermitian and carries the flag.
[[nodiscard]] FourierVolume enforce_hermitian(const FourierVolume& fvol);

/// In-place variants on raw storage.
void enforce_hermitian(std::span<cplx> data, int side, int rank);
void symmetrize_mirror(std::span<double> data, int side, int rank);

} // namespace dproj
