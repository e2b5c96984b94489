#include "dproj/volume_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace dproj {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'F', 'V', 'L', '1'};
constexpr std::size_t kHeaderSize = 4 + 4 + 1 + 1 + 8;

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t read_u32_le(const std::uint8_t* p) noexcept {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::vector<std::uint8_t> header(int side, VolumeDomain domain, bool hermitian, double pixel_size,
                                 std::size_t payload_doubles) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + 8 * payload_doubles);
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    append_u32_le(out, static_cast<std::uint32_t>(side));
    out.push_back(static_cast<std::uint8_t>(domain));
    out.push_back(hermitian ? 1 : 0);
    append_f64_le(out, pixel_size);
    return out;
}

} // namespace

void append_f64_le(std::vector<std::uint8_t>& out, double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFFu));
}

double read_f64_le(const std::uint8_t* p) noexcept {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

std::vector<std::uint8_t> encode_fvl(const VoxelVolume& volume) {
    auto out = header(volume.side(), VolumeDomain::Spatial, false, volume.pixel_size(),
                      volume.size());
    for (double v : volume.values())
        append_f64_le(out, v);
    return out;
}

std::vector<std::uint8_t> encode_fvl(const FourierVolume& volume) {
    auto out = header(volume.side(), VolumeDomain::Fourier, volume.hermitian(),
                      volume.pixel_size(), 2 * volume.size());
    for (const cplx& v : volume.values()) {
        append_f64_le(out, v.real());
        append_f64_le(out, v.imag());
    }
    return out;
}

AnyVolume decode_fvl(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw IoError("not an FVL1 volume (bad magic or truncated header)");
    const auto side = static_cast<int>(read_u32_le(bytes.data() + 4));
    const std::uint8_t domain = bytes[8];
    const bool hermitian = bytes[9] != 0;
    const double pixel_size = read_f64_le(bytes.data() + 10);
    if (side <= 0 || side % 2 != 0)
        throw IoError("FVL1 side must be positive and even");
    const std::size_t n = static_cast<std::size_t>(side) * side * side;
    const std::uint8_t* p = bytes.data() + kHeaderSize;
    if (domain == static_cast<std::uint8_t>(VolumeDomain::Spatial)) {
        if (bytes.size() != kHeaderSize + 8 * n)
            throw IoError("FVL1 spatial payload has wrong length");
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i)
            values[i] = read_f64_le(p + 8 * i);
        return VoxelVolume(side, pixel_size, std::move(values));
    }
    if (domain == static_cast<std::uint8_t>(VolumeDomain::Fourier)) {
        if (bytes.size() != kHeaderSize + 16 * n)
            throw IoError("FVL1 Fourier payload has wrong length");
        std::vector<cplx> values(n);
        for (std::size_t i = 0; i < n; ++i)
            values[i] = cplx(read_f64_le(p + 16 * i), read_f64_le(p + 16 * i + 8));
        return FourierVolume(side, pixel_size, std::move(values), hermitian);
    }
    throw IoError("FVL1 domain tag must be 0 or 1");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("short write to " + path.string());
}

void write_fvl(const std::filesystem::path& path, const VoxelVolume& volume) {
    write_file_bytes(path, encode_fvl(volume));
}

void write_fvl(const std::filesystem::path& path, const FourierVolume& volume) {
    write_file_bytes(path, encode_fvl(volume));
}

AnyVolume read_fvl(const std::filesystem::path& path) { return decode_fvl(read_file_bytes(path)); }

VoxelVolume read_spatial_fvl(const std::filesystem::path& path) {
    auto any = read_fvl(path);
    if (auto* v = std::get_if<VoxelVolume>(&any))
        return std::move(*v);
    throw IoError(path.string() + " holds a Fourier volume, expected spatial");
}

FourierVolume read_fourier_fvl(const std::filesystem::path& path) {
    auto any = read_fvl(path);
    if (auto* v = std::get_if<FourierVolume>(&any))
        return std::move(*v);
    throw IoError(path.string() + " holds a spatial volume, expected Fourier");
}

} // namespace dproj
