#include "dproj/dataset_io.hpp"

#include <json.hpp>

#include "dproj/volume_io.hpp"

namespace dproj {

namespace {

using json = nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<double>();
}

json pose_json(const Pose& p) {
    return {{"alpha", p.alpha}, {"beta", p.beta},       {"gamma", p.gamma},
            {"tx", p.shift.x()}, {"ty", p.shift.y()}, {"tz", p.shift.z()}};
}

Pose pose_from_json(const json& j) {
    Pose p;
    p.alpha = j.at("alpha").get<double>();
    p.beta = j.at("beta").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.shift = {j.at("tx").get<double>(), j.at("ty").get<double>(), j.value("tz", 0.0)};
    return p;
}

json read_manifest(const std::filesystem::path& dir) {
    const auto bytes = read_file_bytes(dir / "manifest.json");
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed dataset manifest: ") + e.what());
    }
}

} // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset, const VoxelVolume* ground_truth) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create dataset directory " + dir.string());
    const DatasetMetadata& m = dataset.meta;

    std::vector<std::uint8_t> images;
    images.reserve(dataset.observations.size() * static_cast<std::size_t>(m.side) * m.side * 8);
    json records = json::array();
    for (const auto& obs : dataset.observations) {
        if (obs.image.side() != m.side)
            throw ShapeMismatch("observation side differs from the dataset side");
        for (double v : obs.image.values())
            append_f64_le(images, v);
        records.push_back({{"id", obs.id}, {"pose", obs.pose ? pose_json(*obs.pose) : json(nullptr)}});
    }
    write_file_bytes(dir / "images.bin", images);
    if (ground_truth)
        write_fvl(dir / "gt.fvl", *ground_truth);

    json j;
    j["format"] = kDatasetFormat;
    j["side"] = m.side;
    j["pixel_size_angstrom"] = m.pixel_size;
    j["snr"] = optional_number(m.snr);
    j["snr_definition"] = m.snr_definition;
    j["sigma_eps"] = m.sigma_eps;
    j["signal_variance"] = m.signal_variance;
    j["cone_half_angle_deg"] = optional_number(m.cone_half_angle_deg);
    j["translation_range"] = m.translation_range;
    j["seed"] = m.seed;
    j["count"] = dataset.observations.size();
    j["ground_truth"] = ground_truth ? json("gt.fvl") : json(nullptr);
    j["images"] = {{"file", "images.bin"}, {"dtype", "f64le"}};
    j["observations"] = std::move(records);
    write_text(dir / "manifest.json", j.dump(2) + "\n");
}

Dataset read_dataset(const std::filesystem::path& dir) {
    const json j = read_manifest(dir);
    Dataset ds;
    std::size_t count = 0;
    try {
        if (j.at("format").get<std::string>() != kDatasetFormat)
            throw DataContractError("unsupported dataset format");
        DatasetMetadata& m = ds.meta;
        m.side = j.at("side").get<int>();
        m.pixel_size = j.at("pixel_size_angstrom").get<double>();
        m.snr = read_optional(j, "snr");
        m.snr_definition = j.value("snr_definition", m.snr_definition);
        m.sigma_eps = j.at("sigma_eps").get<double>();
        m.signal_variance = j.value("signal_variance", 0.0);
        m.cone_half_angle_deg = read_optional(j, "cone_half_angle_deg");
        m.translation_range = j.value("translation_range", m.translation_range);
        m.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("ground_truth") && !j.at("ground_truth").is_null())
            m.ground_truth_path = (dir / j.at("ground_truth").get<std::string>()).string();
        count = j.at("count").get<std::size_t>();
        const json& records = j.at("observations");
        if (records.size() != count)
            throw DataContractError("manifest count differs from its observation list");
        ds.observations.resize(count);
        for (std::size_t n = 0; n < count; ++n) {
            ds.observations[n].id = records[n].at("id").get<int>();
            const json& p = records[n].at("pose");
            if (!p.is_null())
                ds.observations[n].pose = pose_from_json(p);
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("incomplete dataset manifest: ") + e.what());
    }
    require_even_side(ds.meta.side);

    const auto bytes = read_file_bytes(dir / "images.bin");
    const std::size_t per_image = static_cast<std::size_t>(ds.meta.side) * ds.meta.side;
    if (bytes.size() != count * per_image * 8)
        throw DataContractError("images.bin size does not match the manifest");
    for (std::size_t n = 0; n < count; ++n) {
        std::vector<double> values(per_image);
        for (std::size_t i = 0; i < per_image; ++i)
            values[i] = read_f64_le(bytes.data() + 8 * (n * per_image + i));
        ds.observations[n].image = ProjectionImage(ds.meta.side, std::move(values));
    }
    return ds;
}

std::optional<VoxelVolume> read_dataset_ground_truth(const std::filesystem::path& dir) {
    const json j = read_manifest(dir);
    if (!j.contains("ground_truth") || j.at("ground_truth").is_null())
        return std::nullopt;
    return read_spatial_fvl(dir / j.at("ground_truth").get<std::string>());
}

} // namespace dproj
