#include "umh/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "umh/errors.hpp"

namespace umh {

void Medium::validate() const {
    if (!(speed_of_sound > 0.0) || !std::isfinite(speed_of_sound))
        throw ConfigError("medium: speed_of_sound must be strictly positive");
    if (!(carrier_frequency > 0.0) || !std::isfinite(carrier_frequency))
        throw ConfigError("medium: carrier_frequency must be strictly positive");
    if (!(air_density > 0.0) || !std::isfinite(air_density))
        throw ConfigError("medium: air_density must be strictly positive");
}

double wavelength(const Medium& medium) {
    medium.validate();
    return medium.speed_of_sound / medium.carrier_frequency;
}

RigidTransform RigidTransform::from_matrix(const std::array<double, 16>& m) {
    const double bottom[4] = {m[12], m[13], m[14], m[15]};
    const double expected[4] = {0, 0, 0, 1};
    for (int i = 0; i < 4; ++i)
        if (std::abs(bottom[i] - expected[i]) > 1e-9)
            throw ConfigError("transform: bottom row of a rigid 4x4 matrix must be (0,0,0,1)");

    RigidTransform r;
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) r.rotation[row * 3 + col] = m[row * 4 + col];
    r.translation = {m[3], m[7], m[11]};

    // R * R^T == I within tolerance, else the transform would scale or shear.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += r.rotation[i * 3 + k] * r.rotation[j * 3 + k];
            if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-6)
                throw ConfigError("transform: rotation block is not orthonormal");
        }
    }
    return r;
}

std::vector<std::pair<int, int>> UnitLayout::default_gaps() {
    // Three of the four raster corners are unpopulated on the default unit.
    return {{0, 0}, {17, 0}, {0, 13}};
}

int UnitLayout::count() const {
    int c = 0;
    for (int row = 0; row < rows; ++row)
        for (int col = 0; col < cols; ++col)
            if (std::find(gaps.begin(), gaps.end(), std::make_pair(col, row)) == gaps.end()) ++c;
    return c;
}

void UnitLayout::validate() const {
    if (cols < 1 || rows < 1) throw ConfigError("unit layout: cols and rows must be >= 1");
    if (!(pitch > 0.0) || !std::isfinite(pitch))
        throw ConfigError("unit layout: pitch must be strictly positive");
    for (const auto& g : gaps)
        if (g.first < 0 || g.first >= cols || g.second < 0 || g.second >= rows)
            throw ConfigError("unit layout: gap index outside the raster");
    if (count() < 1) throw ConfigError("unit layout: no populated transducer positions");
}

ArrayConfig ArrayConfig::default_8unit() {
    ArrayConfig cfg;
    const int tile_x = 4, tile_z = 2;
    const double pitch = cfg.unit.pitch;
    const double x0 = -(tile_x * cfg.unit.cols - 1) * pitch / 2.0;
    const double z0 = -(tile_z * cfg.unit.rows - 1) * pitch / 2.0;
    for (int uz = 0; uz < tile_z; ++uz)
        for (int ux = 0; ux < tile_x; ++ux)
            cfg.unit_poses.push_back(RigidTransform::translate(
                {x0 + ux * cfg.unit.cols * pitch, 0.0, z0 + uz * cfg.unit.rows * pitch}));
    return cfg;
}

TransducerArray build_array(const ArrayConfig& config) {
    config.medium.validate();
    config.unit.validate();
    if (config.unit_poses.empty()) throw ConfigError("array config: zero units");

    const auto& layout = config.unit;
    auto is_gap = [&](int col, int row) {
        return std::find(layout.gaps.begin(), layout.gaps.end(), std::make_pair(col, row)) !=
               layout.gaps.end();
    };

    TransducerArray array;
    array.medium = config.medium;
    array.poses.reserve(static_cast<std::size_t>(config.units()) * layout.count());
    const Vec3 local_normal{0.0, 1.0, 0.0};
    for (const auto& pose : config.unit_poses) {
        for (int row = 0; row < layout.rows; ++row) {
            for (int col = 0; col < layout.cols; ++col) {
                if (is_gap(col, row)) continue;
                Vec3 local{col * layout.pitch, 0.0, row * layout.pitch};
                array.poses.push_back({pose.apply_point(local), pose.apply_direction(local_normal)});
            }
        }
    }

    // Exhaustive pairwise spacing check; overlapping units are a config error.
    const double min_d2 = 0.9 * layout.pitch * 0.9 * layout.pitch;
    const std::size_t n = array.poses.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec3 d = array.poses[i].position - array.poses[j].position;
            if (dot(d, d) < min_d2) {
                std::ostringstream msg;
                msg << "array config: transducers " << i << " and " << j
                    << " are closer than 0.9 x pitch";
                throw ConfigError(msg.str());
            }
        }
    }
    return array;
}

namespace {

using nlohmann::json;

Medium medium_from_json(const json& j) {
    Medium m;
    if (j.contains("speed_of_sound_mps")) m.speed_of_sound = j.at("speed_of_sound_mps").get<double>();
    if (j.contains("carrier_frequency_hz"))
        m.carrier_frequency = j.at("carrier_frequency_hz").get<double>();
    if (j.contains("air_density_kgpm3")) m.air_density = j.at("air_density_kgpm3").get<double>();
    m.validate();
    return m;
}

}  // namespace

ArrayConfig parse_array_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("array config: invalid JSON: ") + e.what());
    }
    try {
        ArrayConfig cfg = ArrayConfig::default_8unit();
        if (j.contains("pitch_mm")) cfg.unit.pitch = j.at("pitch_mm").get<double>() * 1e-3;
        if (j.contains("unit_grid")) {
            const json& g = j.at("unit_grid");
            cfg.unit.cols = g.at("cols").get<int>();
            cfg.unit.rows = g.at("rows").get<int>();
            cfg.unit.gaps.clear();
            if (g.contains("gaps"))
                for (const auto& gap : g.at("gaps"))
                    cfg.unit.gaps.emplace_back(gap.at(0).get<int>(), gap.at(1).get<int>());
        }
        if (j.contains("unit_transforms")) {
            cfg.unit_poses.clear();
            for (const auto& t : j.at("unit_transforms")) {
                std::array<double, 16> m{};
                if (t.size() != 16) throw ConfigError("array config: unit_transforms entries must hold 16 numbers (4x4 row-major)");
                for (int i = 0; i < 16; ++i) m[i] = t.at(i).get<double>();
                cfg.unit_poses.push_back(RigidTransform::from_matrix(m));
            }
        }
        if (j.contains("units")) {
            const int declared = j.at("units").get<int>();
            if (declared != cfg.units())
                throw ConfigError("array config: units does not match unit_transforms count");
        }
        if (j.contains("medium")) cfg.medium = medium_from_json(j.at("medium"));
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("array config: schema error: ") + e.what());
    }
}

ArrayConfig load_array_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("array config: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_array_config(text.str());
}

std::string array_config_to_json(const ArrayConfig& config) {
    json j;
    j["units"] = config.units();
    j["pitch_mm"] = config.unit.pitch * 1e3;
    j["unit_grid"] = {{"cols", config.unit.cols}, {"rows", config.unit.rows}};
    json gaps = json::array();
    for (const auto& g : config.unit.gaps) gaps.push_back({g.first, g.second});
    j["unit_grid"]["gaps"] = gaps;
    json transforms = json::array();
    for (const auto& pose : config.unit_poses) {
        json m = json::array();
        for (double v : pose.to_matrix()) m.push_back(v);
        transforms.push_back(m);
    }
    j["unit_transforms"] = transforms;
    j["medium"] = {{"speed_of_sound_mps", config.medium.speed_of_sound},
                   {"carrier_frequency_hz", config.medium.carrier_frequency},
                   {"air_density_kgpm3", config.medium.air_density}};
    return j.dump(2);
}

}  // namespace umh
