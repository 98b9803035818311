#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "umh/vec.hpp"

namespace umh {

/// Acoustic medium constants. Defaults are dry air at 25 C with the 40 kHz carrier.
struct Medium {
    double speed_of_sound = 346.0;      // m/s
    double carrier_frequency = 40e3;    // Hz
    double air_density = 1.184;         // kg/m^3

    void validate() const;  // throws ConfigError unless all strictly positive
};

/// Carrier wavelength, m.
double wavelength(const Medium& medium);

struct TransducerPose {
    Vec3 position;  // m
    Vec3 normal;    // unit vector
};

/// Per-unit transducer raster. The default mirrors the 249-element commercial
/// unit class: 18x14 grid with three corner positions unpopulated, 10.16 mm pitch.
struct UnitLayout {
    int cols = 18;
    int rows = 14;
    double pitch = 10.16e-3;  // m
    std::vector<std::pair<int, int>> gaps = default_gaps();  // (col,row) left empty

    static std::vector<std::pair<int, int>> default_gaps();

    int count() const;       // populated positions
    void validate() const;
};

struct ArrayConfig {
    UnitLayout unit;
    std::vector<RigidTransform> unit_poses;
    Medium medium;

    int units() const { return static_cast<int>(unit_poses.size()); }
    int transducers_per_unit() const { return unit.count(); }

    /// Eight units tiled 4x2 in the y=0 plane facing +y, centered on the origin,
    /// 1992 transducers total. The workspace sits above the array.
    static ArrayConfig default_8unit();
};

struct TransducerArray {
    std::vector<TransducerPose> poses;
    Medium medium;

    std::size_t size() const { return poses.size(); }
};

/// Flattens the config into a pose list, unit-major then row-major within each
/// unit (gaps skipped). Deterministic. Throws ConfigError on zero units or if
/// any two transducers end up closer than 0.9 x pitch.
TransducerArray build_array(const ArrayConfig& config);

ArrayConfig parse_array_config(const std::string& json_text);
ArrayConfig load_array_config(const std::string& path);
std::string array_config_to_json(const ArrayConfig& config);

}  // namespace umh
