#include "umh/stimulus.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "umh/errors.hpp"
#include "umh/io_util.hpp"

namespace umh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct NamedPreset {
    const char* name;
    double lambda;
    double a_am;
};

// Table presets. All share f_lm=5 Hz, r=3.3 mm, d=1 mm, N=5, (f1,f2)=(30,150) Hz,
// a_max=1, duration 1 s. S-LM carries no modulation, so its lambda is inert.
constexpr NamedPreset kPresets[] = {
    {"S-LM", 0.0, 0.0},      {"S-30Hz", 1.0, 1.0},    {"S-150Hz", 0.0, 1.0},
    {"S-Mix1", 0.5, 1.0},    {"S-Mix2", 0.7, 1.0},    {"S-30Hz-w", 1.0, 0.5},
    {"S-30Hz-s", 1.0, 1.0},  {"S-150Hz-w", 0.0, 0.3}, {"S-150Hz-s", 0.0, 1.0},
};

}  // namespace

void StimulusSpec::validate() const {
    auto unit_range = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit_range(lambda)) throw ConfigError("stimulus: lambda must be in [0,1]");
    if (!unit_range(a_am)) throw ConfigError("stimulus: a_am must be in [0,1]");
    if (!unit_range(a_max)) throw ConfigError("stimulus: a_max must be in [0,1]");
    if (!(radius > 0.0)) throw ConfigError("stimulus: radius must be > 0");
    if (spacing < 0.0) throw ConfigError("stimulus: spacing must be >= 0");
    if (spacing > 2.0 * radius)
        throw ConfigError("stimulus: spacing exceeds the circle diameter, no chord exists");
    if (foci_count < 1) throw ConfigError("stimulus: foci_count must be >= 1");
    if (f_lm < 0.0 || f_am1 < 0.0 || f_am2 < 0.0)
        throw ConfigError("stimulus: frequencies must be >= 0");
    if (duration < 0.0) throw ConfigError("stimulus: duration must be >= 0");
}

StimulusSpec preset(std::string_view name) {
    for (const auto& p : kPresets) {
        if (name == p.name) {
            StimulusSpec spec;
            spec.lambda = p.lambda;
            spec.a_am = p.a_am;
            return spec;
        }
    }
    std::ostringstream msg;
    msg << "unknown preset '" << name << "'; valid names:";
    for (const auto& p : kPresets) msg << ' ' << p.name;
    throw ConfigError(msg.str());
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& p : kPresets) v.emplace_back(p.name);
        return v;
    }();
    return names;
}

std::vector<Vec3> trajectory_at(const StimulusSpec& spec, const Vec3& center, double t,
                                FocusOffsetMode mode) {
    spec.validate();
    if (t < 0.0) throw DomainError("trajectory: t must be >= 0");

    // Adjacent foci sit d apart along the circle: exact chord angle, or the
    // small-angle shorthand d/r (agrees to 0.4% at the default d=1mm, r=3.3mm).
    const double offset_step = mode == FocusOffsetMode::ChordExact
                                   ? 2.0 * std::asin(spec.spacing / (2.0 * spec.radius))
                                   : spec.spacing / spec.radius;

    std::vector<Vec3> foci;
    foci.reserve(static_cast<std::size_t>(spec.foci_count));
    const double base = kTwoPi * spec.f_lm * t;
    for (int i = 0; i < spec.foci_count; ++i) {
        const double angle = base + i * offset_step;
        foci.push_back({center.x + spec.radius * std::cos(angle), center.y,
                        center.z + spec.radius * std::sin(angle)});
    }
    return foci;
}

double envelope_at(const StimulusSpec& spec, double t) {
    spec.validate();
    if (t < 0.0) throw DomainError("envelope: t must be >= 0");
    const double phi1 = 0.5 * (std::cos(kTwoPi * spec.f_am1 * t) + 1.0);
    const double phi2 = 0.5 * (std::cos(kTwoPi * spec.f_am2 * t) + 1.0);
    const double mod = spec.a_am * (spec.lambda * phi1 + (1.0 - spec.lambda) * phi2) + 1.0 - spec.a_am;
    return spec.a_max * mod;
}

std::vector<FociFrame> render_stimulus(const StimulusSpec& spec, const Vec3& center,
                                       double frame_rate, FocusOffsetMode mode) {
    spec.validate();
    if (!(frame_rate > 0.0)) throw ConfigError("render: frame_rate must be > 0");
    const auto count = static_cast<std::size_t>(std::floor(spec.duration * frame_rate));
    std::vector<FociFrame> frames;
    frames.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / frame_rate;
        frames.push_back({t, trajectory_at(spec, center, t, mode), envelope_at(spec, t)});
    }
    return frames;
}

EnvelopeSeries render_envelope(const StimulusSpec& spec, double sample_rate) {
    spec.validate();
    if (!(sample_rate > 0.0)) throw ConfigError("render: sample_rate must be > 0");
    const auto count = static_cast<std::size_t>(std::floor(spec.duration * sample_rate));
    EnvelopeSeries series;
    series.sample_rate = sample_rate;
    series.samples.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        series.samples.push_back(envelope_at(spec, static_cast<double>(k) / sample_rate));
    return series;
}

StimulusSpec parse_stimulus_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("stimulus spec: invalid JSON: ") + e.what());
    }
    try {
        StimulusSpec spec;
        spec.f_lm = j.at("f_lm_hz").get<double>();
        spec.radius = j.at("radius_mm").get<double>() * 1e-3;
        spec.spacing = j.at("spacing_mm").get<double>() * 1e-3;
        spec.foci_count = j.at("foci_count").get<int>();
        spec.f_am1 = j.at("f_am1_hz").get<double>();
        spec.f_am2 = j.at("f_am2_hz").get<double>();
        spec.lambda = j.at("lambda").get<double>();
        spec.a_am = j.at("a_am").get<double>();
        spec.a_max = j.at("a_max").get<double>();
        spec.duration = j.at("duration_s").get<double>();
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("stimulus spec: schema error: ") + e.what());
    }
}

StimulusSpec load_stimulus_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("stimulus spec: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_stimulus_spec(text.str());
}

std::string stimulus_spec_to_json(const StimulusSpec& spec) {
    nlohmann::json j;
    j["f_lm_hz"] = spec.f_lm;
    j["radius_mm"] = spec.radius * 1e3;
    j["spacing_mm"] = spec.spacing * 1e3;
    j["foci_count"] = spec.foci_count;
    j["f_am1_hz"] = spec.f_am1;
    j["f_am2_hz"] = spec.f_am2;
    j["lambda"] = spec.lambda;
    j["a_am"] = spec.a_am;
    j["a_max"] = spec.a_max;
    j["duration_s"] = spec.duration;
    return j.dump(2);
}

void write_envelope_csv(const EnvelopeSeries& series, std::ostream& out) {
    out << "t_s,amplitude\n";
    for (std::size_t k = 0; k < series.samples.size(); ++k)
        out << g17(static_cast<double>(k) / series.sample_rate) << ',' << g17(series.samples[k])
            << '\n';
}

void write_trajectory_csv(const std::vector<FociFrame>& frames, std::ostream& out) {
    out << "t_s,focus,x_m,y_m,z_m\n";
    for (const auto& frame : frames)
        for (std::size_t i = 0; i < frame.foci.size(); ++i)
            out << g17(frame.time) << ',' << i + 1 << ',' << g17(frame.foci[i].x) << ','
                << g17(frame.foci[i].y) << ',' << g17(frame.foci[i].z) << '\n';
}

}  // namespace umh
