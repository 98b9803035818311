#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "umh/vec.hpp"

namespace umh {

/// Full parameter bundle for one renderable stimulus: the circular multi-foci
/// trajectory plus the two-tone amplitude-modulation envelope.
struct StimulusSpec {
    double f_lm = 5.0;       // focus rotation frequency, Hz
    double radius = 3.3e-3;  // trajectory radius, m
    double spacing = 1e-3;   // adjacent-focus chord spacing, m
    int foci_count = 5;
    double f_am1 = 30.0;     // low modulation tone, Hz
    double f_am2 = 150.0;    // high modulation tone, Hz
    double lambda = 0.0;     // modulation split between f_am1 and f_am2, [0,1]
    double a_am = 0.0;       // modulation depth, [0,1]
    double a_max = 1.0;      // output ceiling, [0,1]
    double duration = 1.0;   // s

    void validate() const;  // throws ConfigError

    bool operator==(const StimulusSpec&) const = default;
};

/// One 1 kHz tick: the simultaneously presented foci and the scalar envelope value.
struct FociFrame {
    double time = 0.0;       // s
    std::vector<Vec3> foci;  // m; all share one y
    double amplitude = 0.0;  // in [0, a_max]

    bool operator==(const FociFrame&) const = default;
};

struct EnvelopeSeries {
    double sample_rate = 1000.0;  // Hz
    std::vector<double> samples;  // each in [0,1]

    bool operator==(const EnvelopeSeries&) const = default;
};

/// How the per-focus angular offset derives from the chord spacing d: exact
/// chord angle 2*asin(d/2r) (default) or the small-angle shorthand d/r.
enum class FocusOffsetMode { ChordExact, SmallAngle };

/// Named stimuli of the experiments. Throws ConfigError for unknown names,
/// listing the valid ones.
StimulusSpec preset(std::string_view name);
const std::vector<std::string>& preset_names();

/// Positions of the rotating foci at time t around `center` (rotation in the
/// xz-plane at y = center.y, angle measured from +x toward +z).
std::vector<Vec3> trajectory_at(const StimulusSpec& spec, const Vec3& center, double t,
                                FocusOffsetMode mode = FocusOffsetMode::ChordExact);

/// Modulated amplitude A(t) = a_max * (a_am*(lambda*Phi1 + (1-lambda)*Phi2) + 1 - a_am)
/// with Phi_k = (cos(2 pi f_k t) + 1)/2.
double envelope_at(const StimulusSpec& spec, double t);

/// Frames at t = k/frame_rate for k in [0, floor(duration*frame_rate)).
std::vector<FociFrame> render_stimulus(const StimulusSpec& spec, const Vec3& center,
                                       double frame_rate = 1000.0,
                                       FocusOffsetMode mode = FocusOffsetMode::ChordExact);

EnvelopeSeries render_envelope(const StimulusSpec& spec, double sample_rate = 1000.0);

StimulusSpec parse_stimulus_spec(const std::string& json_text);
StimulusSpec load_stimulus_spec(const std::string& path);
std::string stimulus_spec_to_json(const StimulusSpec& spec);

void write_envelope_csv(const EnvelopeSeries& series, std::ostream& out);
void write_trajectory_csv(const std::vector<FociFrame>& frames, std::ostream& out);

}  // namespace umh
