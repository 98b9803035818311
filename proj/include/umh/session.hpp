#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "umh/stimulus.hpp"
#include "umh/synthesis.hpp"

namespace umh {

struct HandState {
    Vec3 palm_center;      // m
    double y_hand = 0.0;   // measured palm height, m
    bool in_contact = false;
};

/// Scripted stand-in for the camera/hand-tracker pipeline.
using HandScript = std::function<HandState(double)>;

/// Hand at fixed height, in contact during [contact_start, contact_end).
HandScript stationary_hand(double y_hand, double contact_start = 0.0,
                           double contact_end = 1e30);
/// Hand whose palm centre tracks the stroke in x while the height stays fixed.
HandScript moving_hand(double y_hand, double speed, double start_x = 0.0);

struct SessionConfig {
    double center_x = 0.0;          // VR sphere centre x, m
    double center_z = 0.0;          // VR sphere centre z, m
    double stroke_length = 0.07;    // m
    double stroke_speed = 0.018;    // m/s
    double tracking_rate = 90.0;    // Hz
    double frame_rate = 1000.0;     // Hz
    HandScript hand_trajectory = stationary_hand(0.2);
    SynthesisOptions synthesis;

    void validate() const;
};

struct TrackingEvent {
    double time = 0.0;
    HandState hand;
    std::optional<Vec3> center;  // p^c, absent when not in contact
};

struct SessionLog {
    StimulusSpec stimulus;
    double frame_dt = 1e-3;  // s
    std::vector<TrackingEvent> tracking_events;
    std::vector<DriveFrame> drive_frames;
    std::vector<std::string> warnings;
};

/// The contact-center rule: p^c = (x^c, y_hand, z^c) while in contact, nothing
/// otherwise (stimulus suppressed).
std::optional<Vec3> contact_center(const SessionConfig& config, const HandState& hand);

/// Simulated stroke: the stimulus centre advances in x at stroke_speed for
/// stroke_length/stroke_speed seconds. Tracking events fire at tracking_rate;
/// every 1 kHz frame reuses the latest event's p^c. Rotation and modulation
/// phase re-base at the onset of each contact run. Time is purely logical, so
/// equal inputs give bit-identical logs.
SessionLog run_stroke_session(const TransducerArray& array, const SessionConfig& config,
                              const StimulusSpec& spec);

/// UDF1 binary drive log, little-endian:
///   magic "UDF1", u32 version=1, u32 transducer_count, f64 frame_dt_s,
///   u64 frame_count, then per frame: f64 t_s followed by transducer_count
///   pairs (u16 amplitude /65535, u16 phase /65536*2pi).
/// Writing quantizes once; read-back re-serializes byte-identically.
void write_drive_log(const SessionLog& log, const std::string& path);
SessionLog read_drive_log(const std::string& path);

void write_tracking_csv(const SessionLog& log, std::ostream& out);
std::string session_summary_json(const SessionLog& log, const SessionConfig& config);

/// Builds a SessionConfig plus stimulus from a JSON document (see README for
/// the schema). Returns the synthesis mode alongside.
struct SessionSetup {
    SessionConfig config;
    StimulusSpec stimulus;
};
SessionSetup parse_session_config(const std::string& json_text);
SessionSetup load_session_config(const std::string& path);

}  // namespace umh
