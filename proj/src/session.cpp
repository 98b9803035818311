#include "umh/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
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

}  // namespace

HandScript stationary_hand(double y_hand, double contact_start, double contact_end) {
    return [=](double t) {
        HandState hand;
        hand.palm_center = {0.0, y_hand, 0.0};
        hand.y_hand = y_hand;
        hand.in_contact = t >= contact_start && t < contact_end;
        return hand;
    };
}

HandScript moving_hand(double y_hand, double speed, double start_x) {
    return [=](double t) {
        HandState hand;
        hand.palm_center = {start_x + speed * t, y_hand, 0.0};
        hand.y_hand = y_hand;
        hand.in_contact = true;
        return hand;
    };
}

void SessionConfig::validate() const {
    if (!(tracking_rate > 0.0) || !(frame_rate > 0.0))
        throw ConfigError("session: rates must be > 0");
    if (stroke_length < 0.0) throw ConfigError("session: stroke_length must be >= 0");
    if (stroke_length > 0.0 && !(stroke_speed > 0.0))
        throw ConfigError("session: stroke_speed must be > 0 for a nonzero stroke");
    if (!hand_trajectory) throw ConfigError("session: hand_trajectory is required");
}

std::optional<Vec3> contact_center(const SessionConfig& config, const HandState& hand) {
    if (!hand.in_contact) return std::nullopt;
    return Vec3{config.center_x, hand.y_hand, config.center_z};
}

SessionLog run_stroke_session(const TransducerArray& array, const SessionConfig& config,
                              const StimulusSpec& spec) {
    config.validate();
    spec.validate();

    SessionLog log;
    log.stimulus = spec;
    log.frame_dt = 1.0 / config.frame_rate;

    const double duration =
        config.stroke_length > 0.0 ? config.stroke_length / config.stroke_speed : spec.duration;
    const auto n_ticks = static_cast<std::size_t>(std::floor(duration * config.tracking_rate));
    const auto n_frames = static_cast<std::size_t>(std::floor(duration * config.frame_rate));

    // Tracking pass: sample the hand, apply the contact rule, advance the
    // stroke. Everything downstream only sees these events.
    std::vector<double> contact_onset(n_ticks, 0.0);
    for (std::size_t j = 0; j < n_ticks; ++j) {
        const double tau = static_cast<double>(j) / config.tracking_rate;
        TrackingEvent event;
        event.time = tau;
        event.hand = config.hand_trajectory(tau);
        event.center = contact_center(config, event.hand);
        if (event.center) event.center->x += config.stroke_speed * tau;
        if (event.center) {
            const bool fresh = j == 0 || !log.tracking_events[j - 1].center;
            contact_onset[j] = fresh ? tau : contact_onset[j - 1];
        }
        log.tracking_events.push_back(event);
    }

    // Frame pass: each 1 kHz tick reuses the latest tracking event's p^c.
    std::vector<FociFrame> foci_frames;
    foci_frames.reserve(n_frames);
    std::size_t tick = 0;
    for (std::size_t k = 0; k < n_frames; ++k) {
        const double t = static_cast<double>(k) / config.frame_rate;
        while (tick + 1 < n_ticks &&
               static_cast<double>(tick + 1) / config.tracking_rate <= t)
            ++tick;
        if (n_ticks == 0 || !log.tracking_events[tick].center) continue;
        const double t_stim = t - contact_onset[tick];
        FociFrame frame;
        frame.time = t;
        frame.foci = trajectory_at(spec, *log.tracking_events[tick].center, t_stim);
        frame.amplitude = envelope_at(spec, t_stim);
        foci_frames.push_back(std::move(frame));
    }

    if (foci_frames.empty())
        log.warnings.push_back("hand trajectory never in contact; no drive frames emitted");
    else
        log.drive_frames = stream_drive(array, foci_frames, config.synthesis);
    return log;
}

// ---------------------------------------------------------------------------
// UDF1 drive log

namespace {

void put_u16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(buf, bits);
}

std::uint16_t quantize_amp(double a) {
    return static_cast<std::uint16_t>(std::lround(std::clamp(a, 0.0, 1.0) * 65535.0));
}

std::uint16_t quantize_phase(double p) {
    const long q = std::lround(p / kTwoPi * 65536.0) % 65536;
    return static_cast<std::uint16_t>(q < 0 ? q + 65536 : q);
}

struct Reader {
    const std::string& data;
    std::size_t offset = 0;

    void need(std::size_t n, const char* what) const {
        if (offset + n > data.size())
            throw FormatError(std::string("drive log truncated while reading ") + what, offset);
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        auto v = static_cast<std::uint16_t>(static_cast<unsigned char>(data[offset]) |
                                            static_cast<unsigned char>(data[offset + 1]) << 8);
        offset += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset + i])) << (8 * i);
        offset += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[offset + i])) << (8 * i);
        offset += 8;
        return v;
    }
    double f64(const char* what) {
        const std::uint64_t bits = u64(what);
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
};

}  // namespace

void write_drive_log(const SessionLog& log, const std::string& path) {
    const std::uint32_t transducer_count =
        log.drive_frames.empty() ? 0u : static_cast<std::uint32_t>(log.drive_frames[0].amplitudes.size());
    for (const auto& frame : log.drive_frames)
        if (frame.amplitudes.size() != transducer_count || frame.phases.size() != transducer_count)
            throw DomainError("drive log: frames disagree on transducer count");

    std::string buf;
    buf.reserve(28 + log.drive_frames.size() * (8 + 4u * transducer_count));
    buf += "UDF1";
    put_u32(buf, 1);
    put_u32(buf, transducer_count);
    put_f64(buf, log.frame_dt);
    put_u64(buf, log.drive_frames.size());
    for (const auto& frame : log.drive_frames) {
        put_f64(buf, frame.time);
        for (std::uint32_t t = 0; t < transducer_count; ++t) {
            put_u16(buf, quantize_amp(frame.amplitudes[t]));
            put_u16(buf, quantize_phase(frame.phases[t]));
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("drive log: cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw ConfigError("drive log: write failed for " + path);
}

SessionLog read_drive_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("drive log: cannot open " + path);
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string data = raw.str();

    Reader r{data};
    r.need(4, "magic");
    if (data.compare(0, 4, "UDF1") != 0) throw FormatError("drive log: bad magic", 0);
    r.offset = 4;
    const std::uint32_t version = r.u32("version");
    if (version != 1)
        throw FormatError("drive log: unsupported version " + std::to_string(version), 4);
    const std::uint32_t transducer_count = r.u32("transducer count");
    const double frame_dt = r.f64("frame dt");
    const std::uint64_t frame_count = r.u64("frame count");

    SessionLog log;
    log.frame_dt = frame_dt;
    log.drive_frames.reserve(frame_count);
    for (std::uint64_t f = 0; f < frame_count; ++f) {
        DriveFrame frame;
        frame.time = r.f64("frame timestamp");
        frame.amplitudes.resize(transducer_count);
        frame.phases.resize(transducer_count);
        for (std::uint32_t t = 0; t < transducer_count; ++t) {
            frame.amplitudes[t] = r.u16("amplitude") / 65535.0;
            frame.phases[t] = r.u16("phase") * (kTwoPi / 65536.0);
        }
        log.drive_frames.push_back(std::move(frame));
    }
    if (r.offset != data.size())
        throw FormatError("drive log: trailing bytes after declared frame count", r.offset);
    return log;
}

void write_tracking_csv(const SessionLog& log, std::ostream& out) {
    out << "t_s,y_hand_m,in_contact\n";
    for (const auto& event : log.tracking_events)
        out << g17(event.time) << ',' << g17(event.hand.y_hand) << ','
            << (event.hand.in_contact ? 1 : 0) << '\n';
}

std::string session_summary_json(const SessionLog& log, const SessionConfig& config) {
    nlohmann::json j;
    j["stimulus"] = nlohmann::json::parse(stimulus_spec_to_json(log.stimulus));
    j["frame_rate_hz"] = config.frame_rate;
    j["tracking_rate_hz"] = config.tracking_rate;
    j["stroke_length_m"] = config.stroke_length;
    j["stroke_speed_mps"] = config.stroke_speed;
    j["frame_count"] = log.drive_frames.size();
    j["tracking_event_count"] = log.tracking_events.size();
    j["warnings"] = log.warnings;
    return j.dump(2);
}

SessionSetup parse_session_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("session config: invalid JSON: ") + e.what());
    }
    try {
        SessionSetup setup;
        auto& cfg = setup.config;
        if (j.contains("center_x_m")) cfg.center_x = j.at("center_x_m").get<double>();
        if (j.contains("center_z_m")) cfg.center_z = j.at("center_z_m").get<double>();
        if (j.contains("stroke_length_m")) cfg.stroke_length = j.at("stroke_length_m").get<double>();
        if (j.contains("stroke_speed_mps")) cfg.stroke_speed = j.at("stroke_speed_mps").get<double>();
        if (j.contains("tracking_rate_hz")) cfg.tracking_rate = j.at("tracking_rate_hz").get<double>();
        if (j.contains("frame_rate_hz")) cfg.frame_rate = j.at("frame_rate_hz").get<double>();
        if (j.contains("mode"))
            cfg.synthesis.mode = j.at("mode").get<std::string>() == "literal-phase-sum"
                                     ? DriveMode::LiteralPhaseSum
                                     : DriveMode::Superposition;
        if (j.contains("hand")) {
            const auto& h = j.at("hand");
            const std::string type = h.value("type", "stationary");
            const double y = h.value("y_hand_m", 0.2);
            if (type == "stationary") {
                cfg.hand_trajectory = stationary_hand(y, h.value("contact_start_s", 0.0),
                                                      h.value("contact_end_s", 1e30));
            } else if (type == "moving") {
                cfg.hand_trajectory =
                    moving_hand(y, h.value("speed_mps", cfg.stroke_speed), h.value("start_x_m", 0.0));
            } else {
                throw ConfigError("session config: hand.type must be 'stationary' or 'moving'");
            }
        }
        if (j.contains("preset"))
            setup.stimulus = preset(j.at("preset").get<std::string>());
        else if (j.contains("stimulus"))
            setup.stimulus = parse_stimulus_spec(j.at("stimulus").dump());
        else
            throw ConfigError("session config: provide either 'preset' or 'stimulus'");
        cfg.validate();
        setup.stimulus.validate();
        return setup;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("session config: schema error: ") + e.what());
    }
}

SessionSetup load_session_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("session config: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_session_config(text.str());
}

}  // namespace umh
