#pragma once

#include <span>
#include <vector>

#include "umh/geometry.hpp"
#include "umh/stimulus.hpp"

namespace umh {

/// Per-transducer drive for one tick. Phases are wrapped to [0, 2*pi).
struct DriveFrame {
    double time = 0.0;
    std::vector<double> amplitudes;  // [0,1] each
    std::vector<double> phases;      // rad

    bool operator==(const DriveFrame&) const = default;
};

/// How multiple foci combine into one drive. Superposition sums the per-focus
/// complex drives and renormalizes (the standard linear synthesis reading);
/// LiteralPhaseSum adds the per-focus phases into a single exponential with
/// uniform amplitude, kept for comparison with the printed formula.
enum class DriveMode { Superposition, LiteralPhaseSum };

struct SynthesisOptions {
    DriveMode mode = DriveMode::Superposition;
    bool quantize_8bit = false;  // mirror 8-bit hardware drivers
};

/// Drive phase -2*pi/lambda * |focus - pos| per transducer, wrapped to [0, 2*pi).
/// All contributions arrive at the focus in phase. Throws DomainError if the
/// focus coincides with a transducer.
std::vector<double> phases_for_focus(const TransducerArray& array, const Vec3& focus);

DriveFrame drive_for_frame(const TransducerArray& array, const FociFrame& frame,
                           const SynthesisOptions& options = {});

/// One DriveFrame per FociFrame, timestamps preserved. Frames must be strictly
/// time-ordered. Parallel over frames; results are identical to the serial
/// reference for any worker count.
std::vector<DriveFrame> stream_drive(const TransducerArray& array,
                                     std::span<const FociFrame> frames,
                                     const SynthesisOptions& options = {});

/// Serial reference implementation of stream_drive, kept for testing and for
/// the benchmark comparison.
std::vector<DriveFrame> stream_drive_serial(const TransducerArray& array,
                                            std::span<const FociFrame> frames,
                                            const SynthesisOptions& options = {});

}  // namespace umh
