#include "umh/synthesis.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <numbers>
#include <stdexcept>

#include "umh/errors.hpp"

namespace umh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSingularDistance = 1e-9;  // m

double wrap_two_pi(double phase) {
    double w = std::fmod(phase, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;  // the add can land exactly on 2*pi
    return w;
}

double quantize_amplitude(double a) { return std::round(a * 255.0) / 255.0; }

double quantize_phase(double p) {
    const long q = std::lround(p / kTwoPi * 256.0) % 256;
    return static_cast<double>(q) * (kTwoPi / 256.0);
}

void check_frame_args(const FociFrame& frame) {
    if (frame.foci.empty()) throw std::invalid_argument("drive: frame has no foci");
    if (!(frame.amplitude >= 0.0 && frame.amplitude <= 1.0))
        throw std::invalid_argument("drive: frame amplitude outside [0,1]");
}

}  // namespace

std::vector<double> phases_for_focus(const TransducerArray& array, const Vec3& focus) {
    const double k = kTwoPi / wavelength(array.medium);
    std::vector<double> phases(array.size());
    for (std::size_t t = 0; t < array.size(); ++t) {
        const double d = distance(focus, array.poses[t].position);
        if (d < kSingularDistance)
            throw DomainError("phases_for_focus: focus coincides with a transducer");
        phases[t] = wrap_two_pi(-k * d);
    }
    return phases;
}

DriveFrame drive_for_frame(const TransducerArray& array, const FociFrame& frame,
                           const SynthesisOptions& options) {
    check_frame_args(frame);

    const std::size_t n = array.size();
    DriveFrame drive;
    drive.time = frame.time;
    drive.amplitudes.resize(n);
    drive.phases.resize(n);
    const double k = kTwoPi / wavelength(array.medium);

    if (options.mode == DriveMode::Superposition) {
        std::vector<std::complex<double>> sum(n);
        double max_mag = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const Vec3 pos = array.poses[t].position;
            std::complex<double> s{0.0, 0.0};
            for (const auto& focus : frame.foci) {
                const double d = distance(focus, pos);
                if (d < kSingularDistance)
                    throw DomainError("drive: focus coincides with a transducer");
                s += std::polar(1.0, -k * d);
            }
            sum[t] = s;
            max_mag = std::max(max_mag, std::abs(s));
        }
        // Normalizing by the array-wide maximum keeps amplitudes in [0,1] while
        // preserving the relative apodization; the scale cancels out of frame
        // amplitude so scaling stays exactly linear.
        for (std::size_t t = 0; t < n; ++t) {
            drive.amplitudes[t] = max_mag > 0.0 ? std::abs(sum[t]) / max_mag * frame.amplitude : 0.0;
            drive.phases[t] = wrap_two_pi(std::arg(sum[t]));
        }
    } else {
        for (std::size_t t = 0; t < n; ++t) {
            const Vec3 pos = array.poses[t].position;
            double phase_sum = 0.0;
            for (const auto& focus : frame.foci) {
                const double d = distance(focus, pos);
                if (d < kSingularDistance)
                    throw DomainError("drive: focus coincides with a transducer");
                phase_sum += wrap_two_pi(-k * d);
            }
            drive.amplitudes[t] = frame.amplitude;
            drive.phases[t] = wrap_two_pi(phase_sum);
        }
    }

    if (options.quantize_8bit) {
        for (std::size_t t = 0; t < n; ++t) {
            drive.amplitudes[t] = quantize_amplitude(drive.amplitudes[t]);
            drive.phases[t] = quantize_phase(drive.phases[t]);
        }
    }
    return drive;
}

namespace {

std::vector<DriveFrame> stream_impl(const TransducerArray& array,
                                    std::span<const FociFrame> frames,
                                    const SynthesisOptions& options, bool parallel) {
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (!(frames[i].time > frames[i - 1].time))
            throw DomainError("stream_drive: frame timestamps must strictly increase");
    for (const auto& frame : frames) check_frame_args(frame);

    std::vector<DriveFrame> out(frames.size());
    if (!parallel) {
        for (std::size_t i = 0; i < frames.size(); ++i)
            out[i] = drive_for_frame(array, frames[i], options);
        return out;
    }

    std::atomic<bool> failed{false};
    std::exception_ptr error;
    const auto count = static_cast<std::ptrdiff_t>(frames.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
            out[static_cast<std::size_t>(i)] =
                drive_for_frame(array, frames[static_cast<std::size_t>(i)], options);
        } catch (...) {
#pragma omp critical(umh_stream_drive_error)
            {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    }
    if (failed) std::rethrow_exception(error);
    return out;
}

}  // namespace

std::vector<DriveFrame> stream_drive(const TransducerArray& array,
                                     std::span<const FociFrame> frames,
                                     const SynthesisOptions& options) {
    return stream_impl(array, frames, options, true);
}

std::vector<DriveFrame> stream_drive_serial(const TransducerArray& array,
                                            std::span<const FociFrame> frames,
                                            const SynthesisOptions& options) {
    return stream_impl(array, frames, options, false);
}

}  // namespace umh
