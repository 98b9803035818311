// Compares the OpenMP kernels against their serial references: drive-frame
// streaming and field-map evaluation. Also asserts that the parallel results
// are bit-identical to serial before trusting the timings.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "umh/field.hpp"
#include "umh/geometry.hpp"
#include "umh/stimulus.hpp"
#include "umh/synthesis.hpp"

using namespace umh;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

bool frames_equal(const std::vector<DriveFrame>& a, const std::vector<DriveFrame>& b) {
    return a == b;
}

bool maps_equal(const FieldMap& a, const FieldMap& b) { return a.pressure == b.pressure; }

}  // namespace

int main(int argc, char** argv) {
    const int frame_count = argc > 1 ? std::atoi(argv[1]) : 1000;

    const TransducerArray array = build_array(ArrayConfig::default_8unit());
    StimulusSpec spec = preset("S-Mix1");
    spec.duration = frame_count / 1000.0;
    const Vec3 center{0.0, 0.2, 0.0};
    const auto foci_frames = render_stimulus(spec, center, 1000.0);

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("array: %zu transducers, %zu frames, %d threads\n", array.size(),
                foci_frames.size(), threads);

    auto t0 = clock_type::now();
    const auto serial_frames = stream_drive_serial(array, foci_frames);
    const double drive_serial_s = seconds_since(t0);

    t0 = clock_type::now();
    const auto parallel_frames = stream_drive(array, foci_frames);
    const double drive_parallel_s = seconds_since(t0);

    if (!frames_equal(serial_frames, parallel_frames)) {
        std::printf("FAIL: stream_drive parallel result differs from serial\n");
        return 1;
    }
    std::printf("stream_drive   serial %8.3f s   openmp %8.3f s   speedup %.2fx   (identical)\n",
                drive_serial_s, drive_parallel_s, drive_serial_s / drive_parallel_s);

    const DriveFrame& drive = serial_frames.front();
    const GridSpec grid = GridSpec::xz_plane(center, 0.10, 101);

    t0 = clock_type::now();
    const FieldMap serial_map = field_map_serial(array, drive, grid);
    const double field_serial_s = seconds_since(t0);

    t0 = clock_type::now();
    const FieldMap parallel_map = field_map(array, drive, grid);
    const double field_parallel_s = seconds_since(t0);

    if (!maps_equal(serial_map, parallel_map)) {
        std::printf("FAIL: field_map parallel result differs from serial\n");
        return 1;
    }
    std::printf("field_map      serial %8.3f s   openmp %8.3f s   speedup %.2fx   (identical)\n",
                field_serial_s, field_parallel_s, field_serial_s / field_parallel_s);
    return 0;
}
