#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "umh/errors.hpp"
#include "umh/geometry.hpp"
#include "umh/rng.hpp"
#include "umh/stimulus.hpp"
#include "umh/synthesis.hpp"

using namespace umh;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TransducerArray small_array() {
    ArrayConfig cfg;
    cfg.unit.cols = 6;
    cfg.unit.rows = 6;
    cfg.unit.gaps.clear();
    cfg.unit_poses = {RigidTransform::translate(
        {-2.5 * cfg.unit.pitch, 0.0, -2.5 * cfg.unit.pitch})};
    return build_array(cfg);
}

double angular_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

}  // namespace

TEST_CASE("a transducer one wavelength from the focus gets phase 0") {
    ArrayConfig cfg;
    cfg.unit.cols = 1;
    cfg.unit.rows = 1;
    cfg.unit.gaps.clear();
    cfg.unit_poses = {RigidTransform{}};
    const TransducerArray array = build_array(cfg);
    const double lambda = wavelength(array.medium);  // 8.65 mm at the defaults
    const auto phases = phases_for_focus(array, {0.0, lambda, 0.0});
    CHECK(angular_gap(phases[0], 0.0) <= 1e-9);
}

TEST_CASE("on-axis transducer at 0.2 m matches the cycle-fraction oracle") {
    ArrayConfig cfg;
    cfg.unit.cols = 1;
    cfg.unit.rows = 1;
    cfg.unit.gaps.clear();
    cfg.unit_poses = {RigidTransform{}};
    const TransducerArray array = build_array(cfg);

    // 0.2 m at c=346, f=40 kHz is 8000/346 = 23 + 42/346 cycles, so the wrapped
    // drive phase is 2*pi*(1 - 42/346) = 5.5207... rad.
    const double expected = kTwoPi * (1.0 - 42.0 / 346.0);
    const auto phases = phases_for_focus(array, {0.0, 0.2, 0.0});
    CHECK(std::abs(phases[0] - expected) <= 1e-9);
    CHECK(phases[0] == doctest::Approx(5.52).epsilon(1e-3));
}

TEST_CASE("equidistant transducers get identical phases") {
    const TransducerArray array = small_array();
    const auto phases = phases_for_focus(array, {0.0, 0.2, 0.0});
    // The 6x6 grid is symmetric about the focus axis: mirror columns match.
    for (int row = 0; row < 6; ++row)
        for (int col = 0; col < 3; ++col)
            CHECK(phases[row * 6 + col] ==
                  doctest::Approx(phases[row * 6 + (5 - col)]).epsilon(1e-12));
}

TEST_CASE("phases are wrapped into [0, 2pi)") {
    const TransducerArray array = build_array(ArrayConfig::default_8unit());
    const auto phases = phases_for_focus(array, {0.01, 0.2, -0.02});
    for (double p : phases) {
        CHECK(p >= 0.0);
        CHECK(p < kTwoPi);
    }
}

TEST_CASE("focus on a transducer is a singularity error") {
    const TransducerArray array = small_array();
    CHECK_THROWS_AS(phases_for_focus(array, array.poses[3].position), DomainError);
}

TEST_CASE("focus coherence: contributions align at the focus") {
    const TransducerArray array = build_array(ArrayConfig::default_8unit());
    const Vec3 focus{0.0, 0.2, 0.0};
    const auto phases = phases_for_focus(array, focus);
    const double k = kTwoPi / wavelength(array.medium);

    std::complex<double> sum{0.0, 0.0};
    double coherent = 0.0;
    for (std::size_t t = 0; t < array.size(); ++t) {
        const double d = distance(focus, array.poses[t].position);
        sum += std::polar(1.0 / d, k * d + phases[t]);
        coherent += 1.0 / d;
    }
    CHECK(std::abs(sum) >= coherent * 0.999);
    CHECK(std::abs(sum) <= coherent * 1.001);
}

TEST_CASE("modes agree for a single focus") {
    const TransducerArray array = small_array();
    SplitMix64 rng(5);
    for (int iteration = 0; iteration < 20; ++iteration) {
        FociFrame frame;
        frame.time = 0.0;
        frame.foci = {{rng.uniform01() * 0.05 - 0.025, 0.1 + rng.uniform01() * 0.2,
                       rng.uniform01() * 0.05 - 0.025}};
        frame.amplitude = rng.uniform01();
        const DriveFrame sup = drive_for_frame(array, frame, {DriveMode::Superposition, false});
        const DriveFrame lit = drive_for_frame(array, frame, {DriveMode::LiteralPhaseSum, false});
        const auto phases = phases_for_focus(array, frame.foci[0]);
        for (std::size_t t = 0; t < array.size(); ++t) {
            CHECK(sup.amplitudes[t] == doctest::Approx(frame.amplitude).epsilon(1e-12));
            CHECK(lit.amplitudes[t] == frame.amplitude);
            CHECK(angular_gap(sup.phases[t], phases[t]) <= 1e-9);
            CHECK(lit.phases[t] == phases[t]);
        }
    }
}

TEST_CASE("zero envelope silences every transducer") {
    const TransducerArray array = small_array();
    FociFrame frame;
    frame.foci = {{0.0, 0.2, 0.0}, {0.002, 0.2, 0.0}};
    frame.amplitude = 0.0;
    const DriveFrame drive = drive_for_frame(array, frame);
    for (double a : drive.amplitudes) CHECK(a == 0.0);
}

TEST_CASE("drive amplitudes are legal and scale linearly") {
    const TransducerArray array = small_array();
    SplitMix64 rng(11);
    for (int iteration = 0; iteration < 20; ++iteration) {
        const StimulusSpec spec = preset("S-LM");
        FociFrame frame;
        frame.foci = trajectory_at(spec, {0.0, 0.15 + rng.uniform01() * 0.1, 0.0},
                                   rng.uniform01());
        frame.amplitude = rng.uniform01();
        const DriveFrame drive = drive_for_frame(array, frame);
        for (double a : drive.amplitudes) {
            CHECK(a >= 0.0);
            CHECK(a <= 1.0);
        }

        FociFrame half = frame;
        half.amplitude = frame.amplitude * 0.5;
        const DriveFrame half_drive = drive_for_frame(array, half);
        for (std::size_t t = 0; t < array.size(); ++t)
            CHECK(half_drive.amplitudes[t] == 0.5 * drive.amplitudes[t]);
    }
}

TEST_CASE("empty foci list is an argument error") {
    const TransducerArray array = small_array();
    FociFrame frame;
    frame.amplitude = 0.5;
    CHECK_THROWS_AS(drive_for_frame(array, frame), std::invalid_argument);
}

TEST_CASE("stream preserves count and timestamps and is bit-deterministic") {
    const TransducerArray array = small_array();
    const auto foci = render_stimulus(preset("S-Mix1"), {0.0, 0.2, 0.0}, 1000.0);
    REQUIRE(foci.size() == 1000);

    const auto a = stream_drive(array, foci);
    const auto b = stream_drive(array, foci);
    const auto serial = stream_drive_serial(array, foci);
    REQUIRE(a.size() == foci.size());
    CHECK(a == b);
    CHECK(a == serial);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].time == foci[i].time);
}

TEST_CASE("stream results do not depend on the worker count") {
#ifdef _OPENMP
    const TransducerArray array = small_array();
    const auto foci = render_stimulus(preset("S-30Hz"), {0.0, 0.2, 0.0}, 500.0);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = stream_drive(array, foci);
    omp_set_num_threads(saved > 1 ? saved : 2);
    const auto many = stream_drive(array, foci);
    omp_set_num_threads(saved);
    CHECK(one == many);
#endif
}

TEST_CASE("non-monotone timestamps are an ordering error") {
    const TransducerArray array = small_array();
    auto foci = render_stimulus(preset("S-LM"), {0.0, 0.2, 0.0}, 1000.0);
    std::swap(foci[10].time, foci[11].time);
    CHECK_THROWS_AS(stream_drive(array, foci), DomainError);
}

TEST_CASE("8-bit quantization lands on the 256-step grids") {
    const TransducerArray array = small_array();
    FociFrame frame;
    frame.foci = {{0.003, 0.2, -0.001}};
    frame.amplitude = 0.7319;
    const DriveFrame drive = drive_for_frame(array, frame, {DriveMode::Superposition, true});
    for (std::size_t t = 0; t < array.size(); ++t) {
        const double steps_a = drive.amplitudes[t] * 255.0;
        CHECK(std::abs(steps_a - std::round(steps_a)) <= 1e-9);
        const double steps_p = drive.phases[t] / (kTwoPi / 256.0);
        CHECK(std::abs(steps_p - std::round(steps_p)) <= 1e-9);
    }
}
