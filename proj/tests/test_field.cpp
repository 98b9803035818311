#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "umh/errors.hpp"
#include "umh/field.hpp"
#include "umh/geometry.hpp"
#include "umh/rng.hpp"
#include "umh/stimulus.hpp"
#include "umh/synthesis.hpp"

using namespace umh;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TransducerArray single_transducer() {
    ArrayConfig cfg;
    cfg.unit.cols = 1;
    cfg.unit.rows = 1;
    cfg.unit.gaps.clear();
    cfg.unit_poses = {RigidTransform{}};
    return build_array(cfg);
}

DriveFrame uniform_drive(const TransducerArray& array, double amplitude, double phase) {
    DriveFrame drive;
    drive.amplitudes.assign(array.size(), amplitude);
    drive.phases.assign(array.size(), phase);
    return drive;
}

}  // namespace

TEST_CASE("directivity is 1 on axis and continuous across the series switch") {
    CHECK(directivity(0.0) == 1.0);
    CHECK(directivity(0.5e-4) == doctest::Approx(1.0).epsilon(1e-8));
    // Series and Bessel branches meet smoothly at the 1e-4 crossover.
    CHECK(std::abs(directivity(0.99e-4) - directivity(1.01e-4)) < 1e-9);
    // Spot value: 2*J1(1)/1 = 0.880100...
    CHECK(directivity(1.0) == doctest::Approx(0.8801006).epsilon(1e-6));
}

TEST_CASE("zero drive gives zero pressure") {
    const TransducerArray array = single_transducer();
    const DriveFrame drive = uniform_drive(array, 0.0, 0.0);
    CHECK(std::abs(pressure_at(array, drive, {0.0, 0.2, 0.0})) == 0.0);
}

TEST_CASE("two equidistant in-phase transducers double the pressure on the bisector") {
    ArrayConfig cfg;
    cfg.unit.cols = 2;
    cfg.unit.rows = 1;
    cfg.unit.gaps.clear();
    cfg.unit_poses = {RigidTransform::translate({-cfg.unit.pitch / 2.0, 0.0, 0.0})};
    const TransducerArray pair = build_array(cfg);
    REQUIRE(pair.size() == 2);

    const TransducerArray single = single_transducer();
    const Vec3 probe{0.0, 0.15, 0.0};

    const double two = std::abs(pressure_at(pair, uniform_drive(pair, 1.0, 0.0), probe));
    // Reference: one transducer at the same offset from the probe axis.
    TransducerArray one = single;
    one.poses[0].position = pair.poses[0].position;
    const double lone = std::abs(pressure_at(one, uniform_drive(one, 1.0, 0.0), probe));
    CHECK(two == doctest::Approx(2.0 * lone).epsilon(1e-12));
}

TEST_CASE("reciprocal distance decay on axis") {
    const TransducerArray array = single_transducer();
    const DriveFrame drive = uniform_drive(array, 1.0, 0.0);
    const double near = std::abs(pressure_at(array, drive, {0.0, 0.1, 0.0}));
    const double far = std::abs(pressure_at(array, drive, {0.0, 0.2, 0.0}));
    CHECK(far == doctest::Approx(near / 2.0).epsilon(1e-9));
}

TEST_CASE("focused 1992-transducer field matches the coherent closed form") {
    const TransducerArray array = build_array(ArrayConfig::default_8unit());
    const Vec3 focus{0.0, 0.2, 0.0};
    FociFrame frame;
    frame.foci = {focus};
    frame.amplitude = 1.0;
    const DriveFrame drive = drive_for_frame(array, frame);

    const PistonModel model;
    const double k = kTwoPi / wavelength(array.medium);
    double closed = 0.0;  // sum of per-transducer magnitudes, all phases aligned
    for (std::size_t t = 0; t < array.size(); ++t) {
        const Vec3 r = focus - array.poses[t].position;
        const double d = norm(r);
        const double cos_theta = dot(array.poses[t].normal, r) / d;
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
        closed += drive.amplitudes[t] * model.reference_pressure *
                  directivity(k * model.radius * sin_theta) / d;
    }
    const double simulated = std::abs(pressure_at(array, drive, focus, model));
    CHECK(std::abs(simulated - closed) <= 1e-3 * closed);
}

TEST_CASE("superposition linearity of the field") {
    const TransducerArray array = single_transducer();
    SplitMix64 rng(3);
    for (int iteration = 0; iteration < 10; ++iteration) {
        DriveFrame d1 = uniform_drive(array, 0.3 * rng.uniform01(), rng.uniform01() * kTwoPi);
        DriveFrame d2 = uniform_drive(array, 0.3 * rng.uniform01(), rng.uniform01() * kTwoPi);
        // Complex sum of the two drives, re-expressed as amplitude and phase.
        const std::complex<double> c = std::polar(d1.amplitudes[0], d1.phases[0]) +
                                       std::polar(d2.amplitudes[0], d2.phases[0]);
        DriveFrame dsum = uniform_drive(array, std::abs(c), std::arg(c));
        const Vec3 probe{0.01, 0.17, -0.02};
        const auto p1 = pressure_at(array, d1, probe);
        const auto p2 = pressure_at(array, d2, probe);
        const auto ps = pressure_at(array, dsum, probe);
        CHECK(std::abs(ps - (p1 + p2)) <= 1e-9 * std::max(1.0, std::abs(p1 + p2)));
    }
}

TEST_CASE("translation equivariance") {
    ArrayConfig cfg;
    cfg.unit.cols = 4;
    cfg.unit.rows = 4;
    cfg.unit.gaps.clear();
    cfg.unit_poses = {RigidTransform{}};
    const TransducerArray array = build_array(cfg);
    const DriveFrame drive = uniform_drive(array, 0.8, 1.3);
    const Vec3 probe{0.01, 0.12, 0.02};
    const Vec3 shift{0.013, -0.004, 0.021};

    TransducerArray moved = array;
    for (auto& pose : moved.poses) pose.position += shift;
    const double before = std::abs(pressure_at(array, drive, probe));
    const double after = std::abs(pressure_at(moved, drive, probe + shift));
    CHECK(std::abs(after - before) <= 1e-12 * before);
}

TEST_CASE("grid points and map layout are consistent with pointwise pressure") {
    const TransducerArray array = single_transducer();
    const DriveFrame drive = uniform_drive(array, 1.0, 0.0);
    GridSpec grid = GridSpec::xz_plane({0.0, 0.2, 0.0}, 0.04, 2);
    const FieldMap map = field_map(array, drive, grid);
    REQUIRE(map.pressure.size() == 4);
    for (int iv = 0; iv < 2; ++iv)
        for (int iu = 0; iu < 2; ++iu)
            CHECK(map.at(iu, iv) == pressure_at(array, drive, grid.point(iu, iv)));
}

TEST_CASE("field map does not depend on the worker count") {
#ifdef _OPENMP
    const TransducerArray array = build_array(ArrayConfig::default_8unit());
    FociFrame frame;
    frame.foci = {{0.0, 0.2, 0.0}};
    frame.amplitude = 1.0;
    const DriveFrame drive = drive_for_frame(array, frame);
    const GridSpec grid = GridSpec::xz_plane({0.0, 0.2, 0.0}, 0.02, 11);

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const FieldMap one = field_map(array, drive, grid);
    omp_set_num_threads(saved > 1 ? saved : 2);
    const FieldMap many = field_map(array, drive, grid);
    omp_set_num_threads(saved);
    CHECK(one.pressure == many.pressure);
    CHECK(one.pressure == field_map_serial(array, drive, grid).pressure);
#endif
}

TEST_CASE("grid touching a transducer names the offending point") {
    const TransducerArray array = single_transducer();
    const DriveFrame drive = uniform_drive(array, 1.0, 0.0);
    GridSpec grid = GridSpec::xz_plane({0.0, 0.0, 0.0}, 0.02, 3);  // contains the origin
    CHECK_THROWS_AS(field_map(array, drive, grid), DomainError);
    try {
        field_map(array, drive, grid);
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("(0, 0, 0)") != std::string::npos);
    }
}

TEST_CASE("single focus is the global maximum of its focal-plane map") {
    const TransducerArray array = build_array(ArrayConfig::default_8unit());
    const Vec3 focus{0.0, 0.2, 0.0};
    FociFrame frame;
    frame.foci = {focus};
    frame.amplitude = 1.0;
    const DriveFrame drive = drive_for_frame(array, frame);
    const FieldMap map = field_map(array, drive, GridSpec::xz_plane(focus, 0.06, 31));

    // Grid-search oracle for the global maximum.
    double best = -1.0;
    Vec3 best_point;
    for (int iv = 0; iv < map.grid.nv; ++iv)
        for (int iu = 0; iu < map.grid.nu; ++iu)
            if (std::abs(map.at(iu, iv)) > best) {
                best = std::abs(map.at(iu, iv));
                best_point = map.grid.point(iu, iv);
            }
    CHECK(distance(best_point, focus) <= wavelength(array.medium));
}

TEST_CASE("five-foci frame: every commanded focus is near a local maximum") {
    const TransducerArray array = build_array(ArrayConfig::default_8unit());
    const StimulusSpec spec = preset("S-LM");
    const Vec3 center{0.0, 0.2, 0.0};
    FociFrame frame;
    frame.foci = trajectory_at(spec, center, 0.0);
    frame.amplitude = 1.0;
    const DriveFrame drive = drive_for_frame(array, frame);
    const FieldMap map = field_map(array, drive, GridSpec::xz_plane(center, 0.06, 61));

    const auto metrics = focal_metrics(map, frame.foci, wavelength(array.medium));
    REQUIRE(metrics.size() == 5);
    for (const auto& m : metrics) {
        CHECK(m.focused);
        CHECK(m.offset <= wavelength(array.medium));
        CHECK(m.peak_to_mean > 3.0);
    }
}

TEST_CASE("uniform zero field reports not-focused everywhere") {
    const TransducerArray array = single_transducer();
    const DriveFrame drive = uniform_drive(array, 0.0, 0.0);
    const FieldMap map = field_map(array, drive, GridSpec::xz_plane({0.0, 0.2, 0.0}, 0.04, 11));
    const Vec3 targets[] = {{0.0, 0.2, 0.0}, {0.01, 0.2, -0.01}};
    for (const auto& m : focal_metrics(map, targets, 8.65e-3)) CHECK_FALSE(m.focused);
}

TEST_CASE("targets outside the grid are an argument error") {
    const TransducerArray array = single_transducer();
    const DriveFrame drive = uniform_drive(array, 1.0, 0.0);
    const FieldMap map = field_map(array, drive, GridSpec::xz_plane({0.0, 0.2, 0.0}, 0.04, 11));
    const Vec3 outside[] = {{0.5, 0.2, 0.0}};
    CHECK_THROWS_AS(focal_metrics(map, outside, 8.65e-3), std::invalid_argument);
}

TEST_CASE("radiation force basics") {
    const Medium medium;
    CHECK(radiation_force(0.0, 1e-4, medium) == 0.0);
    const double f1 = radiation_force(1000.0, 1e-4, medium);
    CHECK(radiation_force(2000.0, 1e-4, medium) == 4.0 * f1);  // quadratic, exact
    CHECK(radiation_force(1000.0, 2e-4, medium) == 2.0 * f1);  // linear in area
    CHECK_THROWS_AS(radiation_force(-1.0, 1e-4, medium), std::invalid_argument);
    CHECK_THROWS_AS(radiation_force(1.0, 0.0, medium), std::invalid_argument);
}

TEST_CASE("csv and pgm exports are well formed") {
    const TransducerArray array = single_transducer();
    const DriveFrame drive = uniform_drive(array, 1.0, 0.0);
    const FieldMap map = field_map(array, drive, GridSpec::xz_plane({0.0, 0.2, 0.0}, 0.04, 3));

    std::ostringstream csv;
    write_field_csv(map, csv);
    CHECK(csv.str().rfind("u,v,re,im,abs\n", 0) == 0);

    std::ostringstream pgm(std::ios::binary);
    write_field_pgm(map, pgm);
    const std::string data = pgm.str();
    CHECK(data.rfind("P5\n3 3\n65535\n", 0) == 0);
    CHECK(data.size() == std::string("P5\n3 3\n65535\n").size() + 2 * 9);
}
