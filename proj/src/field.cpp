#include "umh/field.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "umh/errors.hpp"
#include "umh/io_util.hpp"

namespace umh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSingularDistance = 1e-9;  // m

}  // namespace

void PistonModel::validate() const {
    if (!(radius > 0.0)) throw ConfigError("piston model: radius must be > 0");
    if (!(reference_pressure > 0.0))
        throw ConfigError("piston model: reference_pressure must be > 0");
    if (absorption < 0.0) throw ConfigError("piston model: absorption must be >= 0");
}

double directivity(double x) {
    // 2*J1(x)/x -> 1 - x^2/8 + x^4/192 for small x; avoids the 0/0 at x=0.
    const double ax = std::abs(x);
    if (ax < 1e-4) return 1.0 - x * x / 8.0 + x * x * x * x / 192.0;
    return 2.0 * std::cyl_bessel_j(1.0, ax) / ax;
}

void GridSpec::validate() const {
    if (nu < 2 || nv < 2) throw ConfigError("grid: resolution must be at least 2x2");
    if (!(extent_u > 0.0) || !(extent_v > 0.0)) throw ConfigError("grid: extents must be > 0");
    if (std::abs(norm(axis_u) - 1.0) > 1e-9 || std::abs(norm(axis_v) - 1.0) > 1e-9)
        throw ConfigError("grid: axes must be unit length");
    if (std::abs(dot(axis_u, axis_v)) > 1e-9) throw ConfigError("grid: axes must be orthogonal");
}

GridSpec GridSpec::xz_plane(const Vec3& center, double extent, int resolution) {
    GridSpec g;
    g.origin = {center.x - extent / 2.0, center.y, center.z - extent / 2.0};
    g.axis_u = {1.0, 0.0, 0.0};
    g.axis_v = {0.0, 0.0, 1.0};
    g.extent_u = g.extent_v = extent;
    g.nu = g.nv = resolution;
    return g;
}

namespace {

std::complex<double> pressure_unchecked(const TransducerArray& array, const DriveFrame& drive,
                                        const Vec3& point, const PistonModel& model, double k,
                                        double ka) {
    std::complex<double> p{0.0, 0.0};
    const std::size_t n = array.size();
    for (std::size_t t = 0; t < n; ++t) {
        const Vec3 r = point - array.poses[t].position;
        const double d = norm(r);
        if (d < kSingularDistance) {
            std::ostringstream msg;
            msg << "pressure: evaluation point (" << point.x << ", " << point.y << ", " << point.z
                << ") coincides with transducer " << t;
            throw DomainError(msg.str());
        }
        const double a = drive.amplitudes[t];
        if (a == 0.0) continue;
        const double cos_theta = dot(array.poses[t].normal, r) / d;
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
        double gain = a * model.reference_pressure * directivity(ka * sin_theta) / d;
        if (model.absorption > 0.0) gain *= std::exp(-model.absorption * d);
        p += gain * std::polar(1.0, k * d + drive.phases[t]);
    }
    return p;
}

void check_drive(const TransducerArray& array, const DriveFrame& drive) {
    if (drive.amplitudes.size() != array.size() || drive.phases.size() != array.size())
        throw std::invalid_argument("pressure: drive size does not match the array");
}

}  // namespace

std::complex<double> pressure_at(const TransducerArray& array, const DriveFrame& drive,
                                 const Vec3& point, const PistonModel& model) {
    model.validate();
    check_drive(array, drive);
    const double k = kTwoPi / wavelength(array.medium);
    return pressure_unchecked(array, drive, point, model, k, k * model.radius);
}

namespace {

FieldMap field_map_impl(const TransducerArray& array, const DriveFrame& drive,
                        const GridSpec& grid, const PistonModel& model, bool parallel) {
    model.validate();
    grid.validate();
    check_drive(array, drive);

    FieldMap map;
    map.grid = grid;
    map.pressure.resize(static_cast<std::size_t>(grid.nu) * grid.nv);
    const double k = kTwoPi / wavelength(array.medium);
    const double ka = k * model.radius;

    if (!parallel) {
        for (int iv = 0; iv < grid.nv; ++iv)
            for (int iu = 0; iu < grid.nu; ++iu)
                map.pressure[static_cast<std::size_t>(iv) * grid.nu + iu] =
                    pressure_unchecked(array, drive, grid.point(iu, iv), model, k, ka);
        return map;
    }

    std::atomic<bool> failed{false};
    std::exception_ptr error;
    const auto total = static_cast<std::ptrdiff_t>(map.pressure.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
            const int iu = static_cast<int>(idx % grid.nu);
            const int iv = static_cast<int>(idx / grid.nu);
            map.pressure[static_cast<std::size_t>(idx)] =
                pressure_unchecked(array, drive, grid.point(iu, iv), model, k, ka);
        } catch (...) {
#pragma omp critical(umh_field_map_error)
            {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    }
    if (failed) std::rethrow_exception(error);
    return map;
}

}  // namespace

FieldMap field_map(const TransducerArray& array, const DriveFrame& drive, const GridSpec& grid,
                   const PistonModel& model) {
    return field_map_impl(array, drive, grid, model, true);
}

FieldMap field_map_serial(const TransducerArray& array, const DriveFrame& drive,
                          const GridSpec& grid, const PistonModel& model) {
    return field_map_impl(array, drive, grid, model, false);
}

std::vector<std::pair<int, int>> local_maxima(const FieldMap& map) {
    std::vector<std::pair<int, int>> maxima;
    const GridSpec& g = map.grid;
    for (int iv = 1; iv < g.nv - 1; ++iv) {
        for (int iu = 1; iu < g.nu - 1; ++iu) {
            const double m = std::abs(map.at(iu, iv));
            bool strict = true;
            for (int dv = -1; dv <= 1 && strict; ++dv)
                for (int du = -1; du <= 1; ++du) {
                    if (du == 0 && dv == 0) continue;
                    if (std::abs(map.at(iu + du, iv + dv)) >= m) {
                        strict = false;
                        break;
                    }
                }
            if (strict) maxima.emplace_back(iu, iv);
        }
    }
    return maxima;
}

std::vector<FocalMetric> focal_metrics(const FieldMap& map, std::span<const Vec3> targets,
                                       double wl) {
    map.grid.validate();
    if (!(wl > 0.0)) throw std::invalid_argument("focal_metrics: wavelength must be > 0");

    const GridSpec& g = map.grid;
    for (const auto& target : targets) {
        const Vec3 rel = target - g.origin;
        const double u = dot(rel, g.axis_u), v = dot(rel, g.axis_v);
        if (u < -1e-12 || u > g.extent_u + 1e-12 || v < -1e-12 || v > g.extent_v + 1e-12)
            throw std::invalid_argument("focal_metrics: target outside the grid extent");
    }

    double mean = 0.0;
    for (const auto& p : map.pressure) mean += std::abs(p);
    mean /= static_cast<double>(map.pressure.size());

    const auto maxima = local_maxima(map);
    std::vector<FocalMetric> metrics;
    metrics.reserve(targets.size());
    for (const auto& target : targets) {
        FocalMetric metric;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [iu, iv] : maxima) {
            const Vec3 pos = g.point(iu, iv);
            const double d = distance(pos, target);
            if (d < best) {
                best = d;
                metric.peak_position = pos;
                metric.peak_magnitude = std::abs(map.at(iu, iv));
            }
        }
        if (best <= 3.0 * wl) {
            metric.focused = true;
            metric.offset = best;
            metric.peak_to_mean = mean > 0.0 ? metric.peak_magnitude / mean : 0.0;
        }
        metrics.push_back(metric);
    }
    return metrics;
}

double radiation_force(double pressure_amplitude, double area, const Medium& medium) {
    medium.validate();
    if (pressure_amplitude < 0.0)
        throw std::invalid_argument("radiation_force: pressure must be >= 0");
    if (!(area > 0.0)) throw std::invalid_argument("radiation_force: area must be > 0");
    const double c = medium.speed_of_sound;
    return 2.0 * pressure_amplitude * pressure_amplitude * area / (medium.air_density * c * c);
}

void write_field_csv(const FieldMap& map, std::ostream& out) {
    out << "u,v,re,im,abs\n";
    const GridSpec& g = map.grid;
    for (int iv = 0; iv < g.nv; ++iv) {
        for (int iu = 0; iu < g.nu; ++iu) {
            const auto& p = map.at(iu, iv);
            out << g17(iu * g.du()) << ',' << g17(iv * g.dv()) << ',' << g17(p.real()) << ','
                << g17(p.imag()) << ',' << g17(std::abs(p)) << '\n';
        }
    }
}

void write_field_pgm(const FieldMap& map, std::ostream& out) {
    const GridSpec& g = map.grid;
    double peak = 0.0;
    for (const auto& p : map.pressure) peak = std::max(peak, std::abs(p));
    out << "P5\n" << g.nu << ' ' << g.nv << "\n65535\n";
    for (int iv = 0; iv < g.nv; ++iv) {
        for (int iu = 0; iu < g.nu; ++iu) {
            const double norm01 = peak > 0.0 ? std::abs(map.at(iu, iv)) / peak : 0.0;
            const auto value = static_cast<std::uint16_t>(std::lround(norm01 * 65535.0));
            // PGM 16-bit samples are big-endian.
            out.put(static_cast<char>(value >> 8));
            out.put(static_cast<char>(value & 0xff));
        }
    }
}

}  // namespace umh
