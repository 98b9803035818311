#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "umh/geometry.hpp"
#include "umh/synthesis.hpp"

namespace umh {

/// Far-field baffled-piston radiator model. Pressures are relative: a drive
/// amplitude of 1.0 emits reference_pressure Pa at 1 m on axis, so a single
/// scalar calibrates the whole map to measured units.
struct PistonModel {
    double radius = 4.5e-3;           // piston radius, m
    double reference_pressure = 1.0;  // Pa*m per unit drive
    double absorption = 0.0;          // amplitude attenuation, Np/m (0 = lossless)

    void validate() const;
};

/// Baffled-piston directivity 2*J1(x)/x with D(0)=1; series below |x| < 1e-4.
double directivity(double ka_sin_theta);

/// Planar sampling patch: origin corner plus two orthonormal in-plane axes.
struct GridSpec {
    Vec3 origin;
    Vec3 axis_u;
    Vec3 axis_v;
    double extent_u = 0.1;  // m
    double extent_v = 0.1;  // m
    int nu = 2;
    int nv = 2;

    void validate() const;
    double du() const { return extent_u / (nu - 1); }
    double dv() const { return extent_v / (nv - 1); }
    Vec3 point(int iu, int iv) const {
        return origin + axis_u * (iu * du()) + axis_v * (iv * dv());
    }
    /// Centered patch in the y = center.y plane, axes +x and +z.
    static GridSpec xz_plane(const Vec3& center, double extent, int resolution);
};

struct FieldMap {
    GridSpec grid;
    std::vector<std::complex<double>> pressure;  // iv-major, nu*nv entries

    const std::complex<double>& at(int iu, int iv) const {
        return pressure[static_cast<std::size_t>(iv) * grid.nu + iu];
    }
};

/// Complex pressure at one point: sum over transducers of
/// a_t * P0 * D(k a sin theta) * e^(-alpha d) / d * e^(j(k d + phi_t)).
/// Throws DomainError if the point coincides with a transducer.
std::complex<double> pressure_at(const TransducerArray& array, const DriveFrame& drive,
                                 const Vec3& point, const PistonModel& model = {});

/// pressure_at on every grid point. Parallel over points; bit-identical to the
/// serial reference for any worker count.
FieldMap field_map(const TransducerArray& array, const DriveFrame& drive, const GridSpec& grid,
                   const PistonModel& model = {});
FieldMap field_map_serial(const TransducerArray& array, const DriveFrame& drive,
                          const GridSpec& grid, const PistonModel& model = {});

/// Strict 8-neighbour interior local maxima of |p|, as (iu, iv) pairs.
std::vector<std::pair<int, int>> local_maxima(const FieldMap& map);

struct FocalMetric {
    bool focused = false;      // a local maximum within 3 wavelengths of the target
    Vec3 peak_position;        // grid point of the matched maximum
    double peak_magnitude = 0.0;
    double offset = 0.0;       // distance target -> matched maximum, m
    double peak_to_mean = 0.0; // |p|peak / mean|p| over the map
};

/// Nearest-local-maximum match per target. Targets must project inside the grid.
std::vector<FocalMetric> focal_metrics(const FieldMap& map, std::span<const Vec3> targets,
                                       double wavelength);

/// Plane-reflector radiation force estimate F = 2 p^2 S / (rho c^2) for total
/// reflection; p is the focal pressure amplitude in Pa, S the spot area in m^2.
double radiation_force(double pressure_amplitude, double area, const Medium& medium);

void write_field_csv(const FieldMap& map, std::ostream& out);
void write_field_pgm(const FieldMap& map, std::ostream& out);

}  // namespace umh
