#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lamina/angle.hpp"
#include "lamina/lamination.hpp"
#include "lamina/schema.hpp"

namespace lamina {

using Complex = std::complex<double>;

// A polynomial map over a reduced schema: one monic centered polynomial per
// vertex, sending fiber v into fiber sigma(v).  coefficients[v] lists the
// delta(v)-1 lower coefficients of f_v from z^{delta(v)-2} down to the
// constant term; the leading coefficient is 1 and the subleading term is 0.
struct SchemaPolynomial {
  MappingSchema schema;
  std::vector<std::vector<Complex>> coefficients;

  friend bool operator==(const SchemaPolynomial&, const SchemaPolynomial&) = default;
};

// Shape check: schema validity, reduction, and one coefficient list of
// length delta(v)-1 per vertex.
ValidationReport verify_polynomial(const SchemaPolynomial& f);

// Fiberwise application (v, z) -> (sigma(v), f_v(z)).
std::pair<std::size_t, Complex> evaluate(const SchemaPolynomial& f, std::size_t vertex,
                                         Complex z);

// Radius beyond which every fiber escapes monotonically:
// max(2, 1 + max_v sum |coefficients of f_v|).
double escape_radius(const SchemaPolynomial& f);

// Green potential of (vertex, z): lim log|z_n| / (product of fiber degrees
// along the orbit), truncated at max_iter; 0 for points that stay bounded.
double potential(const SchemaPolynomial& f, std::size_t vertex, Complex z, int max_iter = 64);

// Potentials over an nx-by-ny pixel grid covering the square viewport of the
// given center and width (row-major, y from top).  potential_grid runs rows
// concurrently; potential_grid_reference is the plain serial loop kept as a
// comparison oracle.  Both must produce identical values.
struct GridSpec {
  Complex center{0.0, 0.0};
  double width = 4.0;
  int nx = 64;
  int ny = 64;
  int max_iter = 64;
};
std::vector<double> potential_grid(const SchemaPolynomial& f, std::size_t vertex,
                                   const GridSpec& grid, int workers = 0);
std::vector<double> potential_grid_reference(const SchemaPolynomial& f, std::size_t vertex,
                                             const GridSpec& grid);

enum class RayStatus { landed, max_iterations, escaped_tolerance, suspected_parabolic };
std::string to_string(RayStatus status);

// One traced external ray.  points run from the seed radius inward with
// strictly decreasing potentials; landing is set only when successive
// potential-level endpoints met the Cauchy criterion.
struct RayTrace {
  std::size_t vertex = 0;
  Angle angle;
  std::vector<Complex> points;
  std::vector<double> potentials;  // aligned with points
  std::optional<Complex> landing;
  RayStatus status = RayStatus::max_iterations;
};

struct TraceParams {
  double seed_radius = 0.0;   // 0 = escape_radius(f)
  int levels = 128;           // dyadic potential halvings
  int steps_per_level = 4;    // substeps between halvings
  double newton_tol = 1e-12;  // Cauchy threshold on level endpoints
};

// External ray of (vertex, angle), by damped-Newton continuation against
// dyadically decreasing potential targets along the fiber path.  Newton
// breakdown keeps the partial polyline and reports a status; it never
// throws.
RayTrace trace_ray(const SchemaPolynomial& f, std::size_t vertex, const Angle& angle,
                   const TraceParams& params = {});

// Points of potential r on fiber `vertex`, one per equally spaced external
// angle j/samples, each found by the same continuation.
std::vector<Complex> equipotential(const SchemaPolynomial& f, std::size_t vertex, double r,
                                   int samples, const TraceParams& params = {});

// A critical point of one fiber map with its forward orbit prefix.
struct CriticalPoint {
  enum class Classification { escaping, bounded, cycle_detected };

  std::size_t vertex = 0;
  Complex point;
  double residual = 0.0;  // |f_v'(point)| from the root solve
  std::vector<std::pair<std::size_t, Complex>> orbit;
  Classification classification = Classification::bounded;
};
std::vector<CriticalPoint> critical_data(const SchemaPolynomial& f, int max_iter = 256,
                                         double cycle_tol = 1e-9);

// Landing-point clustering of the rays at `angles` on fiber `vertex`.
// Classes are single-linkage clusters at threshold epsilon (singletons
// included); rays that did not land are listed with their statuses, and the
// lamination axioms of the result are reported rather than assumed.
struct SampledLamination {
  FiniteLamination lamination{2, {}};
  std::vector<std::pair<Angle, RayStatus>> unresolved;
  ValidationReport report;
};
SampledLamination sample_lamination(const SchemaPolynomial& f, const AngleSet& angles,
                                    double epsilon, std::size_t vertex = 0,
                                    const TraceParams& params = {});

}  // namespace lamina
