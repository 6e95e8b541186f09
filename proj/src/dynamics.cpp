#include "lamina/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lamina {
namespace {

constexpr double kBigModulus = 1e8;  // past this, log|z_n|/D_n has converged

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// f_v(z) and optionally f_v'(z) for the monic centered coefficient list.
Complex fiber_eval(const std::vector<Complex>& c, Complex z, Complex* deriv = nullptr) {
  const int delta = static_cast<int>(c.size()) + 1;
  Complex p = 1.0, dp = 0.0;
  for (int power = delta - 1; power >= 0; --power) {
    dp = dp * z + p;
    p = p * z;
    if (power <= delta - 2) p += c[static_cast<std::size_t>(delta - 2 - power)];
  }
  if (deriv) *deriv = dp;
  return p;
}

Complex unit(const Angle& a) {
  const double t = 2.0 * std::numbers::pi * a.to_double();
  return Complex(std::cos(t), std::sin(t));
}

// The forward data of one ray: vertices, exact angles and degree products
// along the fiber path, long enough for every continuation target.
struct FiberPath {
  std::vector<std::size_t> vertex;
  std::vector<Angle> angle;
  std::vector<double> degree_product;
};

FiberPath fiber_path(const SchemaPolynomial& f, std::size_t vertex, const Angle& angle,
                     int length) {
  FiberPath path;
  path.vertex.push_back(vertex);
  path.angle.push_back(angle);
  path.degree_product.push_back(1.0);
  for (int j = 0; j < length; ++j) {
    const std::size_t v = path.vertex.back();
    const int delta = f.schema.delta[v];
    path.vertex.push_back(f.schema.sigma[v]);
    path.angle.push_back(map_d(path.angle.back(), delta));
    path.degree_product.push_back(path.degree_product.back() * delta);
  }
  return path;
}

// Newton continuation core: solve f_{v_{n-1}} o ... o f_{v_0}(z) = target,
// seeded at `seed`.  Returns false on breakdown (non-finite values or no
// convergence), leaving z at the best iterate.
bool newton_solve(const SchemaPolynomial& f, const FiberPath& path, int n, Complex target,
                  Complex seed, Complex& z) {
  z = seed;
  for (int it = 0; it < 48; ++it) {
    Complex value = z, deriv = 1.0;
    for (int j = 0; j < n; ++j) {
      Complex d;
      const Complex next = fiber_eval(f.coefficients[path.vertex[static_cast<std::size_t>(j)]],
                                      value, &d);
      deriv *= d;
      value = next;
      if (!finite(value)) break;
    }
    if (!finite(value)) {
      // A wild seed: pull halfway back and retry.
      z = seed + 0.5 * (z - seed);
      continue;
    }
    const Complex residual = value - target;
    if (std::abs(residual) <= 1e-12 * (1.0 + std::abs(target))) return true;
    Complex step = residual / deriv;
    if (!finite(step)) return std::abs(residual) <= 1e-9 * (1.0 + std::abs(target));
    // Damp oversized steps; near the Julia set genuine steps are tiny.
    const double cap = 0.5 * (1.0 + std::abs(z));
    if (std::abs(step) > cap) step *= cap / std::abs(step);
    z -= step;
    // Rounding injected mid-orbit and divided by small derivative factors
    // (orbits grazing a critical point) floors the step size near 1e-14;
    // accept an order of magnitude above that floor.
    if (std::abs(step) <= 1e-13 * (1.0 + std::abs(z))) return true;
  }
  return false;
}

struct ContinuationState {
  Complex z;
  int n = 0;  // iterations currently needed to reach the asymptotic zone
};

// One continuation move to potential t along a prepared path.  Picks the
// smallest n with degree_product[n] * t >= far_potential and Newton-solves
// F_n(z) = exp(D_n t) e(theta_n) from the previous point.
bool continue_to(const SchemaPolynomial& f, const FiberPath& path, double far_potential,
                 double t, ContinuationState& state) {
  while (state.n + 1 < static_cast<int>(path.degree_product.size()) &&
         path.degree_product[static_cast<std::size_t>(state.n)] * t < far_potential)
    ++state.n;
  const double scaled = path.degree_product[static_cast<std::size_t>(state.n)] * t;
  const Complex target =
      std::exp(scaled) * unit(path.angle[static_cast<std::size_t>(state.n)]);
  Complex solved;
  if (!newton_solve(f, path, state.n, target, state.z, solved)) return false;
  state.z = solved;
  return true;
}

}  // namespace

ValidationReport verify_polynomial(const SchemaPolynomial& f) {
  ValidationReport report = validate_schema(f.schema);
  if (!report.ok()) return report;
  if (!is_reduced(f.schema))
    report.add("reduced", "every fiber of a schema polynomial must have degree >= 2");
  if (f.coefficients.size() != f.schema.size()) {
    report.add("coefficient-shape", "one coefficient list per vertex is required");
    return report;
  }
  for (std::size_t v = 0; v < f.schema.size(); ++v)
    if (static_cast<int>(f.coefficients[v].size()) != f.schema.delta[v] - 1)
      report.add("coefficient-shape",
                 f.schema.vertices[v] + " needs " + std::to_string(f.schema.delta[v] - 1) +
                     " coefficients, has " + std::to_string(f.coefficients[v].size()));
  return report;
}

std::pair<std::size_t, Complex> evaluate(const SchemaPolynomial& f, std::size_t vertex,
                                         Complex z) {
  if (!finite(z)) throw std::invalid_argument("evaluate: non-finite input");
  return {f.schema.sigma.at(vertex), fiber_eval(f.coefficients.at(vertex), z)};
}

double escape_radius(const SchemaPolynomial& f) {
  double radius = 2.0;
  for (const std::vector<Complex>& c : f.coefficients) {
    double sum = 1.0;
    for (const Complex& coeff : c) sum += std::abs(coeff);
    radius = std::max(radius, sum);
  }
  return radius;
}

double potential(const SchemaPolynomial& f, std::size_t vertex, Complex z, int max_iter) {
  double degree_product = 1.0;
  std::size_t v = vertex;
  Complex w = z;
  for (int it = 0; it < max_iter; ++it) {
    const double modulus = std::abs(w);
    if (!std::isfinite(modulus) || modulus > kBigModulus)
      return std::log(modulus) / degree_product;
    degree_product *= f.schema.delta[v];
    w = fiber_eval(f.coefficients[v], w);
    v = f.schema.sigma[v];
  }
  return 0.0;
}

std::vector<double> potential_grid(const SchemaPolynomial& f, std::size_t vertex,
                                   const GridSpec& grid, int workers) {
  std::vector<double> out(static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny));
  const double dx = grid.width / grid.nx;
  const double height = dx * grid.ny;
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
#else
  (void)workers;
#endif
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Complex z(grid.center.real() - 0.5 * grid.width + (i + 0.5) * dx,
                      grid.center.imag() + 0.5 * height - (j + 0.5) * dx);
      out[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.nx) +
          static_cast<std::size_t>(i)] = potential(f, vertex, z, grid.max_iter);
    }
  return out;
}

std::vector<double> potential_grid_reference(const SchemaPolynomial& f, std::size_t vertex,
                                             const GridSpec& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny));
  const double dx = grid.width / grid.nx;
  const double height = dx * grid.ny;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Complex z(grid.center.real() - 0.5 * grid.width + (i + 0.5) * dx,
                      grid.center.imag() + 0.5 * height - (j + 0.5) * dx);
      out[static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.nx) +
          static_cast<std::size_t>(i)] = potential(f, vertex, z, grid.max_iter);
    }
  return out;
}

std::string to_string(RayStatus status) {
  switch (status) {
    case RayStatus::landed: return "landed";
    case RayStatus::max_iterations: return "max-iter";
    case RayStatus::escaped_tolerance: return "escaped-tolerance";
    case RayStatus::suspected_parabolic: return "suspected-parabolic";
  }
  return "unknown";
}

RayTrace trace_ray(const SchemaPolynomial& f, std::size_t vertex, const Angle& angle,
                   const TraceParams& params) {
  RayTrace ray;
  ray.vertex = vertex;
  ray.angle = angle;

  const double seed_radius =
      params.seed_radius > 0 ? params.seed_radius : std::max(escape_radius(f), 1e6);
  const double far = std::log(seed_radius);
  const FiberPath path = fiber_path(f, vertex, angle, params.levels + 2);

  ContinuationState state{seed_radius * unit(angle), 0};
  ray.points.push_back(state.z);
  ray.potentials.push_back(far);

  Complex level_end = state.z;
  std::vector<double> level_gaps;
  const int total = params.levels * params.steps_per_level;
  for (int m = 1; m <= total; ++m) {
    const double t = far * std::exp2(-static_cast<double>(m) / params.steps_per_level);
    ContinuationState attempt = state;
    if (!continue_to(f, path, far, t, attempt)) {
      ray.status = finite(attempt.z) ? RayStatus::max_iterations : RayStatus::escaped_tolerance;
      return ray;
    }
    state = attempt;
    ray.points.push_back(state.z);
    ray.potentials.push_back(t);
    if (m % params.steps_per_level == 0) {
      const double gap = std::abs(state.z - level_end);
      level_end = state.z;
      level_gaps.push_back(gap);
      if (gap <= params.newton_tol) {
        ray.landing = state.z;
        ray.status = RayStatus::landed;
        return ray;
      }
    }
  }

  // Levels exhausted.  Steadily shrinking gaps that never met the Cauchy
  // criterion point at slow (parabolic-like) landing.
  const std::size_t window = 8;
  bool shrinking = level_gaps.size() >= window;
  for (std::size_t i = level_gaps.size() >= window ? level_gaps.size() - window + 1 : 1;
       shrinking && i < level_gaps.size(); ++i)
    shrinking = level_gaps[i] < level_gaps[i - 1];
  ray.status = (shrinking && level_gaps.back() < 1e-3) ? RayStatus::suspected_parabolic
                                                       : RayStatus::max_iterations;
  return ray;
}

std::vector<Complex> equipotential(const SchemaPolynomial& f, std::size_t vertex, double r,
                                   int samples, const TraceParams& params) {
  if (r <= 0 || samples <= 0) throw std::invalid_argument("equipotential: r and samples > 0");
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(samples));
  const double seed_radius =
      params.seed_radius > 0 ? params.seed_radius : std::max(escape_radius(f), 1e6);
  const double far = std::log(seed_radius);
  for (int j = 0; j < samples; ++j) {
    const Angle theta(j, samples);
    const FiberPath path = fiber_path(f, vertex, theta, params.levels + 2);
    ContinuationState state{seed_radius * unit(theta), 0};
    bool ok = true;
    for (int m = 1; ok && m <= params.levels * params.steps_per_level; ++m) {
      const double t = far * std::exp2(-static_cast<double>(m) / params.steps_per_level);
      if (t <= r) break;
      ok = continue_to(f, path, far, t, state);
    }
    if (ok) ok = continue_to(f, path, far, r, state);
    if (!ok) throw std::runtime_error("equipotential: continuation broke down at angle " +
                                      theta.str());
    out.push_back(state.z);
  }
  return out;
}

std::vector<CriticalPoint> critical_data(const SchemaPolynomial& f, int max_iter,
                                         double cycle_tol) {
  std::vector<CriticalPoint> out;
  const double radius = escape_radius(f);
  for (std::size_t v = 0; v < f.schema.size(); ++v) {
    const int delta = f.schema.delta[v];
    // Monic form of f_v'/delta: z^{delta-1} + sum (k/delta) c_{...} z^{k-1}.
    std::vector<Complex> monic(static_cast<std::size_t>(delta - 1), Complex(0.0));
    for (int power = delta - 2; power >= 1; --power)
      monic[static_cast<std::size_t>(delta - 1 - power)] =
          f.coefficients[v][static_cast<std::size_t>(delta - 2 - power)] *
          (static_cast<double>(power) / delta);
    // Durand-Kerner with the standard deterministic start.
    double scale = 1.0;
    for (const Complex& b : monic) scale = std::max(scale, std::abs(b));
    std::vector<Complex> roots(static_cast<std::size_t>(delta - 1));
    const Complex spread(0.4, 0.9);
    Complex power = 1.0;
    for (Complex& root : roots) {
      power *= spread;
      root = power * (1.0 + scale);
    }
    auto eval_monic = [&](Complex z) {
      Complex p = 1.0;
      for (const Complex& b : monic) p = p * z + b;
      return p;
    };
    for (int it = 0; it < 400; ++it) {
      double moved = 0.0;
      for (std::size_t i = 0; i < roots.size(); ++i) {
        Complex denom = 1.0;
        for (std::size_t j = 0; j < roots.size(); ++j)
          if (j != i) denom *= roots[i] - roots[j];
        const Complex step = eval_monic(roots[i]) / denom;
        if (finite(step)) roots[i] -= step;
        moved = std::max(moved, std::abs(step));
      }
      if (moved < 1e-14 * (1.0 + scale)) break;
    }
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });

    for (const Complex& root : roots) {
      CriticalPoint entry;
      entry.vertex = v;
      entry.point = root;
      Complex deriv;
      fiber_eval(f.coefficients[v], root, &deriv);
      entry.residual = std::abs(deriv);
      std::size_t at = v;
      Complex z = root;
      entry.orbit.push_back({at, z});
      entry.classification = CriticalPoint::Classification::bounded;
      for (int it = 0; it < max_iter; ++it) {
        z = fiber_eval(f.coefficients[at], z);
        at = f.schema.sigma[at];
        entry.orbit.push_back({at, z});
        if (!finite(z) || std::abs(z) > radius) {
          entry.classification = CriticalPoint::Classification::escaping;
          break;
        }
        bool cycled = false;
        for (std::size_t k = 0; k + 1 < entry.orbit.size() && !cycled; ++k)
          cycled = entry.orbit[k].first == at && std::abs(entry.orbit[k].second - z) <= cycle_tol;
        if (cycled) {
          entry.classification = CriticalPoint::Classification::cycle_detected;
          break;
        }
      }
      out.push_back(std::move(entry));
    }
  }
  return out;
}

SampledLamination sample_lamination(const SchemaPolynomial& f, const AngleSet& angles,
                                    double epsilon, std::size_t vertex,
                                    const TraceParams& params) {
  SampledLamination out;
  std::vector<Angle> landed;
  std::vector<Complex> landings;
  for (const Angle& a : angles) {
    const RayTrace ray = trace_ray(f, vertex, a, params);
    if (ray.status == RayStatus::landed) {
      landed.push_back(a);
      landings.push_back(*ray.landing);
    } else {
      out.unresolved.push_back({a, ray.status});
    }
  }

  // Single-linkage clusters at threshold epsilon.
  std::vector<std::size_t> parent(landed.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < landed.size(); ++i)
    for (std::size_t j = i + 1; j < landed.size(); ++j)
      if (std::abs(landings[i] - landings[j]) <= epsilon) parent[find(i)] = find(j);

  std::vector<std::vector<Angle>> groups(landed.size());
  for (std::size_t i = 0; i < landed.size(); ++i)
    groups[find(i)].push_back(landed[i]);
  std::vector<AngleSet> classes;
  for (std::vector<Angle>& group : groups)
    if (!group.empty()) classes.push_back(AngleSet(std::move(group)));

  out.lamination = FiniteLamination(f.schema.delta.at(vertex), classes);
  out.report = verify_lamination(out.lamination);
  return out;
}

}  // namespace lamina
