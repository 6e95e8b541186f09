// Times the parallel grid kernels against their serial reference loops and
// checks that both produce identical output.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "lamina/dynamics.hpp"
#include "lamina/render.hpp"

namespace {

using namespace lamina;

double best_of(int repeats, const std::function<void()>& work) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    work();
    const std::chrono::duration<double, std::milli> took =
        std::chrono::steady_clock::now() - start;
    best = std::min(best, took.count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-16s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid kernel benchmark: serial reference vs parallel"};
  int size = 768;
  int workers = 0;
  int repeats = 3;
  app.add_option("--size", size, "grid side length in samples");
  app.add_option("--workers", workers, "threads for the parallel kernels (0 = all cores)");
  app.add_option("--repeat", repeats, "timed repetitions, best kept");
  CLI11_PARSE(app, argc, argv);

  const MappingSchema schema{{"v0"}, {0}, {2}, {}};
  const SchemaPolynomial basilica{schema, {{Complex(-1.0, 0.0)}}};
  const SchemaPolynomial quartic{MappingSchema{{"v0"}, {0}, {4}, {}},
                                 {{Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(-1.0, 0.0)}}};

  GridSpec grid;
  grid.nx = size;
  grid.ny = size;
  grid.max_iter = 64;
  std::vector<double> serial_grid, parallel_grid;
  const double potential_serial =
      best_of(repeats, [&] { serial_grid = potential_grid_reference(basilica, 0, grid); });
  const double potential_parallel =
      best_of(repeats, [&] { parallel_grid = potential_grid(basilica, 0, grid, workers); });
  report("potential_grid", potential_serial, potential_parallel, serial_grid == parallel_grid);

  RasterSpec raster;
  raster.nx = size;
  raster.ny = size;
  raster.max_iter = 128;
  Raster serial_raster, parallel_raster;
  const double julia_serial =
      best_of(repeats, [&] { serial_raster = julia_raster_reference(quartic, raster); });
  const double julia_parallel =
      best_of(repeats, [&] { parallel_raster = julia_raster(quartic, raster, workers); });
  report("julia_raster", julia_serial, julia_parallel,
         serial_raster.rgb == parallel_raster.rgb);

  return serial_grid == parallel_grid && serial_raster.rgb == parallel_raster.rgb ? 0 : 1;
}
