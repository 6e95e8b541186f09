#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lamina/dynamics.hpp"
#include "lamina/lamination.hpp"
#include "lamina/tower.hpp"

namespace lamina {

// The hyperbolic chord between two marked angles: a circular arc meeting the
// unit circle orthogonally, or a straight diameter when the angles are
// antipodal.  Endpoints a and b sit exactly on the unit circle.
struct Geodesic {
  bool diameter = false;
  Complex center;  // unused when diameter
  double radius = 0.0;
  Complex a, b;
};
Geodesic chord_geodesic(const Angle& from, const Angle& to);

struct SvgStyle {
  int size = 800;  // square pixel size
  bool fill_classes = true;
  bool labels = false;
};

// Disk diagram of a lamination: the unit circle plus one geodesic polygon
// per class (a lone chord for pairs).  Identical input and style produce
// byte-identical documents.
std::string lamination_svg(const FiniteLamination& lam, const SvgStyle& style = {});

// All levels of a tower in one diagram; deeper levels draw fainter.
std::string lamination_svg(const PuzzleTower& tower, const SvgStyle& style = {});

enum class Coloring { smooth, binary };

// A polyline drawn on one vertex's panel in dynamical coordinates.
struct Overlay {
  std::size_t vertex = 0;
  std::vector<Complex> points;
};

struct RasterSpec {
  Complex center{0.0, 0.0};
  double width = 4.0;  // viewport side length, shared by all panels
  int nx = 512;
  int ny = 512;
  int max_iter = 128;
  Coloring coloring = Coloring::smooth;
  std::vector<Overlay> overlays;
};

// 8-bit RGB pixels, row-major, one panel per vertex tiled left to right.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
};

// Escape-time rendering of the fiberwise Julia sets.  Rows run concurrently
// (workers = 0 uses every core); the pixel bytes do not depend on the worker
// count.  julia_raster_reference is the serial loop kept as the comparison
// oracle for the parallel kernel.
Raster julia_raster(const SchemaPolynomial& f, const RasterSpec& spec, int workers = 0);
Raster julia_raster_reference(const SchemaPolynomial& f, const RasterSpec& spec);

// Deterministic PNG encoding (8-bit RGB, zlib-compressed).
std::string png_bytes(const Raster& raster);

// FNV-1a 64-bit hashes used to pin golden outputs.
std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t pixel_hash(const Raster& raster);

}  // namespace lamina
