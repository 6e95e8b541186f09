#include "lamina/render.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lamina {
namespace {

Complex circle_point(const Angle& a) {
  const double t = 2.0 * std::numbers::pi * a.to_double();
  return Complex(std::cos(t), std::sin(t));
}

// Fixed-width float formatting so equal inputs give byte-equal documents.
std::string fmt(double x) {
  if (x == 0.0) x = 0.0;  // collapse -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

constexpr const char* kPalette[] = {"#2563eb", "#dc2626", "#059669", "#d97706",
                                    "#7c3aed", "#0891b2", "#be185d", "#4d7c0f"};
constexpr std::size_t kPaletteSize = sizeof kPalette / sizeof kPalette[0];

struct Frame {
  double cx, cy, scale;  // disk centre and pixel radius of the unit circle
  double x(Complex p) const { return cx + scale * p.real(); }
  double y(Complex p) const { return cy - scale * p.imag(); }
};

// One SVG path segment along the geodesic from `from` to `to`, assuming the
// pen already sits on `from`.
std::string geodesic_segment(const Angle& from, const Angle& to, const Frame& fr) {
  const Geodesic g = chord_geodesic(from, to);
  if (g.diameter) return "L " + fmt(fr.x(g.b)) + " " + fmt(fr.y(g.b));
  const Complex u = g.a - g.center, v = g.b - g.center;
  const double cross = u.real() * v.imag() - u.imag() * v.real();
  const int sweep = cross < 0.0 ? 1 : 0;  // SVG y runs downward
  const std::string r = fmt(g.radius * fr.scale);
  return "A " + r + " " + r + " 0 0 " + std::to_string(sweep) + " " + fmt(fr.x(g.b)) + " " +
         fmt(fr.y(g.b));
}

std::string class_path(const AngleSet& cls, const Frame& fr) {
  const std::vector<Angle>& pts = cls.elements();
  std::string d = "M " + fmt(fr.x(circle_point(pts[0]))) + " " + fmt(fr.y(circle_point(pts[0])));
  for (std::size_t i = 1; i < pts.size(); ++i)
    d += " " + geodesic_segment(pts[i - 1], pts[i], fr);
  if (pts.size() >= 3) d += " " + geodesic_segment(pts.back(), pts.front(), fr) + " Z";
  return d;
}

void append_classes(std::string& svg, const FiniteLamination& lam, const Frame& fr,
                    double opacity) {
  for (std::size_t i = 0; i < lam.size(); ++i) {
    const AngleSet& cls = lam.class_at(i);
    if (cls.size() < 2) continue;
    const char* color = kPalette[i % kPaletteSize];
    svg += "<path d=\"" + class_path(cls, fr) + "\" fill=\"";
    if (cls.size() >= 3)
      svg += std::string(color) + "\" fill-opacity=\"" + fmt(0.22 * opacity) + "\"";
    else
      svg += "none\"";
    svg += " stroke=\"" + std::string(color) + "\" stroke-width=\"1.4\" stroke-opacity=\"" +
           fmt(0.9 * opacity) + "\"/>\n";
  }
}

void append_labels(std::string& svg, const FiniteLamination& lam, const Frame& fr, int size) {
  for (const AngleSet& cls : lam.classes())
    for (const Angle& a : cls) {
      const Complex p = 1.08 * circle_point(a);
      svg += "<text x=\"" + fmt(fr.cx + fr.scale * p.real()) + "\" y=\"" +
             fmt(fr.cy - fr.scale * p.imag()) +
             "\" font-family=\"monospace\" font-size=\"" + fmt(size / 55.0) +
             "\" text-anchor=\"middle\" dominant-baseline=\"central\" fill=\"#444444\">" +
             a.str() + "</text>\n";
    }
}

std::string svg_open(const SvgStyle& style, Frame& fr) {
  const int size = style.size;
  fr = Frame{size / 2.0, size / 2.0, 0.46 * size};
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) +
                    "\" height=\"" + std::to_string(size) + "\" viewBox=\"0 0 " +
                    std::to_string(size) + " " + std::to_string(size) + "\">\n";
  svg += "<rect width=\"" + std::to_string(size) + "\" height=\"" + std::to_string(size) +
         "\" fill=\"#ffffff\"/>\n";
  svg += "<circle cx=\"" + fmt(fr.cx) + "\" cy=\"" + fmt(fr.cy) + "\" r=\"" + fmt(fr.scale) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  return svg;
}

double bailout(const SchemaPolynomial& f) { return std::max(escape_radius(f), 512.0); }

void shade_smooth(double nu, std::uint8_t* px) {
  const double x = 0.17 * nu;
  for (int k = 0; k < 3; ++k) {
    const double v = 0.5 + 0.5 * std::sin(x + 2.1 * k);
    px[k] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  }
}

void shade_row(const SchemaPolynomial& f, const RasterSpec& spec, int j, Raster& out) {
  const std::size_t vertices = f.schema.size();
  const double h = spec.width / spec.nx;
  const double big = bailout(f);
  const double big2 = big * big;
  const double im = spec.center.imag() + (spec.ny / 2.0 - (j + 0.5)) * h;
  for (std::size_t v0 = 0; v0 < vertices; ++v0)
    for (int i = 0; i < spec.nx; ++i) {
      const double re = spec.center.real() + ((i + 0.5) - spec.nx / 2.0) * h;
      std::size_t v = v0;
      Complex z(re, im);
      int n = 0;
      while (n < spec.max_iter && std::norm(z) <= big2) {
        const auto [next_v, next_z] = evaluate(f, v, z);
        v = next_v;
        z = next_z;
        ++n;
      }
      std::uint8_t* px =
          &out.rgb[3 * (static_cast<std::size_t>(j) * out.width + v0 * spec.nx + i)];
      if (n >= spec.max_iter) {
        px[0] = px[1] = px[2] = 0;
      } else if (spec.coloring == Coloring::binary) {
        px[0] = px[1] = px[2] = 255;
      } else {
        const double delta = static_cast<double>(f.schema.delta[v]);
        const double nu =
            n + 1.0 - std::log(std::log(std::abs(z)) / std::log(big)) / std::log(delta);
        shade_smooth(nu, px);
      }
    }
}

void draw_overlays(const SchemaPolynomial& f, const RasterSpec& spec, Raster& out) {
  const double h = spec.width / spec.nx;
  for (const Overlay& ov : spec.overlays) {
    if (ov.vertex >= f.schema.size())
      throw std::invalid_argument("overlay vertex out of range");
    const int x0 = static_cast<int>(ov.vertex) * spec.nx;
    auto to_px = [&](Complex p, double& x, double& y) {
      x = (p.real() - spec.center.real()) / h + spec.nx / 2.0;
      y = spec.ny / 2.0 - (p.imag() - spec.center.imag()) / h;
    };
    auto plot = [&](double x, double y) {
      const int xi = static_cast<int>(std::floor(x)), yi = static_cast<int>(std::floor(y));
      if (xi < 0 || xi >= spec.nx || yi < 0 || yi >= spec.ny) return;
      std::uint8_t* px =
          &out.rgb[3 * (static_cast<std::size_t>(yi) * out.width + x0 + xi)];
      px[0] = 255;
      px[1] = 214;
      px[2] = 0;
    };
    const double margin = spec.nx;  // segments far outside the panel are skipped
    for (std::size_t k = 1; k < ov.points.size(); ++k) {
      const Complex p = ov.points[k - 1], q = ov.points[k];
      if (!std::isfinite(p.real()) || !std::isfinite(p.imag()) || !std::isfinite(q.real()) ||
          !std::isfinite(q.imag()))
        continue;
      double ax, ay, bx, by;
      to_px(p, ax, ay);
      to_px(q, bx, by);
      if (std::min(ax, bx) > spec.nx + margin || std::max(ax, bx) < -margin ||
          std::min(ay, by) > spec.ny + margin || std::max(ay, by) < -margin)
        continue;
      const int steps =
          1 + static_cast<int>(std::min(std::max(std::abs(bx - ax), std::abs(by - ay)),
                                        4.0 * (spec.nx + spec.ny)));
      for (int s = 0; s <= steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        plot(ax + t * (bx - ax), ay + t * (by - ay));
      }
    }
  }
}

Raster raster_shell(const SchemaPolynomial& f, const RasterSpec& spec) {
  const ValidationReport shape = verify_polynomial(f);
  if (!shape.ok()) throw std::invalid_argument(shape.violations.front().detail);
  if (spec.nx <= 0 || spec.ny <= 0 || !(spec.width > 0.0))
    throw std::invalid_argument("raster viewport must have positive size");
  Raster out;
  out.width = spec.nx * static_cast<int>(f.schema.size());
  out.height = spec.ny;
  out.rgb.assign(3 * static_cast<std::size_t>(out.width) * out.height, 0);
  return out;
}

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v >> 24));
  s.push_back(static_cast<char>(v >> 16));
  s.push_back(static_cast<char>(v >> 8));
  s.push_back(static_cast<char>(v));
}

void png_chunk(std::string& out, const char type[5], const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  out.append(type, 4);
  out += data;
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  if (!data.empty())
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()),
                static_cast<uInt>(data.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

std::uint64_t fnv1a_mix(std::uint64_t h, const void* bytes, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;

}  // namespace

Geodesic chord_geodesic(const Angle& from, const Angle& to) {
  if (from == to) throw std::invalid_argument("a geodesic needs two distinct endpoints");
  Geodesic g;
  g.a = circle_point(from);
  g.b = circle_point(to);
  if (Angle(from.value() + mpq_class(1, 2)) == to) {
    g.diameter = true;
    return g;
  }
  const Complex sum = g.a + g.b;
  g.center = 2.0 * sum / std::norm(sum);
  g.radius = std::sqrt(std::norm(g.center) - 1.0);
  return g;
}

std::string lamination_svg(const FiniteLamination& lam, const SvgStyle& style) {
  Frame fr;
  std::string svg = svg_open(style, fr);
  append_classes(svg, lam, fr, 1.0);
  if (style.labels) append_labels(svg, lam, fr, style.size);
  svg += "</svg>\n";
  return svg;
}

std::string lamination_svg(const PuzzleTower& tower, const SvgStyle& style) {
  Frame fr;
  std::string svg = svg_open(style, fr);
  const int deepest = tower.depth();
  for (int k = deepest; k >= 0; --k) {
    const double opacity = 1.0 - 0.65 * k / std::max(1, deepest);
    append_classes(svg, tower.level(k), fr, opacity);
  }
  if (style.labels) append_labels(svg, tower.level(deepest), fr, style.size);
  svg += "</svg>\n";
  return svg;
}

Raster julia_raster(const SchemaPolynomial& f, const RasterSpec& spec, int workers) {
  Raster out = raster_shell(f, spec);
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
  for (int j = 0; j < spec.ny; ++j) shade_row(f, spec, j, out);
  draw_overlays(f, spec, out);
  return out;
}

Raster julia_raster_reference(const SchemaPolynomial& f, const RasterSpec& spec) {
  Raster out = raster_shell(f, spec);
  for (int j = 0; j < spec.ny; ++j) shade_row(f, spec, j, out);
  draw_overlays(f, spec, out);
  return out;
}

std::string png_bytes(const Raster& raster) {
  if (raster.width <= 0 || raster.height <= 0 ||
      raster.rgb.size() != 3 * static_cast<std::size_t>(raster.width) * raster.height)
    throw std::invalid_argument("raster pixel buffer does not match its dimensions");
  std::string out("\x89PNG\r\n\x1a\n", 8);

  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(raster.width));
  put_u32(ihdr, static_cast<std::uint32_t>(raster.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filtering
  ihdr.push_back(0);   // no interlace
  png_chunk(out, "IHDR", ihdr);

  const std::size_t stride = 3 * static_cast<std::size_t>(raster.width);
  std::string raw;
  raw.reserve((stride + 1) * raster.height);
  for (int j = 0; j < raster.height; ++j) {
    raw.push_back(0);  // filter: none
    raw.append(reinterpret_cast<const char*>(&raster.rgb[j * stride]), stride);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(packed_size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                6) != Z_OK)
    throw std::runtime_error("deflate failed");
  packed.resize(packed_size);
  png_chunk(out, "IDAT", packed);
  png_chunk(out, "IEND", "");
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  return fnv1a_mix(kFnvOffset, bytes.data(), bytes.size());
}

std::uint64_t pixel_hash(const Raster& raster) {
  char head[32];
  const int n = std::snprintf(head, sizeof head, "%dx%d:", raster.width, raster.height);
  std::uint64_t h = fnv1a_mix(kFnvOffset, head, static_cast<std::size_t>(n));
  return fnv1a_mix(h, raster.rgb.data(), raster.rgb.size());
}

}  // namespace lamina
