// Analytic ellipse-composition phantoms rendered to a pixel grid.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "m1bit/ct/geometry.hpp"

namespace m1bit::ct {

/// Ellipse in physical coordinates (mm); value is attenuation in 1/mm for
/// paint composition or an additive density contribution.
struct Ellipse {
  double cx = 0, cy = 0;     // center
  double a = 1, b = 1;       // semi-axes
  double angle_deg = 0;      // rotation of the a-axis from +x
  double value = 0;
};

enum class Compose { additive, paint };
enum class PhantomKind { knee, head, shepp };

inline bool ellipse_contains(const Ellipse& e, double x, double y) {
  const double phi = e.angle_deg * M_PI / 180.0;
  const double c = std::cos(phi), s = std::sin(phi);
  const double dx = x - e.cx, dy = y - e.cy;
  const double xr = dx * c + dy * s;
  const double yr = -dx * s + dy * c;
  return (xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0;
}

/// Rasterizes an ellipse table by pixel-center membership. An empty table
/// yields the zero image.
inline MatrixXd render_ellipses(const std::vector<Ellipse>& table, const ImageGrid& grid,
                                Compose mode) {
  grid.validate();
  MatrixXd img = MatrixXd::Zero(grid.ny, grid.nx);
  for (Index i = 0; i < grid.ny; ++i) {
    const double y = grid.y_of_row(i);
    for (Index j = 0; j < grid.nx; ++j) {
      const double x = grid.x_of_col(j);
      for (const auto& e : table) {
        if (!ellipse_contains(e, x, y)) continue;
        if (mode == Compose::additive)
          img(i, j) += e.value;
        else
          img(i, j) = e.value;
      }
    }
  }
  return img;
}

// Standard Shepp-Logan table in unit coordinates (densities are additive).
inline std::vector<Ellipse> shepp_logan_unit() {
  return {
      {0.0, 0.0, 0.69, 0.92, 0.0, 2.0},       {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98},
      {0.22, 0.0, 0.11, 0.31, -18.0, -0.02},  {-0.22, 0.0, 0.16, 0.41, 18.0, -0.02},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.01},     {0.0, 0.1, 0.046, 0.046, 0.0, 0.01},
      {0.0, -0.1, 0.046, 0.046, 0.0, 0.01},   {-0.08, -0.605, 0.046, 0.023, 0.0, 0.01},
      {0.0, -0.606, 0.023, 0.023, 0.0, 0.01}, {0.06, -0.605, 0.023, 0.046, 0.0, 0.01},
  };
}

// Head slice: Shepp-Logan interior features inside a thicker skull ring.
inline std::vector<Ellipse> head_unit() {
  auto t = shepp_logan_unit();
  t[0].a = 0.72;
  t[0].b = 0.94;
  t[1].a = 0.63;
  t[1].b = 0.85;
  return t;
}

// Axial knee: two overlapping soft-tissue discs, each with an inner bone
// ellipse and marrow core; mirror-symmetric about the vertical axis. Values
// are attenuation in 1/mm (painted, not additive).
inline std::vector<Ellipse> knee_unit() {
  const double soft = 0.019, bone = 0.038, marrow = 0.013;
  return {
      {-0.40, 0.0, 0.52, 0.52, 0.0, soft}, {0.40, 0.0, 0.52, 0.52, 0.0, soft},
      {-0.40, 0.0, 0.26, 0.34, 0.0, bone}, {0.40, 0.0, 0.26, 0.34, 0.0, bone},
      {-0.40, 0.0, 0.13, 0.18, 0.0, marrow}, {0.40, 0.0, 0.13, 0.18, 0.0, marrow},
  };
}

inline std::vector<Ellipse> scale_table(std::vector<Ellipse> t, double radius, double value_scale) {
  for (auto& e : t) {
    e.cx *= radius;
    e.cy *= radius;
    e.a *= radius;
    e.b *= radius;
    e.value *= value_scale;
  }
  return t;
}

/// Phantom ellipse table in physical units for the given grid; the phantom
/// spans 70% of the shorter grid side, leaving an air margin around the
/// object as in a clinical field of view.
inline std::vector<Ellipse> phantom_ellipses(PhantomKind kind, const ImageGrid& grid) {
  const double radius = 0.35 * static_cast<double>(std::min(grid.nx, grid.ny)) * grid.pixel_size;
  // Shepp-Logan density 1.02 (brain interior) maps to water, 0.02/mm.
  const double sl_scale = 0.02 / 1.02;
  switch (kind) {
    case PhantomKind::shepp:
      return scale_table(shepp_logan_unit(), radius, sl_scale);
    case PhantomKind::head:
      return scale_table(head_unit(), radius, sl_scale);
    case PhantomKind::knee:
      return scale_table(knee_unit(), radius, 1.0);
  }
  throw std::invalid_argument("phantom_ellipses: unknown kind");
}

inline MatrixXd make_phantom(PhantomKind kind, const ImageGrid& grid) {
  const auto table = phantom_ellipses(kind, grid);
  return render_ellipses(table, grid, kind == PhantomKind::knee ? Compose::paint : Compose::additive);
}

inline PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "knee") return PhantomKind::knee;
  if (s == "head") return PhantomKind::head;
  if (s == "shepp") return PhantomKind::shepp;
  throw std::invalid_argument("unknown phantom kind: " + s);
}

}  // namespace m1bit::ct
