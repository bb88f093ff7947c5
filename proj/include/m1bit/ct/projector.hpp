// Matrix-free fan-beam projector with exact per-cell intersection lengths
// (Siddon-style grid traversal). Forward and adjoint share one traversal
// routine, so the pair is transpose-consistent to machine precision.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "m1bit/core.hpp"
#include "m1bit/ct/geometry.hpp"

namespace m1bit::ct {

class FanBeamProjector {
 public:
  FanBeamProjector(const FanBeamGeometry& geom, const ImageGrid& grid)
      : geom_(geom), grid_(grid), nbins_(geom.n_bins()) {
    geom_.validate();
    grid_.validate();
    if (geom_.source_to_isocenter <= grid_.circumradius())
      throw std::invalid_argument("FanBeamProjector: source inside the image grid");
  }

  const FanBeamGeometry& geometry() const { return geom_; }
  const ImageGrid& grid() const { return grid_; }
  Index n_bins() const { return nbins_; }
  Index rows() const { return static_cast<Index>(geom_.n_views) * nbins_; }
  Index cols() const { return grid_.nx * grid_.ny; }

  /// Line integral of every ray: sino[view*n_bins + bin] = sum mu * length.
  Vector<double> apply(const Vector<double>& x) const {
    if (x.size() != cols()) throw std::invalid_argument("FanBeamProjector::apply: size mismatch");
    Vector<double> out = Vector<double>::Zero(rows());
    for (int v = 0; v < geom_.n_views; ++v)
      for (Index b = 0; b < nbins_; ++b) {
        double acc = 0.0;
        trace_ray(v, b, [&](Index cell, double len) { acc += x[cell] * len; });
        out[static_cast<Index>(v) * nbins_ + b] = acc;
      }
    return out;
  }

  /// Exact adjoint of apply (same traversal, scattered).
  Vector<double> adjoint(const Vector<double>& y) const {
    if (y.size() != rows()) throw std::invalid_argument("FanBeamProjector::adjoint: size mismatch");
    Vector<double> out = Vector<double>::Zero(cols());
    for (int v = 0; v < geom_.n_views; ++v)
      for (Index b = 0; b < nbins_; ++b) {
        const double val = y[static_cast<Index>(v) * nbins_ + b];
        if (val == 0.0) continue;
        trace_ray(v, b, [&](Index cell, double len) { out[cell] += val * len; });
      }
    return out;
  }

  void forward_view(const Vector<double>& x, int view, Eigen::Ref<Vector<double>> out) const {
    for (Index b = 0; b < nbins_; ++b) {
      double acc = 0.0;
      trace_ray(view, b, [&](Index cell, double len) { acc += x[cell] * len; });
      out[b] = acc;
    }
  }

  void backproject_view(const Vector<double>& vals, int view, Vector<double>& accum) const {
    for (Index b = 0; b < nbins_; ++b) {
      const double val = vals[b];
      if (val == 0.0) continue;
      trace_ray(view, b, [&](Index cell, double len) { accum[cell] += val * len; });
    }
  }

  /// Per-ray chord length through the grid (forward image of all-ones).
  Vector<double> row_sums() const {
    return apply(Vector<double>::Ones(cols()));
  }

  /// Spectral norm |A|_2 by power iteration on A'A; cached after the first
  /// call (the projector is immutable).
  double op_norm_estimate(int iters = 30) const {
    if (op_norm_ > 0) return op_norm_;
    Vector<double> v = Vector<double>::Constant(cols(), 1.0 / std::sqrt(static_cast<double>(cols())));
    double lam = 0;
    for (int k = 0; k < iters; ++k) {
      Vector<double> w = adjoint(apply(v));
      lam = w.norm();
      if (lam <= 0) return op_norm_ = 0.0;
      v = w / lam;
    }
    return op_norm_ = std::sqrt(lam) * 1.01;
  }

  /// Walks the cells cut by ray (view, bin), calling fn(flat_cell, length_mm).
  template <typename F>
  void trace_ray(int view, Index bin, F&& fn) const {
    const double beta = geom_.view_angle_rad(view);
    const double ex = std::cos(beta), ey = std::sin(beta);
    const double R = geom_.source_to_isocenter, L = geom_.isocenter_to_detector;
    const double sx = R * ex, sy = R * ey;
    const double off = (static_cast<double>(bin) - 0.5 * static_cast<double>(nbins_ - 1)) * geom_.detector_pixel;
    // Detector center opposite the source; bins run along the perpendicular.
    const double dxp = -L * ex - off * ey - sx;
    const double dyp = -L * ey + off * ex - sy;
    const double dn = std::sqrt(dxp * dxp + dyp * dyp);
    const double dirx = dxp / dn, diry = dyp / dn;

    const double h = grid_.pixel_size;
    const double x0 = grid_.x_min(), y0 = grid_.y_min();
    const double x1 = x0 + static_cast<double>(grid_.nx) * h;
    const double y1 = y0 + static_cast<double>(grid_.ny) * h;

    // Slab clipping of [t_lo, t_hi] against the grid box.
    double t_lo = 0.0, t_hi = dn;
    auto clip = [&](double s0, double d, double lo, double hi) {
      if (d == 0.0) return s0 >= lo && s0 <= hi;
      double ta = (lo - s0) / d, tb = (hi - s0) / d;
      if (ta > tb) std::swap(ta, tb);
      t_lo = std::max(t_lo, ta);
      t_hi = std::min(t_hi, tb);
      return true;
    };
    if (!clip(sx, dirx, x0, x1) || !clip(sy, diry, y0, y1) || t_lo >= t_hi) return;

    // Entry cell.
    const double px = sx + t_lo * dirx, py = sy + t_lo * diry;
    auto cell_of = [h](double p, double origin, Index count) {
      auto c = static_cast<Index>(std::floor((p - origin) / h));
      if (c < 0) c = 0;
      if (c >= count) c = count - 1;
      return c;
    };
    Index ix = cell_of(px, x0, grid_.nx);
    Index iy = cell_of(py, y0, grid_.ny);

    const double inf = std::numeric_limits<double>::infinity();
    const Index step_x = dirx > 0 ? 1 : -1;
    const Index step_y = diry > 0 ? 1 : -1;
    const double t_dx = dirx != 0.0 ? h / std::abs(dirx) : inf;
    const double t_dy = diry != 0.0 ? h / std::abs(diry) : inf;
    double t_mx = inf, t_my = inf;
    if (dirx != 0.0) {
      const double bx = x0 + static_cast<double>(dirx > 0 ? ix + 1 : ix) * h;
      t_mx = (bx - sx) / dirx;
    }
    if (diry != 0.0) {
      const double by = y0 + static_cast<double>(diry > 0 ? iy + 1 : iy) * h;
      t_my = (by - sy) / diry;
    }

    double t_cur = t_lo;
    while (true) {
      const double t_next = std::min({t_mx, t_my, t_hi});
      const double len = t_next - t_cur;
      if (len > 0.0) {
        // Matrix row = ny-1-iy (row 0 is the top of the image).
        const Index cell = (grid_.ny - 1 - iy) * grid_.nx + ix;
        fn(cell, len);
      }
      if (t_next >= t_hi) break;
      if (t_mx <= t_my) {
        ix += step_x;
        t_mx += t_dx;
        if (ix < 0 || ix >= grid_.nx) break;
      } else {
        iy += step_y;
        t_my += t_dy;
        if (iy < 0 || iy >= grid_.ny) break;
      }
      t_cur = t_next;
    }
  }

 private:
  FanBeamGeometry geom_;
  ImageGrid grid_;
  Index nbins_;
  mutable double op_norm_ = -1.0;
};

/// Sinogram (n_views x n_bins) of an image.
inline MatrixXd forward_project(const MatrixXd& img, const FanBeamProjector& P) {
  if (img.rows() != P.grid().ny || img.cols() != P.grid().nx)
    throw std::invalid_argument("forward_project: image/grid mismatch");
  return unflatten(P.apply(flatten(img)), P.geometry().n_views, P.n_bins());
}

/// Adjoint of forward_project as an image.
inline MatrixXd back_project(const MatrixXd& sino, const FanBeamProjector& P) {
  if (sino.rows() != P.geometry().n_views || sino.cols() != P.n_bins())
    throw std::invalid_argument("back_project: sinogram/geometry mismatch");
  return unflatten(P.adjoint(flatten(sino)), P.grid().ny, P.grid().nx);
}

}  // namespace m1bit::ct
