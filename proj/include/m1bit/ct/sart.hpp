// Simultaneous algebraic reconstruction technique with a ray usability mask.
#pragma once

#include <cmath>
#include <stdexcept>

#include "m1bit/core.hpp"
#include "m1bit/ct/geometry.hpp"
#include "m1bit/ct/projector.hpp"

namespace m1bit::ct {

struct SartOptions {
  int iters = 30;       // full sweeps over all views
  double relax = 0.5;   // relaxation, in (0, 2)
};

/// View-by-view SART on the rays where mask is true (mask is flattened
/// view-major like the sinogram). Row/column-sum normalized updates with a
/// non-negativity clamp after each sweep. Views with no usable rays are
/// skipped. x0, when given, seeds the iteration.
inline MatrixXd sart(const MatrixXd& sino, const FanBeamProjector& P, const ArrayXb& mask,
                     const SartOptions& opt = {}, const MatrixXd* x0 = nullptr) {
  const auto& geom = P.geometry();
  const auto& grid = P.grid();
  if (sino.rows() != geom.n_views || sino.cols() != P.n_bins())
    throw std::invalid_argument("sart: sinogram/geometry mismatch");
  if (mask.size() != P.rows()) throw std::invalid_argument("sart: mask size mismatch");
  if (!(opt.relax > 0.0 && opt.relax < 2.0)) throw std::invalid_argument("sart: relax outside (0,2)");

  const Index nb = P.n_bins();
  const Vector<double> row_sums = P.row_sums();

  // Per-view column sums over usable rays (backprojection of masked ones).
  std::vector<Vector<double>> col_sums(static_cast<std::size_t>(geom.n_views));
  std::vector<bool> view_usable(static_cast<std::size_t>(geom.n_views), false);
  Vector<double> ones_masked(nb);
  for (int v = 0; v < geom.n_views; ++v) {
    ones_masked.setZero();
    bool any = false;
    for (Index b = 0; b < nb; ++b)
      if (mask[static_cast<Index>(v) * nb + b] && row_sums[static_cast<Index>(v) * nb + b] > 1e-12) {
        ones_masked[b] = 1.0;
        any = true;
      }
    view_usable[static_cast<std::size_t>(v)] = any;
    if (!any) continue;
    Vector<double> cs = Vector<double>::Zero(P.cols());
    P.backproject_view(ones_masked, v, cs);
    col_sums[static_cast<std::size_t>(v)] = std::move(cs);
  }

  Vector<double> x = x0 ? flatten(*x0) : Vector<double>::Zero(P.cols());
  Vector<double> view_proj(nb), resid(nb);
  for (int sweep = 0; sweep < opt.iters; ++sweep) {
    for (int v = 0; v < geom.n_views; ++v) {
      if (!view_usable[static_cast<std::size_t>(v)]) continue;
      P.forward_view(x, v, view_proj);
      resid.setZero();
      for (Index b = 0; b < nb; ++b) {
        const Index r = static_cast<Index>(v) * nb + b;
        if (mask[r] && row_sums[r] > 1e-12) resid[b] = (sino(v, b) - view_proj[b]) / row_sums[r];
      }
      Vector<double> upd = Vector<double>::Zero(P.cols());
      P.backproject_view(resid, v, upd);
      const Vector<double>& cs = col_sums[static_cast<std::size_t>(v)];
      for (Index k = 0; k < upd.size(); ++k)
        if (cs[k] > 1e-12) x[k] += opt.relax * upd[k] / cs[k];
    }
    x = x.cwiseMax(0.0);  // physical non-negativity, once per sweep
  }
  return unflatten(x, grid.ny, grid.nx);
}

}  // namespace m1bit::ct
