// Fan-beam acquisition geometry and the reconstruction grid.
#pragma once

#include <cmath>
#include <stdexcept>

#include "m1bit/core.hpp"

namespace m1bit::ct {

/// Flat equal-spaced detector fan-beam trajectory. Angles are measured at the
/// isocenter; the source sits at source_to_isocenter * (cos b, sin b).
struct FanBeamGeometry {
  double source_to_isocenter = 750.0;  // mm
  double isocenter_to_detector = 450.0;
  int n_views = 360;
  double angular_step_deg = 1.0;
  double detector_length = 620.0;  // mm
  double detector_pixel = 1.0;     // mm

  int n_bins() const {
    return static_cast<int>(std::lround(detector_length / detector_pixel));
  }
  double view_angle_rad(int v) const { return v * angular_step_deg * M_PI / 180.0; }

  void validate() const {
    if (source_to_isocenter <= 0 || isocenter_to_detector <= 0)
      throw std::invalid_argument("FanBeamGeometry: distances must be positive");
    if (n_views < 1 || detector_length <= 0 || detector_pixel <= 0)
      throw std::invalid_argument("FanBeamGeometry: bad detector/view setup");
  }
};

/// Square-pixel image grid centered on the isocenter; values are attenuation
/// coefficients in 1/mm. Row 0 is the top of the image (largest y).
struct ImageGrid {
  Index nx = 256;
  Index ny = 256;
  double pixel_size = 1.0;  // mm

  void validate() const {
    if (nx < 1 || ny < 1 || pixel_size <= 0)
      throw std::invalid_argument("ImageGrid: bad dimensions");
  }
  double x_min() const { return -0.5 * static_cast<double>(nx) * pixel_size; }
  double y_min() const { return -0.5 * static_cast<double>(ny) * pixel_size; }
  double x_of_col(Index j) const { return (static_cast<double>(j) - 0.5 * static_cast<double>(nx - 1)) * pixel_size; }
  double y_of_row(Index i) const { return (0.5 * static_cast<double>(ny - 1) - static_cast<double>(i)) * pixel_size; }
  /// Half-diagonal of the grid; bounds any chord through the image.
  double circumradius() const {
    return 0.5 * pixel_size * std::sqrt(static_cast<double>(nx * nx + ny * ny));
  }
};

/// Row-major flattening (view-major for sinograms, row-major for images).
inline VectorXd flatten(const MatrixXd& m) {
  VectorXd v(m.size());
  Index k = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) v[k++] = m(i, j);
  return v;
}

inline MatrixXd unflatten(const VectorXd& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("unflatten: size mismatch");
  MatrixXd m(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = v[k++];
  return m;
}

}  // namespace m1bit::ct
