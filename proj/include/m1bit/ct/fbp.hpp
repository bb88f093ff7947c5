// Filtered back projection for the flat equal-spaced fan-beam geometry:
// cosine pre-weighting, frequency-domain ramp filtering (band-limited
// Ram-Lak kernel, optional raised-cosine apodization), distance-weighted
// backprojection.
#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <vector>

#include "m1bit/core.hpp"
#include "m1bit/ct/geometry.hpp"

namespace m1bit::ct {

struct FbpOptions {
  bool apodize = false;  // raised-cosine window on the ramp (for noisy data)
};

/// Frequency response of the band-limited ramp on a padded length-M grid with
/// sample spacing ds: the DFT of the sampled spatial Ram-Lak kernel.
inline std::vector<double> ramp_response(int M, double ds, bool apodize) {
  std::vector<double> kernel(static_cast<std::size_t>(M), 0.0);
  kernel[0] = 1.0 / (4.0 * ds * ds);
  for (int n = 1; n <= M / 2; ++n) {
    if (n % 2 == 0) continue;
    const double v = -1.0 / (M_PI * M_PI * static_cast<double>(n) * static_cast<double>(n) * ds * ds);
    kernel[static_cast<std::size_t>(n)] = v;
    if (n < M) kernel[static_cast<std::size_t>(M - n)] = v;  // wrapped negative tap
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, kernel);
  std::vector<double> H(static_cast<std::size_t>(M));
  for (int k = 0; k < M; ++k) {
    double h = freq[static_cast<std::size_t>(k)].real();
    if (apodize) {
      const int ke = std::min(k, M - k);
      h *= 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(ke) / (0.5 * static_cast<double>(M))));
    }
    H[static_cast<std::size_t>(k)] = h;
  }
  return H;
}

inline MatrixXd fbp(const MatrixXd& sino, const FanBeamGeometry& geom, const ImageGrid& grid,
                    const FbpOptions& opt = {}) {
  geom.validate();
  grid.validate();
  const int nv = geom.n_views;
  const Index nb = geom.n_bins();
  if (sino.rows() != nv || sino.cols() != nb)
    throw std::invalid_argument("fbp: sinogram/geometry mismatch");

  const double R = geom.source_to_isocenter;
  const double mag = R / (R + geom.isocenter_to_detector);
  const double ds = geom.detector_pixel * mag;  // spacing on the virtual detector at the isocenter

  int M = 1;
  while (M < 2 * static_cast<int>(nb)) M *= 2;
  const std::vector<double> H = ramp_response(M, ds, opt.apodize);

  // Cosine weighting + per-view ramp filtering.
  Eigen::FFT<double> fft;
  MatrixXd filtered(nv, nb);
  std::vector<double> row(static_cast<std::size_t>(M));
  std::vector<std::complex<double>> freq;
  for (int v = 0; v < nv; ++v) {
    std::fill(row.begin(), row.end(), 0.0);
    for (Index b = 0; b < nb; ++b) {
      const double s = (static_cast<double>(b) - 0.5 * static_cast<double>(nb - 1)) * ds;
      row[static_cast<std::size_t>(b)] = sino(v, b) * R / std::sqrt(R * R + s * s);
    }
    fft.fwd(freq, row);
    for (int k = 0; k < M; ++k) freq[static_cast<std::size_t>(k)] *= H[static_cast<std::size_t>(k)];
    fft.inv(row, freq);
    for (Index b = 0; b < nb; ++b) filtered(v, b) = row[static_cast<std::size_t>(b)] * ds;
  }

  // Distance-weighted backprojection; the 1/2 absorbs the double coverage of
  // each line in a full 2*pi scan.
  const double dbeta = geom.angular_step_deg * M_PI / 180.0;
  const double scale = 0.5 * dbeta;
  const double center = 0.5 * static_cast<double>(nb - 1);
  MatrixXd img = MatrixXd::Zero(grid.ny, grid.nx);
  for (int v = 0; v < nv; ++v) {
    const double beta = geom.view_angle_rad(v);
    const double ex = std::cos(beta), ey = std::sin(beta);
    for (Index i = 0; i < grid.ny; ++i) {
      const double y = grid.y_of_row(i);
      for (Index j = 0; j < grid.nx; ++j) {
        const double x = grid.x_of_col(j);
        const double along = x * ex + y * ey;  // component toward the source
        const double denom = R - along;
        if (denom <= 1e-9) continue;
        const double w = (R / denom) * (R / denom);
        const double s_hat = R * (-x * ey + y * ex) / denom;  // virtual detector coordinate
        const double pos = s_hat / ds + center;
        const auto b0 = static_cast<Index>(std::floor(pos));
        if (b0 < 0 || b0 + 1 >= nb) continue;
        const double frac = pos - static_cast<double>(b0);
        const double val = (1.0 - frac) * filtered(v, b0) + frac * filtered(v, b0 + 1);
        img(i, j) += scale * w * val;
      }
    }
  }
  return img;
}

}  // namespace m1bit::ct
