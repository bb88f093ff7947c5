#include "ct_experiments.hpp"

#include <chrono>
#include <stdexcept>

#include "m1bit/ct/fbp.hpp"
#include "m1bit/ct/sart.hpp"
#include "m1bit/ct/tv_recon.hpp"
#include "m1bit/rng.hpp"
#include "m1bit/solvers.hpp"

namespace m1bit::bench {

namespace {

SolverParams<double> m1bit_ct_params(const CtConfig& cfg, Index m, Index n_flagged) {
  SolverParams<double> p;
  const Hyperparams h = default_hyperparams(m, std::max<Index>(n_flagged, 1));
  p.mu = cfg.mu_tv;
  p.lambda = n_flagged > 0 ? h.lambda : 0.0;
  p.tau = n_flagged > 0 ? cfg.m1bit_tau : 0.0;
  p.gamma = 1e-4;
  p.theta1 = cfg.m1bit_theta1;
  p.theta2 = cfg.m1bit_theta2;
  p.max_outer = cfg.m1bit_outer;
  p.fista_iters = cfg.m1bit_inner;
  p.tol_primal = 1e-6;
  p.tol_dual = 1e-6;
  return p;
}

VectorXd m1bit_reconstruct(const ct::FanBeamProjector& P, const CtConfig& cfg,
                           const SaturatedObservations<double>& obs, const VectorXd* warm,
                           bool* converged) {
  SolverParams<double> params = m1bit_ct_params(cfg, P.rows(), obs.saturated_count());
  MatrixXd img;
  MatrixXd warm_img;
  const MatrixXd* warm_ptr = nullptr;
  if (warm) {
    warm_img = ct::unflatten(*warm, P.grid().ny, P.grid().nx);
    warm_ptr = &warm_img;
  }
  Solution<double> sol = ct::m1bitcsr_tv_reconstruct(P, obs, params, cfg.tv_iters, &img, warm_ptr);
  if (converged) *converged = sol.converged;
  return sol.x_hat;
}

VectorXd sart_reconstruct(const ct::FanBeamProjector& P, const CtConfig& cfg,
                          const SaturatedObservations<double>& obs, const VectorXd* warm) {
  const MatrixXd sino = ct::unflatten(obs.p, P.geometry().n_views, P.n_bins());
  ArrayXb mask(obs.size());
  for (Index i = 0; i < obs.size(); ++i) mask[i] = !obs.psi[i];
  ct::SartOptions opt;
  opt.iters = cfg.sart_iters;
  opt.relax = cfg.sart_relax;
  MatrixXd x0;
  const MatrixXd* x0_ptr = nullptr;
  if (warm) {
    x0 = ct::unflatten(*warm, P.grid().ny, P.grid().nx);
    x0_ptr = &x0;
  }
  return ct::flatten(ct::sart(sino, P, mask, opt, x0_ptr));
}

}  // namespace

IsdResult<double> detect_saturation(const MatrixXd& sino, const CtConfig& cfg,
                                    const VectorXd& s_beta, const std::string& method) {
  const ct::FanBeamProjector P(cfg.geometry(), cfg.grid());
  const Index nb = P.n_bins();
  if (sino.rows() != cfg.n_views || sino.cols() != nb)
    throw std::invalid_argument("detect_saturation: sinogram/geometry mismatch");

  SaturatedObservations<double> obs;
  obs.p = ct::flatten(sino);
  obs.psi = ArrayXb::Constant(P.rows(), false);
  obs.y = VectorXd::Zero(P.rows());
  obs.s = VectorXd::Zero(P.rows());

  IsdConfig<double> icfg;
  icfg.s_minus.resize(P.rows());
  for (int v = 0; v < cfg.n_views; ++v)
    for (Index b = 0; b < nb; ++b) icfg.s_minus[static_cast<Index>(v) * nb + b] = s_beta[v];
  icfg.max_rounds = cfg.isd_max_rounds;
  icfg.detect_fraction = cfg.detect_fraction;
  icfg.warm_start = cfg.isd_warm_start;
  icfg.apply = [&P](const VectorXd& x) { return P.apply(x); };
  if (method == "sart") {
    icfg.reconstructor = [&](const SaturatedObservations<double>& o, const VectorXd* warm) {
      return sart_reconstruct(P, cfg, o, warm);
    };
  } else if (method == "m1bit") {
    icfg.reconstructor = [&](const SaturatedObservations<double>& o, const VectorXd* warm) {
      return m1bit_reconstruct(P, cfg, o, warm, nullptr);
    };
  } else {
    throw std::invalid_argument("detect_saturation: unknown method '" + method + "'");
  }
  return run_isd(obs, icfg);
}

CtRunResult run_ct_method(const CtConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ct::FanBeamProjector P(cfg.geometry(), cfg.grid());
  const Index nb = P.n_bins();

  CtRunResult res;
  res.phantom = ct::make_phantom(cfg.phantom, cfg.grid());
  MatrixXd clean = ct::forward_project(res.phantom, P);

  MatrixXd noisy = clean;
  if (cfg.noise_sigma > 0) {
    RandomStream rng(cfg.seed, StreamTag::noise);
    for (Index i = 0; i < noisy.rows(); ++i)
      for (Index j = 0; j < noisy.cols(); ++j) noisy(i, j) += cfg.noise_sigma * rng.normal();
    noisy = noisy.cwiseMax(0.0);  // projection values are physically non-negative
  }

  const double kappa = cfg.kappa_frac * noisy.maxCoeff();
  ct::OverexposedSinogram sat = ct::apply_overexposure(noisy, kappa);
  res.observed_sino = sat.p;
  res.psi_true = ct::ideal_saturation_indicator(clean, sat.s_beta);

  auto finish = [&](const MatrixXd& recon) {
    res.recon = recon;
    res.rmse_hu = ct::rmse_hu(res.phantom, recon, cfg.mu_water);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (cfg.method == "fbp") {
    ct::FbpOptions opt;
    opt.apodize = cfg.noise_sigma > 0;
    res.psi_final = sat.obs.psi;
    finish(ct::fbp(sat.p, cfg.geometry(), cfg.grid(), opt));
    return res;
  }

  if (cfg.method == "m1bit-ideal") {
    SaturatedObservations<double> obs = sat.obs;
    obs.psi = res.psi_true;
    for (Index i = 0; i < obs.size(); ++i) {
      obs.y[i] = obs.psi[i] ? -1.0 : 0.0;
      if (!obs.psi[i] && sat.obs.psi[i]) obs.p[i] = 0.0;  // true zero rays used as analog zeros
    }
    bool conv = true;
    VectorXd x = m1bit_reconstruct(P, cfg, obs, nullptr, &conv);
    res.converged = conv;
    res.psi_final = obs.psi;
    finish(ct::unflatten(x, cfg.ny, cfg.nx));
    return res;
  }

  if (cfg.method == "sart-isd" || cfg.method == "m1bit-isd") {
    IsdConfig<double> icfg;
    icfg.s_minus.resize(P.rows());
    for (int v = 0; v < cfg.n_views; ++v)
      for (Index b = 0; b < nb; ++b) icfg.s_minus[static_cast<Index>(v) * nb + b] = sat.s_beta[v];
    icfg.max_rounds = cfg.isd_max_rounds;
    icfg.detect_fraction = cfg.detect_fraction;
    icfg.warm_start = cfg.isd_warm_start;
  icfg.detect_fraction = cfg.detect_fraction;
  icfg.warm_start = cfg.isd_warm_start;
    icfg.apply = [&P](const VectorXd& x) { return P.apply(x); };
    icfg.metric = [&](const VectorXd& x) {
      return ct::rmse_hu(res.phantom, ct::unflatten(x, cfg.ny, cfg.nx), cfg.mu_water);
    };
    if (cfg.method == "sart-isd") {
      icfg.reconstructor = [&](const SaturatedObservations<double>& o, const VectorXd* warm) {
        return sart_reconstruct(P, cfg, o, warm);
      };
    } else {
      icfg.reconstructor = [&](const SaturatedObservations<double>& o, const VectorXd* warm) {
        return m1bit_reconstruct(P, cfg, o, warm, nullptr);
      };
    }
    IsdResult<double> isd = run_isd(sat.obs, icfg);
    res.converged = isd.history.converged;
    res.psi_final = isd.psi;
    for (std::size_t r = 0; r < isd.history.rounds.size(); ++r) {
      const auto& round = isd.history.rounds[r];
      CtRoundLog log;
      log.round = static_cast<int>(r);
      log.flips = round.flips;
      log.rmse = round.metric;
      auto [fd, md] = compare_indicators(res.psi_true, round.psi);
      log.false_detections = fd;
      log.missing_detections = md;
      res.rounds.push_back(log);
    }
    finish(ct::unflatten(isd.x_hat, cfg.ny, cfg.nx));
    return res;
  }

  throw std::invalid_argument("run_ct_method: unknown method '" + cfg.method + "'");
}

}  // namespace m1bit::bench
