#pragma once

// Euclidean to relativistic continuation at the 2-point level. The inverse
// Laplace problem is ill-posed, so the module fits parametric spectral models
// (nonnegative poles, optional tabulated continuum) to temporal-slice data
// and continues the fitted model with validated quadrature.

#include <vector>

#include <Eigen/Dense>

#include "qgv/correlator.hpp"

namespace qgv {

// true iff (sum a_i)/||a|| > sqrt(dim - 1), the dual-cone membership test;
// throws on the zero vector
bool cone_member(const Eigen::VectorXd& a);

struct SpectralPole {
  double mass2 = 0.0;   // mu_i^2 >= 0
  double weight = 0.0;  // spectral weight, normalized so a unit free field has 1
};

struct SpectralModel {
  std::vector<SpectralPole> poles;
  std::vector<std::pair<double, double>> continuum;  // (s, density) samples, trapezoid rule

  // fitted coefficient of the momentum-zero constant column (a finite-volume
  // regularized zero mode). It lives in slice space and vanishes pointwise in
  // infinite volume, so the continuation functions drop it.
  double zero_mode = 0.0;

  // fit diagnostics (zeroed on hand-built models)
  double residual = 0.0;      // weighted rms of the constrained fit (sigma units)
  double residual_rel = 0.0;  // raw rms divided by the data scale
  double scale = 0.0;         // peak magnitude of the fitted data
  double residual_unconstrained = 0.0;
  std::vector<double> unconstrained_weights;  // same pole masses, sign-free fit
  double condition = 1.0;                     // design-matrix condition at the optimum
  Eigen::MatrixXd covariance;  // parameters ordered (mass2_0, w_0, mass2_1, w_1, ...)
  bool well_conditioned = true;
};

struct SliceSample {
  double tau = 0.0;
  double pmag = 0.0;
  double value = 0.0;
  double sigma = 0.0;  // 0 for exact sources
};

struct SpectralFitOptions {
  int max_poles = 2;
  std::vector<double> taus;           // empty: log-spaced default grid
  std::vector<double> pmags = {0.0};  // momentum slices fitted jointly
  double mass2_hi = 25.0;             // search window for pole positions

  // signed weights (plain least squares). The default keeps the positivity
  // constraint; the support checker relaxes it because it asks only where the
  // modes sit, not what sign they carry.
  bool nonnegative = true;

  // extra constant column on momentum-zero rows, absorbing a regularized
  // zero mode so families with one do not misreport as unsupported
  bool fit_constant = false;
};

// nonnegative least squares min ||A x - b||, x >= 0 (Lawson-Hanson active set)
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol = 1e-12);

// fits C(tau; p) = sum_i w_i exp(-omega_i tau) / (2 omega_i) with
// omega_i = sqrt(p^2 + mu_i^2), enforcing mu^2 >= 0 and w >= 0. The
// constraint set is the 2-point forward-cone support statement. Poor
// conditioning is reported in the model, never thrown.
SpectralModel fit_spectral_samples(const std::vector<SliceSample>& data,
                                   const SpectralFitOptions& opt = {});

// same, sampling the family's temporal-slice surface through a 2-point
// difference form
SpectralModel fit_spectral(const DifferenceForm& difform, const SpectralFitOptions& opt = {});

// W(t, r) = sum_i w_i D+(t, r; mu_i) + continuum integral, with D+ the
// positive-frequency kernel; throws within 1e-9 of the light cone
cplx continue_to_wightman(const SpectralModel& model, double t, double r);

// the same function continued into the backward tube z0 = t - i eta,
// z_vec = (r, 0, 0), eta > 0, by absolutely convergent quadrature
cplx analytic_two_point(const SpectralModel& model, double t, double eta, double r);

struct GrowthReport {
  double C = 0.0;
  int N = 0;
  int M = 0;
  bool verified = false;   // bound re-checked on a refined grid
  double worst_ratio = 0;  // max |S| / (C * envelope) on the refined grid
};

// finds the smallest (N, M) with |S(x - i eta e0)| <= C (1+||z||)^N (1+eta^-M)
// over a deterministic probe grid, then re-verifies on a refined grid
GrowthReport verify_growth_estimate(const SpectralModel& model, int n_max = 6, int m_max = 4);

}  // namespace qgv
