#pragma once

// Exactly solvable Gaussian reference families: the free scalar of mass m >= 0
// and the free (abelian) field-strength sector. Everything here is closed
// form or controlled 1D quadrature; no Monte Carlo.
//
// The Euclidean smear engine works in proper time: the 2-point kernel is
// written as \int_0^inf dt e^{-m^2 t} H_t with H_t the 4D heat kernel, and the
// double Gaussian-polynomial integral against H_t is evaluated in closed form
// per coordinate (bivariate Gaussian moments). One adaptive 1D integral per
// pairing, no 4D cubature anywhere.

#include <complex>
#include <vector>

#include "qgv/testfunc.hpp"

namespace qgv {

// --- pointwise kernels -----------------------------------------------------

// Euclidean 2-point kernel: m K1(m r)/(4 pi^2 r), massless limit 1/(4 pi^2 r^2).
double scalar_schwinger_kernel(double mass, double r);

// Spatial-momentum slice of the Euclidean kernel at |p| = pmag:
// C(tau; p) = \int d^3x e^{-i p.x} K(tau, x) = e^{-omega |tau|}/(2 omega).
// Evaluated by radial quadrature (independent of the closed form).
double scalar_temporal_slice(double mass, double tau, double pmag);

// Wightman 2-point function at time t, spatial radius r > 0, via the on-shell
// momentum integral with e^{-eps omega} damping and Richardson extrapolation.
std::complex<double> scalar_wightman_kernel(double mass, double t, double r);

// Same function from the Bessel closed form (independent reference path).
std::complex<double> scalar_wightman_closed(double mass, double t, double r);

// --- Euclidean smears ------------------------------------------------------

// \int\int f(x) K_m(x - y) g(y) dx dy
std::complex<double> scalar_pairing(const TestFunction& f, const TestFunction& g, double mass);

// Heat smear \int\int f(x) H_t(x-y) g(y) (building block; exposed for tests).
std::complex<double> heat_pairing(const TestFunction& f, const TestFunction& g, double t);

// n-point Wick sum over perfect matchings of scalar_pairing values.
// Throws for odd n or n > cap.
std::complex<double> wick_sum(const std::vector<TestFunction>& fs, double mass, int cap = 8);

// Enumerate perfect matchings of {0..n-1} as flat pair lists.
std::vector<std::vector<std::pair<int, int>>> perfect_matchings(int n);

// --- field-strength sector (massless, abelian) ------------------------------

// <F_{mu nu}(x) F_{rho sigma}(y)> at xi = x - y (closed form).
double maxwell_F_kernel(int mu, int nu, int rho, int sigma, const Vec4& xi);

// Smeared F-F pairing: scalar massless pairings of derivative test functions.
std::complex<double> maxwell_F_pairing(int mu, int nu, int rho, int sigma,
                                       const TestFunction& f, const TestFunction& g);

// --- normal-ordered composites ----------------------------------------------
// Thin-diagonal extensions by normal ordering: one-point functions vanish,
// and the composite 2-point kernels below are the Wick-contracted squares.

// <:phi^2:(x) :phi^2:(y)> = 2 K_m(xi)^2
double composite_phi2_kernel(double mass, double r);

// <:F^2:(x) :F^2:(y)> with F^2 = sum_{mu<nu} F_{mu nu}^2; equals c8 / r^8.
double composite_F2_kernel(double r);
double composite_F2_c8();

// Smears of the composite 2-point kernels through their spectral (mass-
// density) representations, so positivity is inherited from scalar pairings.
// Test-function supports must be effectively separated; the remainder bound
// written to *tail_bound (may be null) accounts for the cut-off short-
// distance region.
std::complex<double> composite_phi2_pairing(const TestFunction& f, const TestFunction& g,
                                            double mass, double* tail_bound = nullptr);
std::complex<double> composite_F2_pairing(const TestFunction& f, const TestFunction& g,
                                          double* tail_bound = nullptr);

// --- Minkowski smears -------------------------------------------------------

// \int\int f(x) g(y) W_m(x - y) dx dy by the on-shell 3D momentum integral.
// Plain Gaussian test functions only (no polynomial prefactor).
std::complex<double> wightman_pairing(const TestFunction& f, const TestFunction& g, double mass);

// Covariant-gauge vector 2-point smear on the Minkowski side:
// <A_mu(f) A_nu(g)> = -eta_{mu nu} * wightman_pairing(f, g, 0). Exposes the
// indefinite-metric sector used by the reconstruction demos.
std::complex<double> covariant_photon_pairing(int mu, int nu, const TestFunction& f,
                                              const TestFunction& g);

}  // namespace qgv
