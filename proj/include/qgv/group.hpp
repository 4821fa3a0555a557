#pragma once

// Compact gauge groups U(1), SU(2), SU(3) and their Lie algebras.
//
// Generators are anti-Hermitian. For SU(N) the basis is normalized with
// tr(t_a t_b) = -delta_{ab}/2 (so structure constants are real and totally
// antisymmetric); SU(2) uses -i sigma_a/2, SU(3) uses -i lambda_a/2. The
// abelian factor carries t = i, i.e. exp_map(theta) = e^{i theta}, which keeps
// lattice phases free of stray sqrt(2) factors.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qgv/rng.hpp"

namespace qgv {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;

enum class GroupId { U1, SU2, SU3 };

const char* group_name(GroupId g);
GroupId group_from_name(const std::string& name);

// Structure constants C[gamma](alpha, beta) with [t_a, t_b] = sum_g C^g_{ab} t_g.
using StructureConstants = std::vector<Eigen::MatrixXd>;

class GaugeGroup {
 public:
  explicit GaugeGroup(GroupId id);

  GroupId id() const { return id_; }
  int matrix_dim() const { return int(gens_[0].rows()); }
  int algebra_dim() const { return int(gens_.size()); }
  const std::vector<Mat>& generators() const { return gens_; }
  const StructureConstants& structure_constants() const { return C_; }

  // Expands X in the generator basis. Throws if X is not (numerically) in the
  // real span of the generators.
  Eigen::VectorXd algebra_coefficients(const Mat& X, double tol = 1e-10) const;

  // exp(scale * sum_a coeff[a] t_a), computed by unitary diagonalization of
  // the Hermitian matrix -iX. Oracle-tested against a Taylor scaling-and-
  // squaring expansion.
  Mat exp_map(const Eigen::VectorXd& coeffs, double scale = 1.0) const;

  // Adjoint-representation matrix with entries (A_g)^a_d = -i C^a_{d g}.
  // These close as [A_a, A_b] = i sum_g C^g_{ab} A_g; equivalently -iA_g (the
  // real matrices C^a_{g d}) satisfy the defining bracket.
  Mat adjoint_generator(int gamma) const;

  // Haar-distributed group element.
  Mat haar_sample(RngStream& rng) const;

  // Nearest group element (polar projection + determinant fix). Used for
  // re-unitarization after accumulated floating-point drift.
  Mat project_to_group(const Mat& near) const;

  // Random algebra element sum_a c_a t_a with c_a ~ N(0, width^2).
  Mat random_algebra_element(RngStream& rng, double width = 1.0) const;

 private:
  GroupId id_;
  std::vector<Mat> gens_;
  StructureConstants C_;
};

}  // namespace qgv
