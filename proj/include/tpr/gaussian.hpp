#pragma once

// Zero-mean bosonic Gaussian states described by their covariance matrix.
//
// Conventions used throughout the library:
//   * quadrature ordering (q1, p1, q2, p2, ..., qN, pN);
//   * shot-noise units, i.e. the vacuum has V = I/2;
//   * the symplectic form is Omega = diag(w, ..., w), w = [[0, 1], [-1, 0]].

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace tpr {

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPhysicalityTolerance = 1e-8;

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// Symplectic form for `modes` modes in (q1, p1, ...) ordering.
Eigen::MatrixXd symplectic_form(std::size_t modes);

/// Validated covariance matrix of an N-mode zero-mean Gaussian state.
///
/// Construction rejects non-finite entries, asymmetry above 1e-12 and
/// matrices whose smallest symplectic eigenvalue is below 1/2 - 1e-8. The
/// stored matrix is the symmetrized input.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(const Eigen::MatrixXd& entries);

  static CovarianceMatrix vacuum(std::size_t modes);
  /// Single-mode thermal state with mean photon number `nbar`.
  static CovarianceMatrix thermal(double nbar);
  /// Product of single-mode thermal states, one per entry of `nbars`.
  static CovarianceMatrix thermal_product(const std::vector<double>& nbars);
  /// Two-mode squeezed vacuum with diagonal variance `a` (a >= 1/2).
  static CovarianceMatrix two_mode_squeezed(double a);

  std::size_t modes() const noexcept { return static_cast<std::size_t>(entries_.rows() / 2); }
  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }

 private:
  Eigen::MatrixXd entries_;
};

/// Symplectic eigenvalues in descending order.
std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& v);

/// Same as above for an unvalidated matrix; throws NonSymmetric / NonPhysical.
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& v);

/// Bures (root) fidelity F = Tr sqrt(sqrt(rho) sigma sqrt(rho)) between two
/// zero-mean Gaussian states.
double gaussian_fidelity(const CovarianceMatrix& v1, const CovarianceMatrix& v2);

/// Uhlmann fidelity of Fock-truncated density matrices. Only states that are
/// diagonal in the Fock basis are accepted (products of single-mode thermal
/// states); anything else raises UnsupportedState.
double fock_fidelity_oracle(const CovarianceMatrix& v1, const CovarianceMatrix& v2,
                            std::size_t cutoff);

namespace detail {

// Extended-precision kernels used by the infinite-squeezing extrapolation,
// where Choi matrices become nearly singular. No validation is performed.
long double gaussian_fidelity_unchecked(const MatrixXld& v1, const MatrixXld& v2);
double gaussian_fidelity_unchecked(const Eigen::MatrixXd& v1, const Eigen::MatrixXd& v2);

}  // namespace detail

}  // namespace tpr
