#include "tpr/gaussian.hpp"

#include "tpr/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace tpr {
namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
Mat<T> omega(Eigen::Index modes) {
  Mat<T> w = Mat<T>::Zero(2 * modes, 2 * modes);
  for (Eigen::Index k = 0; k < modes; ++k) {
    w(2 * k, 2 * k + 1) = T(1);
    w(2 * k + 1, 2 * k) = T(-1);
  }
  return w;
}

void require_shape(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() == 0 || v.rows() % 2 != 0) {
    std::ostringstream msg;
    msg << "covariance matrix must be 2N x 2N, got " << v.rows() << " x " << v.cols();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  if (!v.allFinite()) throw Error(ErrorKind::NonPhysical, "covariance matrix has non-finite entries");
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& v) {
  require_shape(v);
  const double asym = (v - v.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance) {
    std::ostringstream msg;
    msg << "max |V - V^T| = " << asym;
    throw Error(ErrorKind::NonSymmetric, msg.str());
  }
  return 0.5 * (v + v.transpose());
}

// Symplectic spectrum via the antisymmetric matrix K = V^{1/2} Omega V^{1/2}:
// K^T K has eigenvalues nu_k^2, each twice.
std::vector<double> williamson_spectrum(const Eigen::MatrixXd& v) {
  const Eigen::Index n = v.rows() / 2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(v);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::NonPhysical, "eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorKind::NonPhysical, "covariance matrix is not positive definite");
  }
  const Eigen::MatrixXd root = eig.eigenvectors() *
                               eig.eigenvalues().cwiseSqrt().asDiagonal() *
                               eig.eigenvectors().transpose();
  const Eigen::MatrixXd k = root * omega<double>(n) * root;
  const Eigen::MatrixXd ktk = k.transpose() * k;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sq(0.5 * (ktk + ktk.transpose()),
                                                    Eigen::EigenvaluesOnly);
  std::vector<double> squares(sq.eigenvalues().data(), sq.eigenvalues().data() + 2 * n);
  std::sort(squares.begin(), squares.end(), std::greater<>());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pair = 0.5 * (squares[2 * i] + squares[2 * i + 1]);
    out[static_cast<std::size_t>(i)] = std::sqrt(std::max(pair, 0.0));
  }
  return out;
}

template <typename T>
T fidelity_kernel(const Mat<T>& v1, const Mat<T>& v2) {
  using std::sqrt;
  using std::pow;
  const Eigen::Index n = v1.rows() / 2;
  const Mat<T> w = omega<T>(n);
  const Mat<T> sum = v1 + v2;
  Eigen::LLT<Mat<T>> llt(sum);
  const Mat<T> sum_inv = llt.solve(Mat<T>::Identity(2 * n, 2 * n));
  T log_det = T(0);
  for (Eigen::Index i = 0; i < 2 * n; ++i) log_det += T(2) * std::log(llt.matrixL()(i, i));

  // V_aux is not symmetric in general; the spectrum of V_aux * Omega is
  // purely imaginary, {+/- i c_k}.
  const Mat<T> aux = w.transpose() * sum_inv * (w / T(4) + v2 * w * v1);
  Eigen::EigenSolver<Mat<T>> eig(aux * w, false);
  std::vector<T> moduli;
  moduli.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < 2 * n; ++i) moduli.push_back(std::abs(eig.eigenvalues()(i)));
  std::sort(moduli.begin(), moduli.end());

  T log_total = T(0);
  for (Eigen::Index k = 0; k < n; ++k) {
    // pure inputs sit exactly at c = 1/2
    const T c = std::max(T(0.5), T(0.5) * (moduli[2 * k] + moduli[2 * k + 1]));
    log_total += T(0.5) * std::log(T(2) * c + sqrt(std::max(T(4) * c * c - T(1), T(0))));
  }
  const T f = std::exp(log_total - log_det / T(4));
  return std::clamp(f, T(0), T(1));
}

// Symplectic eigenvalues all equal 1/2 up to the rounding expected for a
// matrix of this size.
bool pure_to_working_precision(const Eigen::MatrixXd& v) {
  const double norm = v.norm();
  const double tol = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, norm * norm);
  for (double nu : williamson_spectrum(v)) {
    if (std::abs(nu - 0.5) > tol) return false;
  }
  return true;
}

bool is_thermal_product(const Eigen::MatrixXd& v, std::vector<double>& variances) {
  const Eigen::Index n = v.rows() / 2;
  variances.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      if (r == c) continue;
      if (std::abs(v(r, c)) > kSymmetryTolerance) return false;
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(v(2 * k, 2 * k) - v(2 * k + 1, 2 * k + 1)) > kSymmetryTolerance) return false;
    variances[static_cast<std::size_t>(k)] = v(2 * k, 2 * k);
  }
  return true;
}

// Bose-Einstein weights log p_n for n < cutoff.
std::vector<double> log_thermal_weights(double nbar, std::size_t cutoff) {
  std::vector<double> out(cutoff);
  if (nbar <= 0.0) {
    std::fill(out.begin(), out.end(), -std::numeric_limits<double>::infinity());
    out[0] = 0.0;
    return out;
  }
  const double log_ratio = std::log(nbar) - std::log1p(nbar);
  const double log_norm = -std::log1p(nbar);
  for (std::size_t n = 0; n < cutoff; ++n) out[n] = log_norm + static_cast<double>(n) * log_ratio;
  return out;
}

}  // namespace

Eigen::MatrixXd symplectic_form(std::size_t modes) {
  return omega<double>(static_cast<Eigen::Index>(modes));
}

CovarianceMatrix::CovarianceMatrix(const Eigen::MatrixXd& entries) : entries_(symmetrized(entries)) {
  const auto nu = williamson_spectrum(entries_);
  if (nu.back() < 0.5 - kPhysicalityTolerance) {
    std::ostringstream msg;
    msg << "smallest symplectic eigenvalue " << nu.back() << " < 1/2";
    throw Error(ErrorKind::NonPhysical, msg.str());
  }
}

CovarianceMatrix CovarianceMatrix::vacuum(std::size_t modes) {
  const auto dim = static_cast<Eigen::Index>(2 * modes);
  return CovarianceMatrix(0.5 * Eigen::MatrixXd::Identity(dim, dim));
}

CovarianceMatrix CovarianceMatrix::thermal(double nbar) { return thermal_product({nbar}); }

CovarianceMatrix CovarianceMatrix::thermal_product(const std::vector<double>& nbars) {
  if (nbars.empty()) throw Error(ErrorKind::DimensionMismatch, "thermal product needs at least one mode");
  const auto dim = static_cast<Eigen::Index>(2 * nbars.size());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t k = 0; k < nbars.size(); ++k) {
    if (!(nbars[k] >= 0.0)) throw Error(ErrorKind::NonPhysical, "mean photon number must be >= 0");
    const auto i = static_cast<Eigen::Index>(2 * k);
    v(i, i) = v(i + 1, i + 1) = nbars[k] + 0.5;
  }
  return CovarianceMatrix(v);
}

CovarianceMatrix CovarianceMatrix::two_mode_squeezed(double a) {
  if (!(a >= 0.5)) throw Error(ErrorKind::NonPhysical, "TMSV variance must satisfy a >= 1/2");
  const double c = std::sqrt(a * a - 0.25);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(4, 4);
  v.diagonal().setConstant(a);
  v(0, 2) = v(2, 0) = c;
  v(1, 3) = v(3, 1) = -c;
  return CovarianceMatrix(v);
}

std::vector<double> symplectic_eigenvalues(const CovarianceMatrix& v) {
  return williamson_spectrum(v.matrix());
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& v) {
  const Eigen::MatrixXd sym = symmetrized(v);
  auto nu = williamson_spectrum(sym);
  if (nu.back() < 0.5 - kPhysicalityTolerance) {
    std::ostringstream msg;
    msg << "smallest symplectic eigenvalue " << nu.back() << " < 1/2";
    throw Error(ErrorKind::NonPhysical, msg.str());
  }
  return nu;
}

double gaussian_fidelity(const CovarianceMatrix& v1, const CovarianceMatrix& v2) {
  if (v1.modes() != v2.modes()) {
    std::ostringstream msg;
    msg << "mode counts differ: " << v1.modes() << " vs " << v2.modes();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  // With either state pure F^2 = Tr(rho sigma) = det(V1 + V2)^{-1/2}. The
  // general formula is sqrt-sensitive to rounding at c = 1/2, so use it.
  if (pure_to_working_precision(v1.matrix()) || pure_to_working_precision(v2.matrix())) {
    return std::clamp(std::pow((v1.matrix() + v2.matrix()).determinant(), -0.25), 0.0, 1.0);
  }
  return fidelity_kernel<double>(v1.matrix(), v2.matrix());
}

double fock_fidelity_oracle(const CovarianceMatrix& v1, const CovarianceMatrix& v2,
                            std::size_t cutoff) {
  if (v1.modes() != v2.modes()) throw Error(ErrorKind::DimensionMismatch, "mode counts differ");
  if (cutoff == 0) throw Error(ErrorKind::CutoffTooSmall, "cutoff must be positive");
  std::vector<double> var1;
  std::vector<double> var2;
  if (!is_thermal_product(v1.matrix(), var1) || !is_thermal_product(v2.matrix(), var2)) {
    throw Error(ErrorKind::UnsupportedState,
                "Fock oracle handles only products of single-mode thermal states");
  }
  double fidelity = 1.0;
  for (std::size_t k = 0; k < var1.size(); ++k) {
    const auto lp = log_thermal_weights(std::max(var1[k] - 0.5, 0.0), cutoff);
    const auto lq = log_thermal_weights(std::max(var2[k] - 0.5, 0.0), cutoff);
    double trace_p = 0.0;
    double trace_q = 0.0;
    double overlap = 0.0;
    for (std::size_t n = 0; n < cutoff; ++n) {
      trace_p += std::exp(lp[n]);
      trace_q += std::exp(lq[n]);
      overlap += std::exp(0.5 * (lp[n] + lq[n]));
    }
    if (trace_p < 1.0 - 1e-6 || trace_q < 1.0 - 1e-6) {
      std::ostringstream msg;
      msg << "truncated trace " << std::min(trace_p, trace_q) << " at cutoff " << cutoff;
      throw Error(ErrorKind::CutoffTooSmall, msg.str());
    }
    fidelity *= overlap;
  }
  return fidelity;
}

namespace detail {

long double gaussian_fidelity_unchecked(const MatrixXld& v1, const MatrixXld& v2) {
  return fidelity_kernel<long double>(v1, v2);
}

double gaussian_fidelity_unchecked(const Eigen::MatrixXd& v1, const Eigen::MatrixXd& v2) {
  return fidelity_kernel<double>(v1, v2);
}

}  // namespace detail

}  // namespace tpr
