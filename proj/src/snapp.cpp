#include "tpr/snapp.hpp"

#include "tpr/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace tpr {
namespace {

constexpr double kRidge = 1e-12;

}  // namespace

double SnappFit::predict(double T) const {
  double e = e_inf;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    e += coefficients[i] * std::pow(T, -static_cast<double>(i + 2) / m);
  }
  return e;
}

SnappFit snapp_fit(const std::vector<SnappSample>& samples, int m, int jmax) {
  if (m < 1) throw Error(ErrorKind::DomainError, "pixel count m must be >= 1");
  if (jmax < 2) throw Error(ErrorKind::DomainError, "jmax must be >= 2");
  const auto params = static_cast<Eigen::Index>(jmax);  // E_inf plus x_2..x_jmax
  std::set<double> distinct;
  for (const auto& s : samples) {
    if (!(s.T >= 1.0) || !std::isfinite(s.E)) {
      throw Error(ErrorKind::InsufficientSamples, "samples need T >= 1 and finite E");
    }
    distinct.insert(s.T);
  }
  if (static_cast<Eigen::Index>(distinct.size()) < params) {
    std::ostringstream msg;
    msg << distinct.size() << " distinct T values for " << params << " parameters";
    throw Error(ErrorKind::InsufficientSamples, msg.str());
  }

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd design(n, params);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    design(r, 0) = 1.0;
    for (Eigen::Index j = 2; j <= jmax; ++j) design(r, j - 1) = std::pow(s.T, -static_cast<double>(j) / m);
    rhs(r) = s.E;
  }
  // Columns span many orders of magnitude; equilibrate before the ridge.
  const Eigen::VectorXd scale = design.colwise().norm().transpose();
  if ((scale.array() <= 0.0).any()) throw Error(ErrorKind::SingularDesign, "design has a zero column");
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
  // Householder QR keeps the conditioning of the design itself. The ridge is
  // only a fallback: its bias ridge / sigma_min^2 would swamp exact data.
  std::vector<std::string> notes;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  Eigen::VectorXd solution;
  if (qr.rank() == params) {
    solution = qr.solve(rhs).cwiseQuotient(scale);
  } else {
    Eigen::MatrixXd normal = scaled.transpose() * scaled;
    normal.diagonal().array() += kRidge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw Error(ErrorKind::SingularDesign, "normal equations are not positive definite");
    }
    solution = ldlt.solve(scaled.transpose() * rhs).cwiseQuotient(scale);
    notes.push_back("design is numerically rank deficient; used ridge-regularized normal equations");
  }
  if (!solution.allFinite()) throw Error(ErrorKind::SingularDesign, "least-squares solution is not finite");

  SnappFit fit;
  fit.m = m;
  fit.e_inf = solution(0);
  fit.coefficients.assign(solution.data() + 1, solution.data() + params);
  fit.residual_rms = std::sqrt((design * solution - rhs).squaredNorm() / static_cast<double>(n));
  fit.diagnostics = std::move(notes);
  if (fit.e_inf < 0.0) {
    std::ostringstream msg;
    msg << "E_inf estimate " << fit.e_inf << " clipped to 0";
    fit.diagnostics.push_back(msg.str());
    fit.e_inf = 0.0;
    fit.clipped = true;
  }
  return fit;
}

}  // namespace tpr
