#pragma once

// Least-squares fit of E(T) = E_inf + sum_{j=2}^{jmax} x_j T^{-j/m}.

#include <string>
#include <vector>

namespace tpr {

struct SnappSample {
  double T = 0.0;
  double E = 0.0;
};

struct SnappFit {
  int m = 1;
  double e_inf = 0.0;
  std::vector<double> coefficients;  ///< x_2 .. x_jmax
  double residual_rms = 0.0;
  bool clipped = false;              ///< E_inf came out negative and was set to 0
  std::vector<std::string> diagnostics;

  double predict(double T) const;
};

/// Errors: InsufficientSamples (fewer distinct T than parameters, or T < 1),
/// SingularDesign.
SnappFit snapp_fit(const std::vector<SnappSample>& samples, int m, int jmax = 5);

}  // namespace tpr
