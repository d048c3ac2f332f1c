#pragma once

// Phase-insensitive Gaussian channels (thermal loss, additive noise,
// thermal amplifier) and the probe-output fidelities that feed the bounds.

#include "tpr/gaussian.hpp"

#include <string>
#include <vector>

namespace tpr {

enum class ChannelKind { Loss, Additive, Amplifier };

std::string to_string(ChannelKind kind);

/// Channel acting on quadratures as V -> tau V + nu I (per mode).
///
/// Loss (0 <= tau < 1) and amplifier (tau > 1) channels require
/// nu >= |1 - tau| / 2 and have thermal parameter eps = nu / |1 - tau|.
/// Additive channels have tau = 1 and nu >= 0; eps is undefined for them.
class ChannelSpec {
 public:
  static ChannelSpec from_tau_nu(double tau, double nu);
  static ChannelSpec additive(double nu);
  /// Loss or amplifier channel from its thermal parameter eps = nbar + 1/2.
  static ChannelSpec thermal(double tau, double epsilon);

  double tau() const noexcept { return tau_; }
  double nu() const noexcept { return nu_; }
  ChannelKind kind() const noexcept;
  /// eps = nu / |1 - tau|; DomainError for additive channels.
  double epsilon() const;
  /// Environment mean photon number eps - 1/2; DomainError for additive.
  double mean_photons() const;

  bool approx_equal(const ChannelSpec& other, double tol = 1e-9) const noexcept;
  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;

 private:
  ChannelSpec(double tau, double nu) : tau_(tau), nu_(nu) {}
  double tau_;
  double nu_;
};

/// Background/target channels sharing one transmissivity.
class EnvironmentPair {
 public:
  EnvironmentPair(ChannelSpec background, ChannelSpec target);

  const ChannelSpec& background() const noexcept { return background_; }
  const ChannelSpec& target() const noexcept { return target_; }
  ChannelKind kind() const noexcept { return background_.kind(); }
  double tau() const noexcept { return background_.tau(); }

  static EnvironmentPair additive(double nu_background, double nu_target);
  static EnvironmentPair thermal(double tau, double eps_background, double eps_target);

 private:
  ChannelSpec background_;
  ChannelSpec target_;
};

/// Output of a two-mode squeezed vacuum with variance `a` (signal through
/// the channel, idler kept): blocks a I, (a tau + nu) I, sqrt(tau (a^2 - 1/4)) Z.
CovarianceMatrix choi_cm(const ChannelSpec& ch, double a);

/// Vacuum probe through the channel: (tau/2 + nu) I.
CovarianceMatrix classical_output_cm(const ChannelSpec& ch);

double fidelity_classical(const EnvironmentPair& pair);

/// Fidelity between finite-energy Choi outputs, computed from the CMs.
double fidelity_finite(const EnvironmentPair& pair, double a);

enum class FidelitySource { ClosedForm, Extrapolated };

struct Extrapolation {
  double value = 0.0;
  bool converged = false;
  double last_change = 0.0;        ///< |difference of the two highest extrapolation orders|
  std::vector<double> energies;    ///< a-grid that was evaluated
};

/// Richardson extrapolation of fidelity_finite to a -> infinity in the
/// variable 1/a, over a geometric grid whose starting point adapts to the
/// channel noise scale. Evaluated in extended precision.
Extrapolation extrapolate_infinite_energy(const EnvironmentPair& pair);

struct InfiniteEnergyFidelity {
  double value = 0.0;
  FidelitySource source = FidelitySource::ClosedForm;
  Extrapolation oracle;
  /// Set when the closed form disagreed with the converged oracle by more
  /// than 1e-6; `value` is then the oracle value.
  bool convention_unresolved = false;
};

/// Choi-state fidelity in the infinite-squeezing limit.
InfiniteEnergyFidelity fidelity_choi_inf(const EnvironmentPair& pair, bool verify = true);

/// Closed-form fast paths. Each is gated by trivial anchors (identical
/// channels give 1, vacuum probes reproduce the classical value); a closed
/// form failing its anchors is never used.
namespace closed_form {

double additive_choi_inf(double nu_t, double nu_b);
double additive_classical(double nu_t, double nu_b);
double additive_finite(double nu_t, double nu_b, double a);
/// Thermal loss/amplifier infinite-squeezing fidelity (eps-only). Uses the
/// reconciled coefficient 4 eps_T eps_B inside the outer root.
double thermal_choi_inf(double eps_t, double eps_b);
/// The same expression with the coefficient as printed (eps_T eps_B); kept
/// only so the anchor audit can show why it is rejected.
double thermal_choi_inf_printed(double eps_t, double eps_b);
/// Vacuum-probe fidelity for thermal loss/amplifier channels,
/// (sqrt(alpha + beta) + sqrt(alpha - beta)) / beta.
double thermal_classical(double tau, double eps_t, double eps_b);

struct AuditEntry {
  std::string name;
  bool enabled = false;
  std::string note;
};

/// Result of evaluating every closed form against its anchors. Computed
/// once per process; thread-safe.
const std::vector<AuditEntry>& audit();
bool enabled(const std::string& name);

}  // namespace closed_form

/// Boltzmann temperature (Kelvin) of a mode with mean photon number `nbar`
/// at wavelength `lambda_m` (metres), CODATA 2018 constants.
double temperature_of(double nbar, double lambda_m);

}  // namespace tpr
