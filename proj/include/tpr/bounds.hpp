#pragma once

// Error-probability bounds for classifying m-pixel channel patterns probed
// with M copies per pixel, and the derived advantage figures.

#include "tpr/channels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tpr {

/// Uniform prior over one of three pattern families: all 2^m patterns,
/// exactly k targets (CPF), or any target count from a set (BCPF).
class ImageSpaceSpec {
 public:
  enum class Variant { Uniform, CPF, BCPF };

  static ImageSpaceSpec uniform(int m);
  static ImageSpaceSpec cpf(int m, int k);
  /// A set equal to {0..m} is stored as Uniform.
  static ImageSpaceSpec bcpf(int m, std::vector<int> targets);

  int m() const noexcept { return m_; }
  Variant variant() const noexcept { return variant_; }
  /// Target counts; {k} for CPF, {0..m} for Uniform.
  const std::vector<int>& targets() const noexcept { return targets_; }
  /// log of the number of patterns in the space.
  double log_size() const;
  std::string describe() const;

 private:
  ImageSpaceSpec(int m, Variant v, std::vector<int> targets)
      : m_(m), variant_(v), targets_(std::move(targets)) {}
  int m_;
  Variant variant_;
  std::vector<int> targets_;
};

/// Probe energy regime.
struct ProbeSpec {
  enum class Energy { Classical, Finite, Asymptotic };
  std::int64_t copies = 1;
  Energy energy = Energy::Asymptotic;
  double a = 0.5;  ///< used only for Finite
};

/// Output fidelity for the given probe regime (vacuum, TMSV(a), or a -> inf).
double probe_fidelity(const EnvironmentPair& pair, const ProbeSpec& probe);

struct BoundReport {
  double q_lower = 0.0;
  double q_upper = 0.0;
  double cl_lower = 0.0;
  double mga = 0.0;
  double mpa = 0.0;
  /// Relative copy number guaranteeing advantage (uniform criterion);
  /// +infinity when none exists.
  double mbar_adv = 0.0;
  double pgm_upper = 0.0;
  /// Local Helstrom bound 1 - (1 - F^M/2)^m; uniform spaces only, NaN otherwise.
  double local_upper = 0.0;
  std::vector<std::string> warnings;
};

BoundReport bounds(const ImageSpaceSpec& space, std::int64_t M, double f_q, double f_cl);

/// log 2 / (2 log F_cl - log F_q); +infinity when the denominator is <= 0.
double min_rel_probe_uniform(double f_q, double f_cl);

/// Additive-noise form log 2 / (log(1 + D_q) - 2 log(1 + D_cl)) with
/// D_q = (sqrt nu_B - sqrt nu_T)^2 / (2 sqrt(nu_B nu_T)) and
/// D_cl = sqrt((nu_T + 1)(nu_B + 1)) - sqrt(nu_B nu_T) - 1.
double min_rel_probe_additive(double nu_t, double nu_b);

/// Bernoulli-relaxed uniform margin m F_cl^{2M} / 2^{m+1} - m F_q^M / 2. It
/// is a lower bound on the uniform mga and changes sign at M = mbar_adv * m.
double relaxed_margin(int m, std::int64_t M, double f_q, double f_cl);

/// Smallest M in [1, max_M] with mga >= 0 and mga >= 0 for every later M up
/// to max_M, or nullopt.
std::optional<std::int64_t> first_guaranteed_advantage(const ImageSpaceSpec& space, double f_q,
                                                       double f_cl, std::int64_t max_M);

struct PixelErrorBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Single-pixel Helstrom error bounds (1 - sqrt(1 - F^{2M}))/2 <= p <= F^M/2.
PixelErrorBounds pixel_error_bounds(double f, std::int64_t M);

}  // namespace tpr
