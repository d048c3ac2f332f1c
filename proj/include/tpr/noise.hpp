#pragma once

// Symmetric independent pixel flips driven by counter-based random streams.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tpr {

enum class NoiseDerivation { Fixed, ClassicalLower, ClassicalUpper, QuantumLower, QuantumUpper };

std::string to_string(NoiseDerivation d);

struct NoiseModel {
  double p = 0.0;  ///< flip probability in [0, 1/2]
  NoiseDerivation derivation = NoiseDerivation::Fixed;
  double fidelity = 1.0;     ///< F the endpoint was computed from
  std::int64_t copies = 0;   ///< M the endpoint was computed from

  static NoiseModel fixed(double p);
  /// Endpoint of pixel_error_bounds(F, M) selected by `d` (not Fixed).
  static NoiseModel from_bounds(NoiseDerivation d, double fidelity, std::int64_t copies);
};

/// SplitMix64 stream keyed by (seed, trial, item). Streams for different
/// keys are independent of evaluation order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t item);
  std::uint64_t next() noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Copies `in` to `out` flipping each of the first `pixels` bits with
/// probability p. Padding bits stay untouched.
void sample_noisy(std::span<const std::uint64_t> in, std::span<std::uint64_t> out, std::size_t pixels,
                  double p, CounterRng& rng);

/// Unpacked convenience form (one 0/1 byte per pixel).
std::vector<std::uint8_t> sample_noisy(std::span<const std::uint8_t> bits, const NoiseModel& noise,
                                       CounterRng& rng);

}  // namespace tpr
