#include "tpr/noise.hpp"

#include "tpr/bounds.hpp"
#include "tpr/error.hpp"

#include <algorithm>
#include <cmath>

namespace tpr {
namespace {

std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Flip iff a 64-bit draw falls below p * 2^64.
std::uint64_t flip_threshold(double p) {
  if (!(p >= 0.0 && p <= 0.5)) throw Error(ErrorKind::DomainError, "flip probability must lie in [0, 1/2]");
  return static_cast<std::uint64_t>(std::ldexp(p, 64));
}

}  // namespace

std::string to_string(NoiseDerivation d) {
  switch (d) {
    case NoiseDerivation::Fixed: return "fixed";
    case NoiseDerivation::ClassicalLower: return "classical-lower";
    case NoiseDerivation::ClassicalUpper: return "classical-upper";
    case NoiseDerivation::QuantumLower: return "quantum-lower";
    case NoiseDerivation::QuantumUpper: return "quantum-upper";
  }
  return "unknown";
}

NoiseModel NoiseModel::fixed(double p) {
  flip_threshold(p);
  return {p, NoiseDerivation::Fixed, 1.0, 0};
}

NoiseModel NoiseModel::from_bounds(NoiseDerivation d, double fidelity, std::int64_t copies) {
  const auto b = pixel_error_bounds(fidelity, copies);
  switch (d) {
    case NoiseDerivation::ClassicalLower:
    case NoiseDerivation::QuantumLower: return {b.lower, d, fidelity, copies};
    case NoiseDerivation::ClassicalUpper:
    case NoiseDerivation::QuantumUpper: return {b.upper, d, fidelity, copies};
    case NoiseDerivation::Fixed: break;
  }
  throw Error(ErrorKind::DomainError, "from_bounds needs a bound endpoint");
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t item)
    : state_(mix(mix(mix(seed) ^ trial) ^ (item * 0xd1b54a32d192ed03ULL))) {}

std::uint64_t CounterRng::next() noexcept {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void sample_noisy(std::span<const std::uint64_t> in, std::span<std::uint64_t> out, std::size_t pixels,
                  double p, CounterRng& rng) {
  if (out.size() != in.size() || pixels > 64 * in.size()) {
    throw Error(ErrorKind::ShapeMismatch, "noisy sample buffer has the wrong size");
  }
  const std::uint64_t threshold = flip_threshold(p);
  std::copy(in.begin(), in.end(), out.begin());
  if (threshold == 0) return;
  for (std::size_t px = 0; px < pixels; ++px) {
    if (rng.next() < threshold) out[px / 64] ^= std::uint64_t{1} << (px % 64);
  }
}

std::vector<std::uint8_t> sample_noisy(std::span<const std::uint8_t> bits, const NoiseModel& noise,
                                       CounterRng& rng) {
  const std::uint64_t threshold = flip_threshold(noise.p);
  std::vector<std::uint8_t> out(bits.begin(), bits.end());
  if (threshold == 0) return out;
  for (auto& b : out) {
    if (rng.next() < threshold) b ^= 1U;
  }
  return out;
}

}  // namespace tpr
