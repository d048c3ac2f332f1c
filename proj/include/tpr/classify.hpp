#pragma once

// Nearest-neighbour classification of binary images and Monte Carlo
// estimation of misclassification rates under pixel-flip noise.

#include "tpr/channels.hpp"
#include "tpr/dataset.hpp"
#include "tpr/noise.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tpr {

/// Label of the training image at least Hamming distance; ties go to the
/// lowest training index.
int nn_classify(std::span<const std::uint64_t> query, const BinaryImageDataset& training);

struct ErrorEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  ///< sample stddev / sqrt(samples)
  std::int64_t errors = 0;
  std::int64_t samples = 0;
};

/// Maps a noisy packed image to a predicted label. Must be safe to call
/// concurrently.
using Classifier = std::function<int(std::span<const std::uint64_t>)>;

/// For every trial and evaluation image, draws a noisy copy from stream
/// (seed, trial, image) and counts misclassifications. The result does not
/// depend on `threads`.
ErrorEstimate estimate_error(const Classifier& classify, const BinaryImageDataset& evaluation,
                             const NoiseModel& noise, int trials, std::uint64_t seed, unsigned threads = 0);

/// Nearest-neighbour form of the above.
ErrorEstimate estimate_error(const BinaryImageDataset& training, const BinaryImageDataset& evaluation,
                             const NoiseModel& noise, int trials, std::uint64_t seed, unsigned threads = 0);

struct AdvantageRow {
  std::int64_t M = 0;
  double p_cl_low = 0.0;
  double p_cl_up = 0.0;
  double p_q_low = 0.0;
  double p_q_up = 0.0;
  double e_cl_lower = 0.0;
  double e_cl_upper = 0.0;
  double e_q_lower = 0.0;
  double e_q_upper = 0.0;
  double de_min = 0.0;
  double de_max = 0.0;
  double stderr_max = 0.0;
};

using ErrorEstimator = std::function<ErrorEstimate(const NoiseModel&)>;

/// One row per M: errors at the four pixel-error endpoints derived from
/// (F_q, M) and (F_cl, M); dE_min = E_cl_L - E_q_U, dE_max = E_cl_L - E_q_L.
std::vector<AdvantageRow> advantage_regions(const ErrorEstimator& estimate, double f_q, double f_cl,
                                            const std::vector<std::int64_t>& copies);

/// Nearest-neighbour run with F_q from the infinite-squeezing Choi fidelity
/// and F_cl from vacuum probes.
std::vector<AdvantageRow> advantage_regions(const BinaryImageDataset& training,
                                            const BinaryImageDataset& evaluation, const EnvironmentPair& pair,
                                            const std::vector<std::int64_t>& copies, int trials,
                                            std::uint64_t seed, unsigned threads = 0);

}  // namespace tpr
