#pragma once

// Small convolutional classifier: valid convolutions with ReLU, dense ReLU
// layers, and a softmax output trained by plain SGD on cross-entropy.

#include "tpr/classify.hpp"
#include "tpr/dataset.hpp"
#include "tpr/noise.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tpr {

struct ConvLayerSpec {
  int filters = 1;
  int kernel = 3;
  int stride = 1;
};

struct NetworkSpec {
  int height = 28;
  int width = 28;
  std::vector<ConvLayerSpec> conv;
  std::vector<int> dense;  ///< hidden widths
  int classes = 10;

  /// conv(8, 3x3, s1) -> conv(16, 3x3, s2) -> dense(64) -> dense(10).
  static NetworkSpec mnist_default();

  /// Throws ShapeMismatch when a kernel exceeds its input or a size is < 1.
  void validate() const;
  std::size_t parameter_count() const;
  /// Canonical text form; its SHA-256 identifies checkpoints.
  std::string describe() const;
};

/// Flat parameter vector. Per layer: weights then biases. Conv weights are
/// laid out [filter][channel][ky][kx], dense weights [out][in].
using Parameters = std::vector<double>;

/// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
Parameters init_parameters(const NetworkSpec& net, std::uint64_t seed);

/// Class probabilities for one image of height*width values.
std::vector<double> forward(const NetworkSpec& net, const Parameters& params, std::span<const double> image);

struct Example {
  std::vector<double> image;
  int label = 0;
};

struct LossGrad {
  double loss = 0.0;  ///< summed over the batch
  Parameters grad;    ///< gradient of the summed loss
};

/// Errors: ShapeMismatch, NonFiniteLoss, DomainError (empty batch).
LossGrad loss_and_grad(const NetworkSpec& net, const Parameters& params, std::span<const Example> batch);

/// Summed loss divided by the batch size.
double mean_loss(const NetworkSpec& net, const Parameters& params, std::span<const Example> batch);

struct TrainConfig {
  double learning_rate = 0.05;
  int batch_size = 32;
  int epochs = 5;
  std::uint64_t seed = 1;
  bool noisy_train = true;        ///< fresh noise per epoch per image; otherwise clean inputs
  double holdout_fraction = 0.1;  ///< tail of the training set used to pick the best epoch
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double holdout_accuracy = 0.0;
};

struct TrainResult {
  Parameters params;
  std::vector<EpochRecord> trace;
  int best_epoch = 0;  ///< 0 means the initial parameters were kept
};

TrainResult train(const NetworkSpec& net, const BinaryImageDataset& data, const NoiseModel& noise,
                  const TrainConfig& config);

int cnn_predict(const NetworkSpec& net, const Parameters& params, std::span<const std::uint64_t> packed,
                std::size_t pixels);

ErrorEstimate evaluate(const NetworkSpec& net, const Parameters& params, const BinaryImageDataset& evaluation,
                       const NoiseModel& noise, int trials, std::uint64_t seed, unsigned threads = 0);

/// Checkpoint layout: "TPRCKPT\0", u32 version (1), 64 ASCII hex chars of
/// SHA-256(describe()), u64 count, count IEEE-754 doubles; integers and
/// doubles little-endian.
void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& net, const Parameters& params);
Parameters load_checkpoint(const std::filesystem::path& path, const NetworkSpec& net);

}  // namespace tpr
