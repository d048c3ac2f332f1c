#pragma once

#include "tpr/idx.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tpr {

/// Pixel >= threshold maps to 1 (target), otherwise 0 (background).
std::vector<std::uint8_t> binarize(std::span<const std::uint8_t> image, std::uint8_t threshold);

struct Provenance {
  std::string images_sha256;
  std::string labels_sha256;
  int threshold = 128;
  std::string source;
};

/// Labelled binary images, bit-packed row-major into 64-bit words (pixel p
/// is bit p % 64 of word p / 64; padding bits are zero).
class BinaryImageDataset {
 public:
  enum class Split { Training, Evaluation };

  BinaryImageDataset(std::size_t rows, std::size_t cols, int classes, Split split = Split::Training);

  /// `bits` holds one 0/1 value per pixel.
  void add(std::span<const std::uint8_t> bits, int label);
  void add_packed(std::span<const std::uint64_t> words, int label);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t pixels() const noexcept { return rows_ * cols_; }
  std::size_t words() const noexcept { return words_; }
  int classes() const noexcept { return classes_; }
  Split split() const noexcept { return split_; }

  std::span<const std::uint64_t> image(std::size_t i) const {
    return {bits_.data() + i * words_, words_};
  }
  int label(std::size_t i) const { return labels_[i]; }
  bool pixel(std::size_t i, std::size_t p) const {
    return (bits_[i * words_ + p / 64] >> (p % 64)) & 1U;
  }

  /// Copy of images [first, first + count), tagged with `split`.
  BinaryImageDataset slice(std::size_t first, std::size_t count, Split split) const;
  /// Class-balanced subset of `count` images: each class gets count/classes
  /// slots (remainder to the lowest labels), filled in source order.
  BinaryImageDataset balanced_prefix(std::size_t count, Split split) const;

  Provenance provenance;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t words_;
  int classes_;
  Split split_;
  std::vector<std::uint64_t> bits_;
  std::vector<int> labels_;
};

/// Builds a dataset from parsed IDX image and label arrays.
BinaryImageDataset dataset_from_idx(const IdxArray& images, const IdxArray& labels, std::uint8_t threshold,
                                    int classes, BinaryImageDataset::Split split);

struct MnistData {
  BinaryImageDataset train;
  BinaryImageDataset test;
};

/// Reads the four standard MNIST files from `dir`.
MnistData load_mnist(const std::filesystem::path& dir, std::uint8_t threshold = 128);

/// TPR_MNIST_DIR if set, else the build-time default (may be empty).
std::filesystem::path default_mnist_dir();

}  // namespace tpr
