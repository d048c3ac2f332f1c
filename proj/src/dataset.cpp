#include "tpr/dataset.hpp"

#include "tpr/digest.hpp"
#include "tpr/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#ifndef TPR_DEFAULT_MNIST_DIR
#define TPR_DEFAULT_MNIST_DIR ""
#endif

namespace tpr {
namespace {

IdxArray load_idx(const std::filesystem::path& path, std::string& digest) {
  const std::string raw = read_file(path);
  const std::span bytes(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
  digest = sha256_hex(bytes);
  try {
    return parse_idx(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> binarize(std::span<const std::uint8_t> image, std::uint8_t threshold) {
  std::vector<std::uint8_t> out(image.size());
  std::transform(image.begin(), image.end(), out.begin(),
                 [threshold](std::uint8_t v) { return static_cast<std::uint8_t>(v >= threshold); });
  return out;
}

BinaryImageDataset::BinaryImageDataset(std::size_t rows, std::size_t cols, int classes, Split split)
    : rows_(rows), cols_(cols), words_((rows * cols + 63) / 64), classes_(classes), split_(split) {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::ShapeMismatch, "image dimensions must be positive");
  if (classes < 1) throw Error(ErrorKind::DomainError, "class count must be >= 1");
}

void BinaryImageDataset::add(std::span<const std::uint8_t> bits, int label) {
  if (bits.size() != pixels()) {
    std::ostringstream msg;
    msg << "image has " << bits.size() << " pixels, dataset expects " << pixels();
    throw Error(ErrorKind::ShapeMismatch, msg.str());
  }
  std::vector<std::uint64_t> words(words_, 0);
  for (std::size_t p = 0; p < bits.size(); ++p) {
    if (bits[p]) words[p / 64] |= std::uint64_t{1} << (p % 64);
  }
  add_packed(words, label);
}

void BinaryImageDataset::add_packed(std::span<const std::uint64_t> words, int label) {
  if (words.size() != words_) throw Error(ErrorKind::ShapeMismatch, "packed image has wrong word count");
  if (label < 0 || label >= classes_) {
    throw Error(ErrorKind::DomainError, "label " + std::to_string(label) + " outside [0, classes)");
  }
  bits_.insert(bits_.end(), words.begin(), words.end());
  if (pixels() % 64 != 0) bits_.back() &= (std::uint64_t{1} << (pixels() % 64)) - 1;
  labels_.push_back(label);
}

BinaryImageDataset BinaryImageDataset::slice(std::size_t first, std::size_t count, Split split) const {
  if (first > size() || count > size() - first) throw Error(ErrorKind::DomainError, "slice outside dataset");
  BinaryImageDataset out(rows_, cols_, classes_, split);
  out.provenance = provenance;
  for (std::size_t i = first; i < first + count; ++i) out.add_packed(image(i), labels_[i]);
  return out;
}

BinaryImageDataset BinaryImageDataset::balanced_prefix(std::size_t count, Split split) const {
  if (count > size()) throw Error(ErrorKind::DomainError, "requested more images than available");
  const std::size_t per_class = count / static_cast<std::size_t>(classes_);
  std::size_t extra = count % static_cast<std::size_t>(classes_);
  std::vector<std::size_t> quota(static_cast<std::size_t>(classes_), per_class);
  for (std::size_t c = 0; c < quota.size() && extra > 0; ++c, --extra) ++quota[c];

  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < size() && picked.size() < count; ++i) {
    auto& q = quota[static_cast<std::size_t>(labels_[i])];
    if (q > 0) {
      --q;
      picked.push_back(i);
    }
  }
  if (picked.size() < count) throw Error(ErrorKind::DomainError, "not enough images per class for a balanced subset");
  BinaryImageDataset out(rows_, cols_, classes_, split);
  out.provenance = provenance;
  for (std::size_t i : picked) out.add_packed(image(i), labels_[i]);
  return out;
}

BinaryImageDataset dataset_from_idx(const IdxArray& images, const IdxArray& labels, std::uint8_t threshold,
                                    int classes, BinaryImageDataset::Split split) {
  if (images.magic != kIdxImagesMagic || labels.magic != kIdxLabelsMagic) {
    throw Error(ErrorKind::BadMagic, "expected an image file and a label file");
  }
  const std::size_t n = images.dims[0];
  if (labels.dims[0] != n) throw Error(ErrorKind::ShapeMismatch, "image and label counts differ");
  BinaryImageDataset out(images.dims[1], images.dims[2], classes, split);
  const std::size_t m = out.pixels();
  out.provenance.threshold = threshold;
  for (std::size_t i = 0; i < n; ++i) {
    const auto bits = binarize(std::span(images.data).subspan(i * m, m), threshold);
    out.add(bits, labels.data[i]);
  }
  return out;
}

MnistData load_mnist(const std::filesystem::path& dir, std::uint8_t threshold) {
  auto load_split = [&](const char* images_name, const char* labels_name, BinaryImageDataset::Split split) {
    Provenance prov;
    const IdxArray images = load_idx(dir / images_name, prov.images_sha256);
    const IdxArray labels = load_idx(dir / labels_name, prov.labels_sha256);
    auto ds = dataset_from_idx(images, labels, threshold, 10, split);
    prov.threshold = threshold;
    prov.source = (dir / images_name).string();
    ds.provenance = prov;
    return ds;
  };
  return {load_split("train-images-idx3-ubyte", "train-labels-idx1-ubyte", BinaryImageDataset::Split::Training),
          load_split("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", BinaryImageDataset::Split::Evaluation)};
}

std::filesystem::path default_mnist_dir() {
  if (const char* env = std::getenv("TPR_MNIST_DIR"); env != nullptr && *env != '\0') return env;
  return TPR_DEFAULT_MNIST_DIR;
}

}  // namespace tpr
