#include "tpr/dataset.hpp"
#include "tpr/digest.hpp"
#include "tpr/error.hpp"
#include "tpr/idx.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace tpr;

namespace {

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

std::vector<std::uint8_t> idx_bytes(std::uint32_t magic, const std::vector<std::uint32_t>& dims,
                                    const std::vector<std::uint8_t>& payload) {
  auto out = be32(magic);
  for (auto d : dims) {
    auto b = be32(d);
    out.insert(out.end(), b.begin(), b.end());
  }
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

ErrorKind parse_error(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_idx(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("parse_idx accepted malformed input");
  return ErrorKind::IoError;
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("idx fixtures") {
  const auto img = parse_idx(idx_bytes(0x803, {1, 2, 2}, {0, 255, 128, 7}));
  CHECK(img.magic == kIdxImagesMagic);
  CHECK(img.dims == std::vector<std::uint32_t>{1, 2, 2});
  CHECK(img.data == std::vector<std::uint8_t>{0, 255, 128, 7});

  const auto lab = parse_idx(idx_bytes(0x801, {3}, {0, 9, 4}));
  CHECK(lab.dims == std::vector<std::uint32_t>{3});
  CHECK(lab.data == std::vector<std::uint8_t>{0, 9, 4});

  CHECK(parse_idx(idx_bytes(0x803, {0, 28, 28}, {})).data.empty());
}

TEST_CASE("idx rejects malformed input") {
  CHECK(parse_error({0, 0}) == ErrorKind::TruncatedPayload);
  CHECK(parse_error(idx_bytes(0x802, {3}, {1, 2, 3})) == ErrorKind::BadMagic);
  CHECK(parse_error(idx_bytes(0x0D03, {1, 2, 2}, {0, 1, 2, 3})) == ErrorKind::BadMagic);
  CHECK(parse_error(idx_bytes(0x803, {1, 2}, {})) == ErrorKind::TruncatedPayload);
  CHECK(parse_error(idx_bytes(0x803, {1, 2, 2}, {0, 1, 2})) == ErrorKind::TruncatedPayload);
  CHECK(parse_error(idx_bytes(0x801, {3}, {0, 1, 2, 3})) == ErrorKind::TruncatedPayload);
  CHECK(parse_error(idx_bytes(0x803, {0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu}, {})) == ErrorKind::DimensionOverflow);
}

TEST_CASE("binarization") {
  const std::vector<std::uint8_t> zeros(9, 0), full(9, 255);
  for (auto b : binarize(zeros, 128)) CHECK(b == 0);
  for (auto b : binarize(full, 128)) CHECK(b == 1);
  CHECK(binarize(std::vector<std::uint8_t>{0, 255, 128, 7}, 128) == std::vector<std::uint8_t>{0, 1, 1, 0});
  CHECK(binarize(std::vector<std::uint8_t>{0, 255, 128, 7}, 7) == std::vector<std::uint8_t>{0, 1, 1, 1});
}

TEST_CASE("packed dataset") {
  BinaryImageDataset ds(10, 10, 3);
  std::vector<std::uint8_t> bits(100, 0);
  bits[0] = bits[63] = bits[64] = bits[99] = 1;
  ds.add(bits, 2);
  CHECK(ds.words() == 2);
  CHECK(ds.size() == 1);
  CHECK(ds.label(0) == 2);
  for (std::size_t p = 0; p < 100; ++p) CHECK(ds.pixel(0, p) == (bits[p] == 1));

  // padding bits are cleared
  ds.add_packed(std::vector<std::uint64_t>{~0ULL, ~0ULL}, 1);
  CHECK(ds.image(1)[1] == (1ULL << 36) - 1);

  CHECK_THROWS_AS(ds.add(std::vector<std::uint8_t>(99, 0), 0), Error);
  CHECK_THROWS_AS(ds.add(bits, 3), Error);
  CHECK_THROWS_AS(ds.slice(1, 2, BinaryImageDataset::Split::Evaluation), Error);
  const auto tail = ds.slice(1, 1, BinaryImageDataset::Split::Evaluation);
  CHECK(tail.size() == 1);
  CHECK(tail.label(0) == 1);
  CHECK(tail.split() == BinaryImageDataset::Split::Evaluation);
}

TEST_CASE("balanced subset") {
  BinaryImageDataset ds(1, 4, 3);
  const int labels[] = {0, 0, 0, 1, 2, 1, 2, 0, 1};
  for (int i = 0; i < 9; ++i) {
    std::vector<std::uint8_t> bits{static_cast<std::uint8_t>(i & 1), static_cast<std::uint8_t>((i >> 1) & 1),
                                   static_cast<std::uint8_t>((i >> 2) & 1), static_cast<std::uint8_t>((i >> 3) & 1)};
    ds.add(bits, labels[i]);
  }
  const auto b = ds.balanced_prefix(7, BinaryImageDataset::Split::Evaluation);
  std::vector<int> got;
  for (std::size_t i = 0; i < b.size(); ++i) got.push_back(b.label(i));
  CHECK(got == std::vector<int>{0, 0, 0, 1, 2, 1, 2});
  CHECK_THROWS_AS(ds.balanced_prefix(9, BinaryImageDataset::Split::Evaluation), Error);
}

TEST_CASE("dataset from idx files") {
  const auto dir = std::filesystem::temp_directory_path() / "tpr_idx_fixture";
  std::filesystem::create_directories(dir);
  const auto images = idx_bytes(0x803, {2, 2, 2}, {0, 255, 128, 7, 200, 0, 0, 200});
  write_bytes(dir / "train-images-idx3-ubyte", images);
  write_bytes(dir / "train-labels-idx1-ubyte", idx_bytes(0x801, {2}, {3, 5}));
  write_bytes(dir / "t10k-images-idx3-ubyte", images);
  write_bytes(dir / "t10k-labels-idx1-ubyte", idx_bytes(0x801, {2}, {1, 2}));

  const auto data = load_mnist(dir);
  CHECK(data.train.size() == 2);
  CHECK(data.train.rows() == 2);
  CHECK(data.train.label(1) == 5);
  CHECK(data.test.label(0) == 1);
  CHECK(data.test.split() == BinaryImageDataset::Split::Evaluation);
  CHECK(data.train.pixel(0, 1));
  CHECK(data.train.pixel(0, 2));
  CHECK_FALSE(data.train.pixel(0, 3));
  CHECK(data.train.provenance.images_sha256 == sha256_hex(images));
  CHECK(data.train.provenance.threshold == 128);

  write_bytes(dir / "t10k-labels-idx1-ubyte", idx_bytes(0x801, {2}, {1}));
  try {
    load_mnist(dir);
    FAIL("truncated label file accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncatedPayload);
    CHECK(std::string(e.what()).find("t10k-labels") != std::string::npos);
  }
  std::filesystem::remove(dir / "t10k-labels-idx1-ubyte");
  try {
    load_mnist(dir);
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("digest") {
  CHECK(sha256_hex(std::string("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string()) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("MNIST files") {
  const auto dir = default_mnist_dir();
  if (dir.empty() || !std::filesystem::exists(dir / "train-images-idx3-ubyte")) {
    MESSAGE("MNIST directory not available; skipping");
    return;
  }
  const auto data = load_mnist(dir);
  CHECK(data.train.size() == 60000);
  CHECK(data.test.size() == 10000);
  CHECK(data.train.rows() == 28);
  CHECK(data.train.cols() == 28);
  std::vector<int> counts(10, 0);
  for (std::size_t i = 0; i < data.test.size(); ++i) ++counts[static_cast<std::size_t>(data.test.label(i))];
  for (int c : counts) CHECK(c > 800);
}
