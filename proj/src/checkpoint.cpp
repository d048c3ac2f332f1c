#include "tpr/cnn.hpp"

#include "tpr/digest.hpp"
#include "tpr/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace tpr {
namespace {

constexpr char kMagic[8] = {'T', 'P', 'R', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kDigestChars = 64;

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const std::string& in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{static_cast<unsigned char>(in[offset + i])} << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& net, const Parameters& params) {
  if (params.size() != net.parameter_count()) throw Error(ErrorKind::ShapeMismatch, "parameter count mismatch");
  std::string out(kMagic, sizeof kMagic);
  put_le(out, kVersion, 4);
  out += sha256_hex(net.describe());
  put_le(out, params.size(), 8);
  for (double v : params) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f.write(out.data(), static_cast<std::streamsize>(out.size()))) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  }
}

Parameters load_checkpoint(const std::filesystem::path& path, const NetworkSpec& net) {
  const std::string in = read_file(path);
  const std::size_t header = sizeof kMagic + 4 + kDigestChars + 8;
  if (in.size() < sizeof kMagic || std::memcmp(in.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorKind::BadMagic, path.string() + " is not a checkpoint");
  }
  if (in.size() < header) throw Error(ErrorKind::TruncatedPayload, "checkpoint header truncated");
  if (get_le(in, sizeof kMagic, 4) != kVersion) throw Error(ErrorKind::BadMagic, "unsupported checkpoint version");
  if (in.compare(sizeof kMagic + 4, kDigestChars, sha256_hex(net.describe())) != 0) {
    throw Error(ErrorKind::ShapeMismatch, "checkpoint was written for a different network");
  }
  const std::uint64_t count = get_le(in, sizeof kMagic + 4 + kDigestChars, 8);
  if (count != net.parameter_count()) throw Error(ErrorKind::ShapeMismatch, "parameter count mismatch");
  if ((in.size() - header) / 8 < count || in.size() - header != 8 * count) {
    throw Error(ErrorKind::TruncatedPayload, "checkpoint payload has the wrong length");
  }
  Parameters params(count);
  for (std::size_t i = 0; i < count; ++i) params[i] = std::bit_cast<double>(get_le(in, header + 8 * i, 8));
  return params;
}

}  // namespace tpr
