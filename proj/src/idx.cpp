#include "tpr/idx.hpp"

#include "tpr/error.hpp"

#include <limits>
#include <sstream>

namespace tpr {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorKind::TruncatedPayload, "file shorter than the magic number");
  IdxArray out;
  out.magic = read_be32(bytes, 0);
  std::size_t ndims = 0;
  if (out.magic == kIdxImagesMagic) {
    ndims = 3;
  } else if (out.magic == kIdxLabelsMagic) {
    ndims = 1;
  } else {
    std::ostringstream msg;
    msg << "unsupported magic 0x" << std::hex << out.magic;
    throw Error(ErrorKind::BadMagic, msg.str());
  }
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) throw Error(ErrorKind::TruncatedPayload, "header truncated");

  std::size_t count = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    const std::uint32_t n = read_be32(bytes, 4 + 4 * d);
    out.dims.push_back(n);
    if (n != 0 && count > (std::numeric_limits<std::size_t>::max() - header) / n) {
      throw Error(ErrorKind::DimensionOverflow, "element count overflows");
    }
    count *= n;
  }
  const std::size_t payload = bytes.size() - header;
  if (payload != count) {
    std::ostringstream msg;
    msg << "expected " << count << " payload bytes, found " << payload;
    throw Error(ErrorKind::TruncatedPayload, msg.str());
  }
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return out;
}

}  // namespace tpr
