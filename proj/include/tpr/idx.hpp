#pragma once

// IDX container (big-endian magic, u32 dimension sizes, raw u8 payload).
// Only the two layouts used by MNIST are accepted.

#include <cstdint>
#include <span>
#include <vector>

namespace tpr {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

/// Errors: BadMagic, TruncatedPayload (short header or payload, or trailing
/// bytes), DimensionOverflow (element count does not fit in memory).
IdxArray parse_idx(std::span<const std::uint8_t> bytes);

}  // namespace tpr
