#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace evc {

// Per-frame scalar track: F0 in Hz (0 on unvoiced frames), log energy, or
// unit durations in frames.
struct Contour {
  std::vector<double> values;
  std::size_t frame_hop = 256;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

// 1 = voiced.
struct VuvMask {
  std::vector<std::uint8_t> flags;

  std::size_t size() const { return flags.size(); }
  std::size_t num_voiced() const {
    std::size_t n = 0;
    for (auto f : flags) n += f ? 1 : 0;
    return n;
  }
};

}  // namespace evc
