#include <vector>

#include "whisker/errors.hpp"
#include "whisker/vision.hpp"

namespace whisker::vision {

KernelAnchor kernel_anchor(int kernel) {
  if (kernel < 1) throw ContractError("erosion kernel must be >= 1");
  return {-(kernel / 2), kernel - 1 - kernel / 2};
}

namespace {

// out[i] = 1 iff in[i+lo .. i+hi] are all 1 (indices outside [0, n) count as 0).
void erode_line(const std::uint8_t* in, std::size_t stride, int n, KernelAnchor a,
                std::uint8_t* out, std::vector<int>& prefix) {
  prefix.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + in[static_cast<std::size_t>(i) * stride];
  const int width = a.hi - a.lo + 1;
  for (int i = 0; i < n; ++i) {
    const int lo = i + a.lo, hi = i + a.hi;
    bool on = lo >= 0 && hi < n && prefix[hi + 1] - prefix[lo] == width;
    out[static_cast<std::size_t>(i) * stride] = on ? 1 : 0;
  }
}

}  // namespace

BinaryImage erode(const BinaryImage& mask, int kernel) {
  const KernelAnchor a = kernel_anchor(kernel);
  BinaryImage rows(mask.width, mask.height);
  BinaryImage out(mask.width, mask.height);
  std::vector<int> prefix;
  for (int y = 0; y < mask.height; ++y) {
    const std::size_t off = static_cast<std::size_t>(y) * mask.width;
    erode_line(mask.bits.data() + off, 1, mask.width, a, rows.bits.data() + off, prefix);
  }
  for (int x = 0; x < mask.width; ++x)
    erode_line(rows.bits.data() + x, static_cast<std::size_t>(mask.width), mask.height, a,
               out.bits.data() + x, prefix);
  return out;
}

}  // namespace whisker::vision
