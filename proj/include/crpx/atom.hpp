#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace crpx {

/// Unscaled record of one block: its first N elements k[0] < ... < k[N-1]
/// and the step m > k[N-1] at which it received element N+1.
struct BlockAtom {
  std::vector<std::uint64_t> k;
  std::uint64_t m = 0;

  std::size_t order() const noexcept { return k.size(); }

  bool well_ordered() const noexcept {
    if (k.empty() || k.front() == 0) return false;
    for (std::size_t i = 1; i < k.size(); ++i)
      if (!(k[i - 1] < k[i])) return false;
    return k.back() < m;
  }

  void check() const {
    if (!well_ordered()) throw std::invalid_argument("BlockAtom: need 1 <= k1 < ... < kN < m");
  }

  friend bool operator==(const BlockAtom&, const BlockAtom&) = default;
};

/// Set partition with blocks listed in ascending order and sorted by their
/// least elements.
using SetPartition = std::vector<std::vector<std::uint64_t>>;

}  // namespace crpx
