#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wmlab/rng.hpp"

namespace wmlab::wm {

// Fixed-length binary payload.
class WatermarkBits {
 public:
  WatermarkBits() = default;
  explicit WatermarkBits(std::vector<uint8_t> bits);
  explicit WatermarkBits(int n) : bits_(static_cast<size_t>(n), 0) {}

  static WatermarkBits random(int n, Rng& rng);
  static WatermarkBits from_hex(const std::string& hex, int n);

  int length() const { return static_cast<int>(bits_.size()); }
  uint8_t bit(int j) const { return bits_[static_cast<size_t>(j)]; }
  void set(int j, uint8_t v);
  const std::vector<uint8_t>& bits() const { return bits_; }

  WatermarkBits inverted() const;
  std::string to_hex() const;  // MSB-first nibbles, zero-padded to 4-bit boundary

  bool operator==(const WatermarkBits& o) const { return bits_ == o.bits_; }

 private:
  std::vector<uint8_t> bits_;
};

// fraction of positions where two equal-length bitstrings agree
double bitwise_accuracy(const WatermarkBits& w1, const WatermarkBits& w2);

}  // namespace wmlab::wm
