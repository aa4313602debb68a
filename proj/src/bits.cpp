#include "wmlab/bits.hpp"

#include <stdexcept>

namespace wmlab::wm {

WatermarkBits::WatermarkBits(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
  if (bits_.empty()) throw std::invalid_argument("WatermarkBits: length must be >= 1");
  for (uint8_t b : bits_)
    if (b > 1) throw std::invalid_argument("WatermarkBits: elements must be 0 or 1");
}

WatermarkBits WatermarkBits::random(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("WatermarkBits: length must be >= 1");
  std::vector<uint8_t> b(static_cast<size_t>(n));
  for (auto& x : b) x = static_cast<uint8_t>(rng.bit());
  return WatermarkBits(std::move(b));
}

WatermarkBits WatermarkBits::from_hex(const std::string& hex, int n) {
  if (n < 1) throw std::invalid_argument("WatermarkBits: length must be >= 1");
  const int nibbles = (n + 3) / 4;
  if (static_cast<int>(hex.size()) != nibbles)
    throw std::invalid_argument("WatermarkBits::from_hex: wrong hex length");
  std::vector<uint8_t> b(static_cast<size_t>(n), 0);
  for (int j = 0; j < n; ++j) {
    const char c = hex[static_cast<size_t>(j / 4)];
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw std::invalid_argument("WatermarkBits::from_hex: bad character");
    b[static_cast<size_t>(j)] = static_cast<uint8_t>((v >> (3 - j % 4)) & 1);
  }
  return WatermarkBits(std::move(b));
}

void WatermarkBits::set(int j, uint8_t v) {
  if (v > 1) throw std::invalid_argument("WatermarkBits::set: bit must be 0 or 1");
  bits_[static_cast<size_t>(j)] = v;
}

WatermarkBits WatermarkBits::inverted() const {
  std::vector<uint8_t> b(bits_.size());
  for (size_t j = 0; j < bits_.size(); ++j) b[j] = static_cast<uint8_t>(1 - bits_[j]);
  return WatermarkBits(std::move(b));
}

std::string WatermarkBits::to_hex() const {
  static const char* hex = "0123456789abcdef";
  const int n = length();
  std::string s(static_cast<size_t>((n + 3) / 4), '0');
  for (int j = 0; j < n; ++j) {
    const int nib = j / 4;
    int v = hex[0];
    v = s[static_cast<size_t>(nib)];
    v = (v >= 'a') ? v - 'a' + 10 : v - '0';
    v |= bits_[static_cast<size_t>(j)] << (3 - j % 4);
    s[static_cast<size_t>(nib)] = hex[v];
  }
  return s;
}

double bitwise_accuracy(const WatermarkBits& w1, const WatermarkBits& w2) {
  if (w1.length() != w2.length())
    throw std::invalid_argument("bitwise_accuracy: length mismatch");
  int match = 0;
  for (int j = 0; j < w1.length(); ++j)
    if (w1.bit(j) == w2.bit(j)) ++match;
  return static_cast<double>(match) / static_cast<double>(w1.length());
}

}  // namespace wmlab::wm
