#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace wmlab {

// Minimal SHA-256 (FIPS 180-4), used for file digests and seed derivation.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, size_t len);
  // finalizes; the object must not be updated afterwards
  std::string hex_digest();
  void digest(uint8_t out[32]);

  static std::string hex_of(const std::string& data);
  static std::string hex_of_file(const std::string& path);

 private:
  void process_block(const uint8_t* block);
  uint32_t state_[8];
  uint64_t bit_len_ = 0;
  uint8_t buf_[64];
  size_t buf_len_ = 0;
};

}  // namespace wmlab
