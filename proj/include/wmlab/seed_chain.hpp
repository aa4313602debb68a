#pragma once

#include <cstdint>
#include <string>

namespace wmlab {

// Derives a child seed from (master, stage label, index) via a keyed hash.
// Streams depend only on their own label, so adding stages never perturbs
// existing ones.
uint64_t derive_seed(uint64_t master, const std::string& label, uint64_t index = 0);

}  // namespace wmlab
