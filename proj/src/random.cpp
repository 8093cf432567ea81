#include "adrsig/random.hpp"

namespace adrsig {

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(base ^ 0x6a09e667f3bcc909ULL);
  for (auto index : path) h = mix64(h ^ mix64(index + 0x3c6ef372fe94f82bULL));
  return h;
}

}  // namespace adrsig
