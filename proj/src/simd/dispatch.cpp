#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kkf/simd/spectral_ops.hpp"

namespace kkf::simd {

namespace {

const SpectralOps* initial_choice() noexcept {
  if (const char* env = std::getenv("KKF_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return &scalar_ops();
  }
  if (const SpectralOps* v = avx2_ops()) return v;
  return &scalar_ops();
}

std::atomic<const SpectralOps*>& slot() noexcept {
  static std::atomic<const SpectralOps*> current{initial_choice()};
  return current;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

const SpectralOps& active() noexcept { return *slot().load(std::memory_order_acquire); }

void select(Isa isa) noexcept {
  const SpectralOps* ops = &scalar_ops();
  if (isa == Isa::Avx2 && avx2_ops() != nullptr) ops = avx2_ops();
  slot().store(ops, std::memory_order_release);
}

}  // namespace kkf::simd
