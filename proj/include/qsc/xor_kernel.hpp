#pragma once

// Byte-wise XOR kernel used by the stream-cipher keystream application.
// This is the one data-parallel inner loop in the stack (it runs once per
// sealed or opened message, ~10^5 times during an adversarial campaign), so
// it carries a scalar reference implementation plus a vectorized variant
// selected once at startup. The two are equivalence-tested in the unit suite.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace qsc {

// dst[i] = a[i] ^ b[i]; regions may alias exactly (dst == a) but must not
// partially overlap.
void xor_bytes_scalar(std::uint8_t* dst, const std::uint8_t* a,
                      const std::uint8_t* b, std::size_t n);

// Dispatched variant (AVX2 on x86-64 when available, NEON on aarch64,
// otherwise the scalar loop).
void xor_bytes(std::uint8_t* dst, const std::uint8_t* a, const std::uint8_t* b,
               std::size_t n);

// Name of the variant the dispatcher picked: "scalar", "avx2" or "neon".
std::string_view xor_kernel_name();

}  // namespace qsc
