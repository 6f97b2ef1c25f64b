#include "qsc/xor_kernel.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define QSC_ARCH_X86_64 1
#include <immintrin.h>
#elif defined(__aarch64__)
#define QSC_ARCH_AARCH64 1
#include <arm_neon.h>
#endif

namespace qsc {

void xor_bytes_scalar(std::uint8_t* dst, const std::uint8_t* a,
                      const std::uint8_t* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] ^ b[i];
}

namespace {

#if QSC_ARCH_X86_64
__attribute__((target("avx2"))) void xor_bytes_avx2(std::uint8_t* dst,
                                                    const std::uint8_t* a,
                                                    const std::uint8_t* b,
                                                    std::size_t n) {
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i),
                            _mm256_xor_si256(va, vb));
    }
    xor_bytes_scalar(dst + i, a + i, b + i, n - i);
}
#endif

#if QSC_ARCH_AARCH64
void xor_bytes_neon(std::uint8_t* dst, const std::uint8_t* a,
                    const std::uint8_t* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        uint8x16_t va = vld1q_u8(a + i);
        uint8x16_t vb = vld1q_u8(b + i);
        vst1q_u8(dst + i, veorq_u8(va, vb));
    }
    xor_bytes_scalar(dst + i, a + i, b + i, n - i);
}
#endif

using XorFn = void (*)(std::uint8_t*, const std::uint8_t*, const std::uint8_t*,
                       std::size_t);

struct Dispatch {
    XorFn fn;
    std::string_view name;
};

Dispatch pick_kernel() {
#if QSC_ARCH_X86_64
    if (__builtin_cpu_supports("avx2")) return {xor_bytes_avx2, "avx2"};
#elif QSC_ARCH_AARCH64
    return {xor_bytes_neon, "neon"};
#endif
    return {xor_bytes_scalar, "scalar"};
}

const Dispatch& dispatch() {
    static const Dispatch d = pick_kernel();
    return d;
}

}  // namespace

void xor_bytes(std::uint8_t* dst, const std::uint8_t* a, const std::uint8_t* b,
               std::size_t n) {
    dispatch().fn(dst, a, b, n);
}

std::string_view xor_kernel_name() { return dispatch().name; }

}  // namespace qsc
