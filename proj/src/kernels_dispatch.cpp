#include <cstdlib>
#include <string>

#include "torsmink/kernels.hpp"

namespace torsmink::kern {
namespace {

const Backend& choose() {
    const char* force = std::getenv("TORSMINK_SIMD");
    std::string want = force ? force : "auto";
    if (want == "scalar") return scalar_backend();
#if defined(TORSMINK_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
    const bool cpu_ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    if (want == "avx2") {
        if (cpu_ok) return avx2_backend();
        return scalar_backend(); // requested but unavailable; degrade quietly
    }
    if (cpu_ok) return avx2_backend();
#endif
    return scalar_backend();
}

} // namespace

const Backend& active() {
    static const Backend& b = choose();
    return b;
}

std::string active_name() { return active().name; }

} // namespace torsmink::kern
