#include "tsens/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace tsens::kernels {

bool avx2_available() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Backend& active() {
    static const Backend& selected = [upper = std::getenv("TSENS_KERNEL")]() -> const Backend& {
        if (upper != nullptr) {
            if (std::strcmp(upper, "scalar") == 0) return scalar_backend();
            if (std::strcmp(upper, "avx2") == 0 && avx2_available()) return avx2_backend();
        }
        return avx2_available() ? avx2_backend() : scalar_backend();
    }();
    return selected;
}

} // namespace tsens::kernels
