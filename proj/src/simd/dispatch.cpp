#include "sustain/simd/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace sustain::simd {

const KernelTable& active_kernels() {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        const char* env = std::getenv("SUSTAIN_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
        if (const KernelTable* avx2 = avx2_kernels()) return *avx2;
        return scalar_kernels();
    }();
    return chosen;
}

} // namespace sustain::simd
