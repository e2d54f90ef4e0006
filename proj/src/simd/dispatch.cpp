#include "wgflow/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace wgflow::simd {

#if defined(WGFLOW_HAVE_AVX2_TU)
const KernelTable& avx2_kernel_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(WGFLOW_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& automatic_choice() {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        const char* env = std::getenv("WGFLOW_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
        if (const KernelTable* t = avx2_kernels()) return *t;
        return scalar_kernels();
    }();
    return chosen;
}

std::atomic<const KernelTable*> forced{nullptr};

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(WGFLOW_HAVE_AVX2_TU)
    static const bool supported = cpu_has_avx2();
    return supported ? &avx2_kernel_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active_kernels() {
    if (const KernelTable* t = forced.load(std::memory_order_acquire)) return *t;
    return automatic_choice();
}

void override_kernels(const KernelTable* table) { forced.store(table, std::memory_order_release); }

}  // namespace wgflow::simd
