#include <cstdlib>
#include <string_view>

#include "bsch/kernels.hpp"

namespace bsch::kernels {
namespace {

struct Selection {
    const KernelTable* table;
    Isa isa;
};

Selection select() {
    const char* env = std::getenv("BSCH_SIMD");
    const bool force_scalar = env != nullptr && std::string_view(env) == "scalar";
    if (!force_scalar && cpu_has_avx2() && avx2_table() != nullptr)
        return {avx2_table(), Isa::Avx2};
    return {&scalar_table(), Isa::Scalar};
}

const Selection& selection() {
    static const Selection s = select();
    return s;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& active() { return *selection().table; }

Isa active_isa() { return selection().isa; }

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace bsch::kernels
