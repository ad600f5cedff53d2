#include "contracert/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace contracert::kern {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

const Kernels* g_active = nullptr;

const Kernels* resolve() {
    if (const char* env = std::getenv("CONTRACERT_KERNEL")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_kernels();
        if (std::strcmp(env, "avx2") == 0) return &avx2_kernels();
        throw std::runtime_error(std::string("unknown CONTRACERT_KERNEL value: ") + env);
    }
    return cpu_has_avx2() ? &avx2_kernels() : &scalar_kernels();
}

}  // namespace

const Kernels& active_kernels() {
    if (!g_active) g_active = resolve();
    return *g_active;
}

void set_active_kernels(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        g_active = &scalar_kernels();
    } else if (std::strcmp(name, "avx2") == 0) {
        g_active = &avx2_kernels();
    } else {
        throw std::invalid_argument(std::string("unknown kernel set: ") + name);
    }
}

}  // namespace contracert::kern
