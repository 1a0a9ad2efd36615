// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#include "culprit/simd.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "culprit/error.hpp"

namespace culprit::simd {

namespace {

Isa detect() {
    if (const char* env = std::getenv("CULPRIT_SIMD")) {
        const std::string_view want(env);
        if (want == "scalar") return Isa::scalar;
        if (want == "avx2" && avx2_supported()) return Isa::avx2;
    }
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

} // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool avx2_supported() {
#if defined(CULPRIT_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2_supported()) {
        throw UsageError("avx2 kernels are not available on this machine");
    }
    current().store(isa, std::memory_order_relaxed);
}

float dot(std::span<const float> a, std::span<const float> b) {
    assert(a.size() == b.size());
#if defined(CULPRIT_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::avx2) return avx2::dot(a.data(), b.data(), a.size());
#endif
    return scalar::dot(a.data(), b.data(), a.size());
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
    assert(x.size() == y.size());
#if defined(CULPRIT_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::avx2) return avx2::axpy(alpha, x.data(), y.data(), x.size());
#endif
    scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void scale(float alpha, std::span<float> x) {
#if defined(CULPRIT_HAVE_AVX2_KERNELS)
    if (active_isa() == Isa::avx2) return avx2::scale(alpha, x.data(), x.size());
#endif
    scalar::scale(alpha, x.data(), x.size());
}

} // namespace culprit::simd
