// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Culprit Authors

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense float32 kernels used by the embedding trainer and the dense
// vectorizer. Each kernel has a portable scalar reference and an AVX2/FMA
// variant; the active variant is chosen once at startup from CPUID and can be
// pinned with CULPRIT_SIMD=scalar|avx2 or force_isa().

namespace culprit::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// True when the binary was built with the AVX2 variant and the CPU runs it.
bool avx2_supported();

Isa active_isa();

/// Overrides dispatch for the rest of the process. Requesting avx2 on a CPU
/// without it throws UsageError.
void force_isa(Isa isa);

namespace scalar {
float dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void scale(float alpha, float* x, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define CULPRIT_HAVE_AVX2_KERNELS 1
namespace avx2 {
float dot(const float* a, const float* b, std::size_t n);
void axpy(float alpha, const float* x, float* y, std::size_t n);
void scale(float alpha, float* x, std::size_t n);
} // namespace avx2
#endif

// Dispatched entry points. Spans must have equal extents.
float dot(std::span<const float> a, std::span<const float> b);
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void scale(float alpha, std::span<float> x);

} // namespace culprit::simd
