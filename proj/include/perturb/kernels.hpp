#pragma once

// Data-parallel inner loops shared by the exact engine, the measure
// diagnostics and the path supremum code.  Every kernel has a scalar
// reference implementation; an AVX2/FMA variant is selected at runtime when
// the CPU supports it.  The environment variable PERTURB_ISA=scalar forces
// the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace perturb::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    const char* name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // Dot product with error-free transformations (twice-working-precision
    // accumulation); used wherever many probabilities are summed.
    double (*dot_compensated)(const double* a, const double* b, std::size_t n);
    double (*sum_compensated)(const double* a, std::size_t n);
    // Largest element; -inf for n == 0.
    double (*max_value)(const double* a, std::size_t n);
    // out[i] = max(a[0..i]) and out[i] = max(a[i..n-1]); out may alias a.
    void (*prefix_max)(const double* a, double* out, std::size_t n);
    void (*suffix_max)(const double* a, double* out, std::size_t n);
    // sum_i w[i] * (sqrt(a[i]) - sqrt(b[i]))^2
    double (*sqrt_gap_sum)(const double* w, const double* a, const double* b, std::size_t n);
    // sum_i w[i] * (1 - h[i])^2
    double (*unit_gap_sum)(const double* w, const double* h, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_table();
// Table chosen at first use (CPU features, then PERTURB_ISA override).
const KernelTable& active();

std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}
inline double dot_compensated(std::span<const double> a, std::span<const double> b) {
    return active().dot_compensated(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}
inline double sum_compensated(std::span<const double> a) {
    return active().sum_compensated(a.data(), a.size());
}
inline double max_value(std::span<const double> a) { return active().max_value(a.data(), a.size()); }
inline void prefix_max(std::span<const double> a, std::span<double> out) {
    active().prefix_max(a.data(), out.data(), a.size());
}
inline void suffix_max(std::span<const double> a, std::span<double> out) {
    active().suffix_max(a.data(), out.data(), a.size());
}

namespace detail {
extern const KernelTable kScalarTable;
#if defined(PERTURB_WITH_AVX2)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace perturb::kernels
