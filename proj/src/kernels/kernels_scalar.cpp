#include "perturb/kernels.hpp"

#include <cmath>
#include <limits>

namespace perturb::kernels {
namespace {

// Knuth's TwoSum: s + e == a + b exactly.
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double z = s - a;
    e = (a - (s - z)) + (b - z);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot_compensated_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = a[i] * b[i];
        const double pe = std::fma(a[i], b[i], -p);
        double e;
        two_sum(s, p, s, e);
        c += e + pe;
    }
    return s + c;
}

double sum_compensated_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e;
        two_sum(s, a[i], s, e);
        c += e;
    }
    return s + c;
}

// Comparisons are written to match _mm256_max_pd(x, acc) lane semantics.
double max_value_scalar(const double* a, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = a[i] > m ? a[i] : m;
    return m;
}

void prefix_max_scalar(const double* a, double* out, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        m = a[i] > m ? a[i] : m;
        out[i] = m;
    }
}

void suffix_max_scalar(const double* a, double* out, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = n; i-- > 0;) {
        m = a[i] > m ? a[i] : m;
        out[i] = m;
    }
}

double sqrt_gap_sum_scalar(const double* w, const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::sqrt(a[i]) - std::sqrt(b[i]);
        acc += w[i] * d * d;
    }
    return acc;
}

double unit_gap_sum_scalar(const double* w, const double* h, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = 1.0 - h[i];
        acc += w[i] * d * d;
    }
    return acc;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{
    Isa::scalar,          "scalar",
    &dot_scalar,          &dot_compensated_scalar, &sum_compensated_scalar,
    &max_value_scalar,    &prefix_max_scalar,      &suffix_max_scalar,
    &sqrt_gap_sum_scalar, &unit_gap_sum_scalar,
};
}  // namespace detail

}  // namespace perturb::kernels
