// Compiled with -mavx2 -mfma; only reached through the dispatch table after a
// CPU feature check.
#include "perturb/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

namespace perturb::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

inline void two_sum_v(__m256d a, __m256d b, __m256d& s, __m256d& e) {
    s = _mm256_add_pd(a, b);
    const __m256d z = _mm256_sub_pd(s, a);
    e = _mm256_add_pd(_mm256_sub_pd(a, _mm256_sub_pd(s, z)), _mm256_sub_pd(b, z));
}

inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double z = s - a;
    e = (a - (s - z)) + (b - z);
}

// Folds four (sum, error) lanes into one value with exact pairwise TwoSums.
inline double fold_compensated(__m256d s, __m256d c) {
    alignas(32) double sl[4];
    alignas(32) double cl[4];
    _mm256_store_pd(sl, s);
    _mm256_store_pd(cl, c);
    double acc = 0.0;
    double err = 0.0;
    for (int k = 0; k < 4; ++k) {
        double e;
        two_sum(acc, sl[k], acc, e);
        err += e + cl[k];
    }
    return acc + err;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double res = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) res += a[i] * b[i];
    return res;
}

double dot_compensated_avx2(const double* a, const double* b, std::size_t n) {
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        const __m256d p = _mm256_mul_pd(va, vb);
        const __m256d pe = _mm256_fmsub_pd(va, vb, p);
        __m256d e;
        two_sum_v(s, p, s, e);
        c = _mm256_add_pd(c, _mm256_add_pd(e, pe));
    }
    // Tail folded in the scalar compensated recurrence.
    alignas(32) double sl[4];
    alignas(32) double cl[4];
    _mm256_store_pd(sl, s);
    _mm256_store_pd(cl, c);
    double acc = 0.0;
    double err = 0.0;
    for (int k = 0; k < 4; ++k) {
        double e;
        two_sum(acc, sl[k], acc, e);
        err += e + cl[k];
    }
    for (; i < n; ++i) {
        const double p = a[i] * b[i];
        const double pe = std::fma(a[i], b[i], -p);
        double e;
        two_sum(acc, p, acc, e);
        err += e + pe;
    }
    return acc + err;
}

double sum_compensated_avx2(const double* a, std::size_t n) {
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d e;
        two_sum_v(s, _mm256_loadu_pd(a + i), s, e);
        c = _mm256_add_pd(c, e);
    }
    double acc = fold_compensated(s, c);
    double err = 0.0;
    for (; i < n; ++i) {
        double e;
        two_sum(acc, a[i], acc, e);
        err += e;
    }
    return acc + err;
}

double max_value_avx2(const double* a, std::size_t n) {
    const double ninf = -std::numeric_limits<double>::infinity();
    __m256d m = _mm256_set1_pd(ninf);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) m = _mm256_max_pd(_mm256_loadu_pd(a + i), m);
    double res = hmax(m);
    for (; i < n; ++i) res = a[i] > res ? a[i] : res;
    return res;
}

// In-register inclusive scan: two shift-and-max steps, then the running carry.
void prefix_max_avx2(const double* a, double* out, std::size_t n) {
    double carry = -std::numeric_limits<double>::infinity();
    __m256d vcarry = _mm256_set1_pd(carry);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_loadu_pd(a + i);
        x = _mm256_max_pd(x, _mm256_permute4x64_pd(x, _MM_SHUFFLE(2, 1, 0, 0)));
        x = _mm256_max_pd(x, _mm256_permute4x64_pd(x, _MM_SHUFFLE(1, 0, 0, 0)));
        x = _mm256_max_pd(x, vcarry);
        _mm256_storeu_pd(out + i, x);
        vcarry = _mm256_permute4x64_pd(x, _MM_SHUFFLE(3, 3, 3, 3));
    }
    carry = _mm256_cvtsd_f64(vcarry);
    for (; i < n; ++i) {
        carry = a[i] > carry ? a[i] : carry;
        out[i] = carry;
    }
}

void suffix_max_avx2(const double* a, double* out, std::size_t n) {
    double carry = -std::numeric_limits<double>::infinity();
    std::size_t rem = n % 4;
    // Scalar tail first (the right end), then full blocks right to left.
    for (std::size_t i = n; i-- > n - rem;) {
        carry = a[i] > carry ? a[i] : carry;
        out[i] = carry;
    }
    __m256d vcarry = _mm256_set1_pd(carry);
    for (std::size_t i = n - rem; i >= 4; i -= 4) {
        const std::size_t base = i - 4;
        __m256d x = _mm256_loadu_pd(a + base);
        x = _mm256_max_pd(x, _mm256_permute4x64_pd(x, _MM_SHUFFLE(3, 3, 2, 1)));
        x = _mm256_max_pd(x, _mm256_permute4x64_pd(x, _MM_SHUFFLE(3, 3, 3, 2)));
        x = _mm256_max_pd(x, vcarry);
        _mm256_storeu_pd(out + base, x);
        vcarry = _mm256_permute4x64_pd(x, _MM_SHUFFLE(0, 0, 0, 0));
    }
}

double sqrt_gap_sum_avx2(const double* w, const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_sqrt_pd(_mm256_loadu_pd(a + i)),
                                        _mm256_sqrt_pd(_mm256_loadu_pd(b + i)));
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), d), d, acc);
    }
    double res = hsum(acc);
    for (; i < n; ++i) {
        const double d = std::sqrt(a[i]) - std::sqrt(b[i]);
        res += w[i] * d * d;
    }
    return res;
}

double unit_gap_sum_avx2(const double* w, const double* h, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(one, _mm256_loadu_pd(h + i));
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), d), d, acc);
    }
    double res = hsum(acc);
    for (; i < n; ++i) {
        const double d = 1.0 - h[i];
        res += w[i] * d * d;
    }
    return res;
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{
    Isa::avx2,          "avx2",
    &dot_avx2,          &dot_compensated_avx2, &sum_compensated_avx2,
    &max_value_avx2,    &prefix_max_avx2,      &suffix_max_avx2,
    &sqrt_gap_sum_avx2, &unit_gap_sum_avx2,
};
}  // namespace detail

}  // namespace perturb::kernels
