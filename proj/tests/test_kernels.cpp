#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "generators.hpp"
#include "perturb/kernels.hpp"

using namespace perturb::kernels;

namespace {

long double dot_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
    return s;
}

}  // namespace

TEST_CASE("scalar kernels match long-double oracles") {
    const auto& t = scalar_table();
    for (std::uint64_t c = 0; c < 40; ++c) {
        gen::Gen g(c);
        const auto n = static_cast<std::size_t>(g.integer(0, 70));
        const auto a = g.doubles(n, -1.0, 1.0);
        const auto b = g.doubles(n, -1.0, 1.0);
        const double ref = static_cast<double>(dot_oracle(a, b));
        CHECK(t.dot(a.data(), b.data(), n) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(t.dot_compensated(a.data(), b.data(), n) == doctest::Approx(ref).epsilon(1e-15));
        long double s = 0.0L;
        for (double x : a) s += x;
        CHECK(t.sum_compensated(a.data(), n) == doctest::Approx(static_cast<double>(s)).epsilon(1e-15));
    }
}

TEST_CASE("compensated sum survives cancellation") {
    const std::vector<double> v = {1e16, 1.0, -1e16, 1.0};
    CHECK(scalar_table().sum_compensated(v.data(), v.size()) == 2.0);
}

TEST_CASE("max kernels on empty and tied input") {
    const auto& t = scalar_table();
    CHECK(t.max_value(nullptr, 0) == -std::numeric_limits<double>::infinity());
    std::vector<double> v = {1.0, 3.0, 3.0, -2.0, 5.0};
    std::vector<double> pre(v.size());
    std::vector<double> suf(v.size());
    t.prefix_max(v.data(), pre.data(), v.size());
    t.suffix_max(v.data(), suf.data(), v.size());
    CHECK(pre == std::vector<double>{1.0, 3.0, 3.0, 3.0, 5.0});
    CHECK(suf == std::vector<double>{5.0, 5.0, 5.0, 5.0, 5.0});
    t.prefix_max(v.data(), v.data(), v.size());  // aliasing allowed
    CHECK(v == pre);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const KernelTable* avx = avx2_table();
    if (avx == nullptr) {
        MESSAGE("AVX2 unavailable; equivalence test skipped");
        return;
    }
    const auto& s = scalar_table();
    for (std::uint64_t c = 100; c < 200; ++c) {
        gen::Gen g(c);
        const auto n = static_cast<std::size_t>(g.integer(0, 131));
        const auto a = g.doubles(n, -3.0, 3.0);
        const auto b = g.doubles(n, -3.0, 3.0);
        const auto w = g.doubles(n, 0.0, 2.0);
        const auto pa = g.doubles(n, 0.0, 4.0);
        const auto pb = g.doubles(n, 0.0, 4.0);
        CHECK(avx->dot(a.data(), b.data(), n) == doctest::Approx(s.dot(a.data(), b.data(), n)).epsilon(1e-12));
        CHECK(avx->dot_compensated(a.data(), b.data(), n) ==
              doctest::Approx(s.dot_compensated(a.data(), b.data(), n)).epsilon(1e-15));
        CHECK(avx->sum_compensated(a.data(), n) == doctest::Approx(s.sum_compensated(a.data(), n)).epsilon(1e-15));
        CHECK(avx->max_value(a.data(), n) == s.max_value(a.data(), n));
        std::vector<double> p1(n), p2(n), q1(n), q2(n);
        avx->prefix_max(a.data(), p1.data(), n);
        s.prefix_max(a.data(), p2.data(), n);
        avx->suffix_max(a.data(), q1.data(), n);
        s.suffix_max(a.data(), q2.data(), n);
        CHECK(p1 == p2);
        CHECK(q1 == q2);
        CHECK(avx->sqrt_gap_sum(w.data(), pa.data(), pb.data(), n) ==
              doctest::Approx(s.sqrt_gap_sum(w.data(), pa.data(), pb.data(), n)).epsilon(1e-12));
        CHECK(avx->unit_gap_sum(w.data(), pa.data(), n) ==
              doctest::Approx(s.unit_gap_sum(w.data(), pa.data(), n)).epsilon(1e-12));
    }
}

TEST_CASE("dispatch picks a table with a name") {
    const auto& t = active();
    CHECK(t.name != nullptr);
    CHECK((t.isa == Isa::scalar || t.isa == Isa::avx2));
}
