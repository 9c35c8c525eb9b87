#include <doctest.h>

#include <cmath>
#include <set>

#include "perturb/parallel.hpp"
#include "perturb/rng.hpp"

using namespace perturb;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, A2{0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, A2{0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams reproduce and differ") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    RngStream c(42, 8);
    int same_c = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        CHECK(x == b());
        same_c += x == c() ? 1 : 0;
    }
    CHECK(same_c == 0);
}

TEST_CASE("uniform draws lie in range with the right mean") {
    RngStream r(1, 1);
    double s = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = r.uniform_pos();
        REQUIRE(v > 0.0);
        REQUIRE(v <= 1.0);
        s += u;
    }
    CHECK(std::abs(s / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n) + 1e-12);
}

TEST_CASE("split children are distinct streams") {
    RngStream p(3, 0);
    std::set<std::uint64_t> ids;
    for (std::uint64_t t = 0; t < 100; ++t) ids.insert(p.split(t).stream());
    CHECK(ids.size() == 100);
}

TEST_CASE("mc_mean is bit-identical across worker counts") {
    McPlan plan;
    plan.samples = 20000;
    plan.seed = 9;
    plan.chunk = 512;
    auto body = [](RngStream& rng) { return std::exp(rng.uniform()); };
    plan.workers = 1;
    const auto e1 = mc_mean(plan, tag_of("w"), body);
    plan.workers = 3;
    const auto e3 = mc_mean(plan, tag_of("w"), body);
    CHECK(e1.mean == e3.mean);
    CHECK(e1.se == e3.se);
    CHECK(std::abs(e1.mean - (std::exp(1.0) - 1.0)) < 3.0 * e1.se);
}

TEST_CASE("running statistics merge equals sequential accumulation") {
    RngStream r(5, 5);
    RunningStats all, left, right;
    for (int i = 0; i < 1000; ++i) {
        const double x = r.uniform() * 10.0;
        all.add(x);
        (i < 400 ? left : right).add(x);
    }
    left.merge(right);
    CHECK(left.count() == all.count());
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-14));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

TEST_CASE("pooled estimate of chunk statistics") {
    std::vector<RunningStats> parts(4);
    const double means[4] = {1.0, 2.0, 3.0, 4.0};
    for (int i = 0; i < 4; ++i) {
        parts[i].add(means[i]);
        parts[i].add(means[i]);
    }
    const auto e = pooled_estimate(parts);
    CHECK(e.mean == doctest::Approx(2.5));
    // Samples 1,1,2,2,3,3,4,4: variance 10/7, se = sqrt(10/7 / 8).
    CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 28.0)));
}
