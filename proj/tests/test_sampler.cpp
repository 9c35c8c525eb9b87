#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "perturb/sampler.hpp"

using namespace perturb;

namespace {

DiscreteMeasure dm(const SpacePtr& s, std::vector<double> m) { return DiscreteMeasure(s, std::move(m)); }

}  // namespace

TEST_CASE("Poisson counts have the right void probability and means") {
    const auto s = gen::atoms(2);
    RngStream rng(11, 0);
    const int n = 200000;
    int voids = 0;
    double sum0 = 0.0;
    double sum1 = 0.0;
    const auto m = dm(s, {1.0, 2.0});
    for (int i = 0; i < n; ++i) {
        const auto c = sample_counts(m, rng);
        voids += c[0] == 0 ? 1 : 0;
        sum0 += c[0];
        sum1 += c[1];
    }
    const double p = std::exp(-1.0);
    CHECK(std::abs(voids / double(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n));
    CHECK(std::abs(sum0 / n - 1.0) < 3.0 * std::sqrt(1.0 / n));
    CHECK(std::abs(sum1 / n - 2.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("mixed-sample draws respect the window") {
    const auto s = gen::atoms(3);
    RngStream rng(2, 2);
    const auto m = dm(s, {1.0, 1.0, 1.0});
    for (int i = 0; i < 200; ++i) {
        const auto phi = sample_poisson(m, Region::atoms({1}), rng);
        CHECK(phi.count_in(Region::atoms({0, 2})) == 0);
    }
    CHECK_THROWS(sample_poisson_count(-1.0, rng));
}

TEST_CASE("pure thinning coupling") {
    const auto s = gen::atoms(1);
    RngStream rng(3, 3);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto c = thin_superpose_couple(dm(s, {2.0}), dm(s, {1.0}), Region::all(), rng);
        REQUIRE(c.shared == c.phi_nu);
        REQUIRE(c.phi_nu.size() <= c.phi_lambda.size());
        sum += c.phi_nu.size();
    }
    CHECK(std::abs(sum / n - 1.0) < 3.0 * std::sqrt(1.0 / n));
}

TEST_CASE("pure superposition coupling") {
    const auto s = gen::atoms(2);
    RngStream rng(4, 4);
    const int n = 100000;
    double extra = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto c = thin_superpose_couple(dm(s, {1.0, 0.0}), dm(s, {1.0, 1.0}), Region::all(), rng);
        REQUIRE(c.phi_nu.count_atom(0) == c.phi_lambda.count_atom(0));
        extra += c.phi_nu.count_atom(1);
    }
    CHECK(std::abs(extra / n - 1.0) < 3.0 * std::sqrt(1.0 / n));
}

TEST_CASE("density sampler mean count") {
    DensityMeasure d;
    d.reference = ReferenceMeasure::lebesgue(GroundSpace::box({0.0}, {2.0}));
    d.density = [](const Point& x) { return x.x[0]; };
    d.bound = 2.0;
    RngStream rng(5, 5);
    const int n = 50000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_poisson(d, Region::all(), rng).size();
    // ∫_0^2 x dx = 2.
    CHECK(std::abs(sum / n - 2.0) < 3.0 * std::sqrt(2.0 / n));
    DensityMeasure bad = d;
    bad.bound = 0.5;
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 100; ++i) sample_poisson(bad, Region::all(), rng);
        }(),
        std::domain_error);
}

TEST_CASE("Mecke examples") {
    const auto s = gen::atoms(1);
    McPlan plan;
    plan.samples = 100000;
    plan.seed = 17;
    const auto m = dm(s, {1.0});
    const auto total = mecke_check([](const Point&, const PointConfiguration& phi) { return double(phi.size()); }, m,
                                   Region::all(), plan);
    CHECK(std::abs(total.lhs.mean - 1.0) < 3.0 * total.lhs.se);
    CHECK(std::abs(total.rhs.mean - 1.0) < 3.0 * total.rhs.se);
    const auto voids = mecke_check(
        [](const Point&, const PointConfiguration& phi) { return phi.empty() ? 1.0 : 0.0; }, m, Region::all(), plan);
    CHECK(std::abs(voids.lhs.mean - std::exp(-1.0)) < 3.0 * voids.lhs.se);
    CHECK(std::abs(voids.rhs.mean - std::exp(-1.0)) < 3.0 * voids.rhs.se);
    CHECK(std::abs(voids.z()) < 3.0);
}
