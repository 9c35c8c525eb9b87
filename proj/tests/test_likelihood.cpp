#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "perturb/functionals.hpp"
#include "perturb/likelihood.hpp"

using namespace perturb;
namespace fn = perturb::functionals;

namespace {

DiscreteMeasure dm(const SpacePtr& s, std::vector<double> m) { return DiscreteMeasure(s, std::move(m)); }

double log_poisson(int k, double m) { return k * std::log(m) - m - std::lgamma(k + 1.0); }

}  // namespace

TEST_CASE("likelihood ratio examples") {
    const auto s = gen::atoms(1);
    const LikelihoodRatio L(dm(s, {2.0}), dm(s, {1.0}));
    CHECK(L(PointConfiguration{}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    const int three[] = {3};
    const auto phi = PointConfiguration::from_counts(three);
    CHECK(L(phi) == doctest::Approx(8.0 * std::exp(-1.0)).epsilon(1e-14));
    // Ratio of the two Poisson masses at 3 points.
    CHECK(L(phi) == doctest::Approx(std::exp(log_poisson(3, 2.0) - log_poisson(3, 1.0))).epsilon(1e-13));
    CHECK(L.hsquare() == doctest::Approx(1.0));
}

TEST_CASE("likelihood ratio vanishes where the new density does") {
    const auto s = gen::atoms(2);
    const LikelihoodRatio L(dm(s, {1.0, 0.0}), dm(s, {1.0, 1.0}));
    const int counts[] = {0, 1};
    CHECK(L(PointConfiguration::from_counts(counts)) == 0.0);
    CHECK(L.support() == std::vector<std::int32_t>{1});
}

TEST_CASE("absolute continuity is required") {
    const auto s = gen::atoms(2);
    CHECK_THROWS_AS(LikelihoodRatio(dm(s, {1.0, 1.0}), dm(s, {1.0, 0.0})), AdmissibilityError);
    CHECK_THROWS_AS(reweighted_expectation(fn::void_indicator(Region::all()), dm(s, {1.0, 1.0}), dm(s, {1.0, 0.0}),
                                           EvalMode::exact),
                    AdmissibilityError);
}

TEST_CASE("reweighted expectation examples") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    const auto v = reweighted_expectation(fn::void_indicator(b), dm(s, {2.0}), dm(s, {1.0}), EvalMode::exact);
    CHECK(v.mean == doctest::Approx(std::exp(-2.0)).epsilon(1e-13));
    const auto c = reweighted_expectation(fn::count(b), dm(s, {2.0}), dm(s, {1.0}), EvalMode::exact);
    CHECK(c.mean == doctest::Approx(2.0).epsilon(1e-12));
    McPlan plan;
    plan.samples = 100000;
    plan.seed = 3;
    const auto mc = reweighted_expectation(fn::void_indicator(b), dm(s, {2.0}), dm(s, {1.0}), EvalMode::mc, plan);
    CHECK(std::abs(mc.mean - std::exp(-2.0)) < 3.0 * mc.se);
}

TEST_CASE("second moment bound examples") {
    const auto s1 = gen::atoms(1);
    CHECK(second_moment_bound(dm(s1, {2.0}), dm(s1, {1.0})) == doctest::Approx(std::exp(1.0)));
    const auto s2 = gen::atoms(2);
    CHECK(second_moment_bound(dm(s2, {2.0, 2.0}), dm(s2, {1.0, 1.0})) == doctest::Approx(std::exp(2.0)));
}

TEST_CASE("likelihood moments on random instances") {
    for (std::uint64_t c = 0; c < 20; ++c) {
        gen::Gen g(c + 6000);
        const int k = g.integer(1, 3);
        const auto s = gen::atoms(k);
        auto rho_m = g.masses(static_cast<std::size_t>(k), 2.0);
        for (auto& m : rho_m) m += 0.1;
        const auto rho = dm(s, rho_m);
        const auto nu = dm(s, g.masses(static_cast<std::size_t>(k), 2.0, 0.3));
        CHECK(exact_first_moment(nu, rho) == doctest::Approx(1.0).epsilon(1e-12));
        const double m2 = exact_second_moment(nu, rho);
        const double bound = second_moment_bound(nu, rho);
        CHECK(m2 <= bound * (1.0 + 1e-12));
        // In the discrete regime the bound is attained.
        CHECK(m2 == doctest::Approx(bound).epsilon(1e-10));
        const auto f = fn::capped_count(Region::all(), 2);
        CHECK(reweighted_expectation(f, nu, rho, EvalMode::exact).mean ==
              doctest::Approx(exact_expectation(f, nu)).epsilon(1e-11));
    }
}
