#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "perturb/derivatives.hpp"
#include "perturb/functionals.hpp"

using namespace perturb;
namespace fn = perturb::functionals;

namespace {

DiscreteMeasure dm(const SpacePtr& s, std::vector<double> m) { return DiscreteMeasure(s, std::move(m)); }

}  // namespace

TEST_CASE("linear family derivative examples") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    const auto lam = dm(s, {1.0});
    const auto at_half = PerturbationFamily::scaled(lam, 0.5);
    CHECK(linear_derivative(fn::at_least(b, 1), at_half, 0.5).mean ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
    const auto F = [&](double t) { return exact_expectation(fn::at_least(b, 1), at_half.measure_at(t)); };
    CHECK(richardson_derivative(F, 0.5, 1e-2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
    const auto at_one = PerturbationFamily::scaled(lam, 1.0);
    CHECK(linear_derivative(fn::count_squared(b), at_one, 1.0).mean == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("scaled derivative examples") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    CHECK(scaled_derivative(fn::void_indicator(b), dm(s, {1.0}), 1.0).mean ==
          doctest::Approx(-std::exp(-1.0)).epsilon(1e-13));
    for (double theta : {0.3, 1.0, 2.5}) {
        CHECK(scaled_derivative(fn::count(b), dm(s, {1.7}), theta).mean == doctest::Approx(1.7).epsilon(1e-12));
    }
}

TEST_CASE("scaled Taylor report sums to the exact value") {
    const auto s = gen::atoms(1);
    const auto r = scaled_taylor_report(fn::void_indicator(Region::all()), dm(s, {1.0}), 1.0, 2.0);
    CHECK(std::abs(r.value() - std::exp(-2.0)) < 1e-10);
}

TEST_CASE("pivotal derivative examples") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    McPlan plan;
    plan.samples = 200000;
    plan.seed = 21;
    const auto one = pivotal_derivative(fn::at_least(b, 1), dm(s, {1.0}), 0.5, plan);
    CHECK(std::abs(one.mean - std::exp(-0.5)) < 3.0 * one.se);
    const auto two = pivotal_derivative(fn::at_least(b, 2), dm(s, {1.0}), 1.0, plan);
    CHECK(std::abs(two.mean - std::exp(-1.0)) < 3.0 * two.se);
    CHECK_THROWS(pivotal_derivative(fn::void_indicator(b), dm(s, {1.0}), 1.0, plan));
}

TEST_CASE("increasing spot check") {
    const auto s = gen::atoms(2);
    CHECK(spot_check_increasing(fn::at_least(Region::all(), 2), dm(s, {1.0, 1.0}), 500, 4));
    CHECK_FALSE(spot_check_increasing(fn::void_indicator(Region::all()), dm(s, {1.0, 1.0}), 500, 4));
}

TEST_CASE("gamma-scale caricature against finite differences") {
    const auto car = gamma_scale_caricature({0.5, 1.0, 2.0}, {1.0, 0.8, 0.5}, 2.0, 0.0, 1.0);
    CHECK(car.family.check().empty());
    for (const auto& f : {fn::capped_count(Region::all(), 2), fn::count(Region::all()),
                          fn::exp_count(Region::atoms({1, 2}), 0.5)}) {
        const double got = nonlinear_derivative(f, car.family).mean;
        const auto F = [&](double t) { return exact_expectation(f, car.family.measure_at(t)); };
        CHECK(got == doctest::Approx(richardson_derivative(F, car.family.theta0, 1e-3)).epsilon(1e-7));
    }
    // f = φ(𝕏): derivative is the signed mass of the direction.
    double dir = 0.0;
    for (double m : car.family.direction_masses()) dir += m;
    CHECK(nonlinear_derivative(fn::count(Region::all()), car.family).mean == doctest::Approx(dir).epsilon(1e-12));
}

TEST_CASE("finite difference helpers") {
    const auto q = [](double t) { return 3.0 * t * t - t + 2.0; };
    CHECK(central_difference(q, 1.5, 0.1) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(richardson_derivative([](double t) { return std::sin(t); }, 0.3, 1e-2) ==
          doctest::Approx(std::cos(0.3)).epsilon(1e-10));
}

TEST_CASE("exponential tail remainder") {
    CHECK(exp_tail_remainder(0.5, 1.0) == doctest::Approx((std::exp(0.5) - 1.5) / 0.5).epsilon(1e-14));
    CHECK(exp_tail_remainder(-2.0, 0.7) == doctest::Approx((std::exp(-1.4) - 1.0 + 1.4) / -2.0).epsilon(1e-13));
    // Leading term u x² / 2 for small u.
    CHECK(exp_tail_remainder(1e-12, 2.0) == doctest::Approx(2e-12).epsilon(1e-10));
    CHECK(exp_tail_remainder(0.0, 3.0) == 0.0);
}

TEST_CASE("coupled finite difference agrees with the exact derivative") {
    const auto s = gen::atoms(2);
    const auto fam = PerturbationFamily::linear(dm(s, {1.0, 1.0}), {1.0, 0.5}, {0.5, -0.3}, 0.0, -1.0, 1.0);
    McPlan plan;
    plan.samples = 200000;
    plan.seed = 99;
    const auto f = fn::capped_count(Region::all(), 2);
    const auto fd = coupled_fd_derivative(f, fam, 0.0, 0.05, plan);
    // The coupled estimator is unbiased for the exact central difference.
    const auto F = [&](double t) { return exact_expectation(f, fam.measure_at(t)); };
    CHECK(std::abs(fd.mean - central_difference(F, 0.0, 0.05)) < 3.0 * fd.se);
}
