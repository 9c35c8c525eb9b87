#include <doctest.h>

#include <cmath>
#include <numeric>

#include "generators.hpp"
#include "perturb/exact.hpp"
#include "perturb/functionals.hpp"

using namespace perturb;
namespace fn = perturb::functionals;

namespace {

DiscreteMeasure dm(const SpacePtr& s, std::vector<double> m) { return DiscreteMeasure(s, std::move(m)); }

}  // namespace

TEST_CASE("Poisson pmf and caps") {
    const auto p = poisson_pmf(2.0, 40);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p[3] == doctest::Approx(std::exp(-2.0) * 8.0 / 6.0).epsilon(1e-14));
    const auto z = poisson_pmf(0.0, 3);
    CHECK(z[0] == 1.0);
    CHECK(z[1] == 0.0);
    CHECK(poisson_cap(1.0, 1e-14) > poisson_cap(1.0, 1e-6));
}

TEST_CASE("exact expectation examples") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    CHECK(exact_expectation(fn::void_indicator(b), dm(s, {1.0})) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(exact_expectation(fn::count_squared(b), dm(s, {1.0})) == doctest::Approx(2.0).epsilon(1e-13));
    const Point x = Point::on_atom(0);
    const Point one[] = {x};
    CHECK(exact_expected_difference(fn::count_squared(b), dm(s, {1.0}), one) == doctest::Approx(3.0).epsilon(1e-13));
    const Point two[] = {x, x};
    CHECK(exact_expected_difference(fn::void_indicator(b), dm(s, {1.0}), two) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("enumeration rejects unbounded functionals without growth") {
    const auto s = gen::atoms(1);
    Functional f;
    f.name = "raw";
    f.eval = [](const PointConfiguration& phi) { return std::exp(double(phi.size())); };
    CHECK_THROWS_AS(exact_expectation(f, dm(s, {1.0})), std::invalid_argument);
}

TEST_CASE("moments of counts over random measures") {
    for (std::uint64_t c = 0; c < 20; ++c) {
        gen::Gen g(c + 4000);
        const int k = g.integer(1, 4);
        const auto s = gen::atoms(k);
        const auto m = dm(s, g.masses(k, 3.0, 0.2));
        const double t = m.total();
        CHECK(exact_expectation(fn::count(Region::all()), m) == doctest::Approx(t).epsilon(1e-12));
        CHECK(exact_expectation(fn::count_squared(Region::all()), m) == doctest::Approx(t + t * t).epsilon(1e-12));
        CHECK(exact_expectation(fn::exp_count(Region::all(), 0.7), m) ==
              doctest::Approx(std::exp(t * (std::exp(-0.7) - 1.0))).epsilon(1e-12));
    }
}

TEST_CASE("difference table agrees with direct expected differences") {
    for (std::uint64_t c = 0; c < 10; ++c) {
        gen::Gen g(c + 5000);
        const int k = g.integer(1, 3);
        const auto s = gen::atoms(k);
        const auto m = dm(s, g.masses(k, 2.0));
        const auto f = c % 2 == 0 ? fn::capped_count(Region::all(), 2) : fn::exp_count(Region::atoms({0}), 0.5);
        std::vector<std::int32_t> dirs;
        for (int i = 0; i < k; ++i) dirs.push_back(i);
        const DifferenceTable t(f, m, dirs, 3);
        std::vector<int> mi(static_cast<std::size_t>(k));
        for (auto& v : mi) v = g.integer(0, 3);
        std::vector<Point> xs;
        for (int i = 0; i < k; ++i) {
            for (int r = 0; r < mi[static_cast<std::size_t>(i)]; ++r) xs.push_back(Point::on_atom(i));
        }
        const double direct = xs.empty() ? exact_expectation(f, m) : exact_expected_difference(f, m, xs);
        CHECK(t.at(mi) == doctest::Approx(direct).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("Fock identity examples") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    const auto v = fock_identity_check(fn::void_indicator(b), fn::void_indicator(b), dm(s, {1.0}), 30);
    CHECK(v.lhs == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(v.gap < 1e-10);
    for (int n = 0; n < 5; ++n) {
        CHECK(v.terms[static_cast<std::size_t>(n)] ==
              doctest::Approx(std::exp(-2.0) / std::tgamma(n + 1.0)).epsilon(1e-12));
    }
    const auto lin = fock_identity_check(fn::count(b), fn::constant(1.0), dm(s, {1.0}), 1);
    CHECK(lin.lhs == doctest::Approx(1.0));
    CHECK(lin.gap < 1e-12);
}
