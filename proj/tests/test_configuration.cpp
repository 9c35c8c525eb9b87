#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "perturb/configuration.hpp"
#include "perturb/functionals.hpp"

using namespace perturb;
namespace fn = perturb::functionals;

TEST_CASE("point configuration bookkeeping") {
    const Point a = Point::on_atom(0);
    const Point b = Point::on_atom(1);
    PointConfiguration phi;
    phi.add(a);
    phi.add(b, 2);
    CHECK(phi.size() == 3);
    CHECK(phi.count(b) == 2);
    CHECK(phi.count_in(Region::atoms({1})) == 2);
    phi.remove(b);
    CHECK(phi.count(b) == 1);
    CHECK_THROWS_AS(phi.remove(Point::on_atom(5)), std::invalid_argument);
    const int counts[] = {2, 0, 1};
    const auto c = PointConfiguration::from_counts(counts);
    CHECK(c.expanded().size() == 3);
    CHECK(c.restricted(Region::atoms({2})).size() == 1);
    const auto p = Point::at({0.25, 0.75});
    CHECK(Region::box({0.0, 0.0}, {0.5, 1.0}).contains(p));
    CHECK_FALSE(Region::box({0.0, 0.0}, {0.2, 1.0}).contains(p));
}

TEST_CASE("difference operator examples") {
    const Region b = Region::atoms({0});
    const Point x = Point::on_atom(0);
    const PointConfiguration empty;
    const Point three[] = {x, x, x};
    CHECK(difference_n(fn::void_indicator(b), empty, three) == -1.0);
    const Point one[] = {x};
    CHECK(difference_n(fn::count_squared(b), empty, one) == 1.0);
    const Point two[] = {x, x};
    CHECK(difference_n(fn::count_squared(b), empty, two) == 2.0);
}

TEST_CASE("subset formula equals the recursive definition") {
    const std::vector<Functional> fs = {fn::void_indicator(Region::atoms({0, 1})), fn::count_squared(Region::all()),
                                        fn::at_least(Region::atoms({1}), 2), fn::exp_count(Region::all(), 0.3),
                                        fn::capped_count(Region::atoms({0, 2}), 2)};
    for (std::uint64_t c = 0; c < 60; ++c) {
        gen::Gen g(c + 3000);
        std::vector<int> counts = {g.integer(0, 3), g.integer(0, 3), g.integer(0, 3)};
        const auto phi = PointConfiguration::from_counts(counts);
        std::vector<Point> xs(static_cast<std::size_t>(g.integer(1, 5)));
        for (auto& p : xs) p = Point::on_atom(g.integer(0, 2));
        const auto& f = fs[c % fs.size()];
        CHECK(difference_n(f, phi, xs) == doctest::Approx(difference_n_recursive(f, phi, xs)).epsilon(1e-12));
    }
}

TEST_CASE("difference operator is symmetric in its arguments") {
    const auto f = fn::at_least(Region::atoms({0, 1}), 2);
    const auto phi = PointConfiguration::of({Point::on_atom(2)});
    const Point fwd[] = {Point::on_atom(0), Point::on_atom(1), Point::on_atom(2)};
    const Point rev[] = {Point::on_atom(2), Point::on_atom(1), Point::on_atom(0)};
    CHECK(difference_n(f, phi, fwd) == difference_n(f, phi, rev));
}

TEST_CASE("functional registry") {
    const Region b = Region::atoms({0});
    const auto phi = PointConfiguration::from_counts(std::vector<int>{3});
    CHECK(fn::by_id("void", b)(phi) == 0.0);
    CHECK(fn::by_id("count", b)(phi) == 3.0);
    CHECK(fn::by_id("count_sq", b)(phi) == 9.0);
    CHECK(fn::by_id("at_least_2", b)(phi) == 1.0);
    CHECK(fn::by_id("capped_2", b)(phi) == 2.0);
    CHECK(fn::by_id("exp_0.5", b)(phi) == doctest::Approx(std::exp(-1.5)));
    CHECK(fn::by_id("const_2", b)(phi) == 2.0);
    CHECK(fn::by_id("at_least_1", b).increasing);
    CHECK_THROWS_AS(fn::by_id("nonsense", b), std::invalid_argument);
    CHECK_FALSE(fn::registry_ids().empty());
}

TEST_CASE("NaN-valued functionals are rejected") {
    Functional f;
    f.name = "nan";
    f.eval = [](const PointConfiguration&) { return std::nan(""); };
    CHECK_THROWS(f(PointConfiguration{}));
}
