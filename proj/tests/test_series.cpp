#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "perturb/functionals.hpp"
#include "perturb/series.hpp"

using namespace perturb;
namespace fn = perturb::functionals;

namespace {

DiscreteMeasure dm(const SpacePtr& s, std::vector<double> m) { return DiscreteMeasure(s, std::move(m)); }

}  // namespace

TEST_CASE("void series partial sums") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    const auto r = variational_series(fn::void_indicator(b), dm(s, {1.0}), dm(s, {2.0}));
    REQUIRE(r.partial_sums.size() >= 3);
    CHECK(r.partial_sums[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(std::abs(r.partial_sums[1]) < 1e-15);
    CHECK(r.partial_sums[2] == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
    for (std::size_t n = 0; n < r.terms.size(); ++n) {
        const double want = std::exp(-1.0) * (n % 2 == 0 ? 1.0 : -1.0) / std::tgamma(double(n) + 1.0);
        CHECK(r.terms[n] == doctest::Approx(want).epsilon(1e-12).scale(1e-300));
    }
    CHECK(r.converged);
    CHECK(std::abs(r.value() - std::exp(-2.0)) < 1e-10);
}

TEST_CASE("count-squared series terminates at order two") {
    const auto s = gen::atoms(1);
    const auto r = variational_series(fn::count_squared(Region::atoms({0})), dm(s, {1.0}), dm(s, {3.0}));
    REQUIRE(r.terms.size() >= 3);
    CHECK(r.terms[0] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(r.terms[1] == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(r.terms[2] == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(r.value() == doctest::Approx(12.0).epsilon(1e-13));
}

TEST_CASE("series equals the exact value under the new measure") {
    const std::vector<ReferenceChoice> refs = {ReferenceChoice::sum, ReferenceChoice::lambda_plus_singular,
                                               ReferenceChoice::nu_plus_singular};
    for (std::uint64_t c = 0; c < 15; ++c) {
        gen::Gen g(c + 7000);
        const int k = g.integer(1, 3);
        const auto s = gen::atoms(k);
        const auto lam = dm(s, g.masses(static_cast<std::size_t>(k), 2.0, 0.2));
        const auto nu = dm(s, g.masses(static_cast<std::size_t>(k), 2.0, 0.2));
        const auto f = c % 2 == 0 ? fn::exp_count(Region::all(), 0.4) : fn::at_least(Region::atoms({0}), 2);
        SeriesOptions opt;
        opt.n_max = 60;
        opt.reference = refs[c % refs.size()];
        const auto r = variational_series(f, lam, nu, opt);
        CHECK(std::abs(r.value() - exact_expectation(f, nu)) < 1e-9);
    }
}

TEST_CASE("mixed-sample value matches the void series") {
    const auto s = gen::atoms(1);
    McPlan plan;
    plan.samples = 100000;
    plan.seed = 8;
    const auto e = mixed_sample_value(fn::void_indicator(Region::all()), dm(s, {1.0}), dm(s, {1.0}), plan);
    CHECK(std::abs(e.mean - std::exp(-2.0)) < 3.0 * e.se);
}

TEST_CASE("parametric series examples") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    const auto fam = PerturbationFamily::linear(dm(s, {1.0}), {1.0}, {1.0}, 0.0, -1.0, 2.0);
    const auto r = parametric_series(fn::void_indicator(b), fam, 1.0);
    CHECK(std::abs(r.value() - std::exp(-2.0)) < 1e-10);
    const auto lin = parametric_series(fn::count(b), fam, 1.7);
    REQUIRE(lin.terms.size() >= 2);
    CHECK(lin.partial_sums[1] == doctest::Approx(2.7).epsilon(1e-13));
    CHECK_THROWS_AS(parametric_series(fn::count(b), fam, 3.0), std::domain_error);
}

TEST_CASE("Gateaux derivative examples") {
    const auto s = gen::atoms(1);
    const Region b = Region::atoms({0});
    const auto rho = dm(s, {1.0});
    CHECK(gateaux_derivative(fn::count(b), dm(s, {1.0}), {1.0}, rho).mean == doctest::Approx(1.0));
    CHECK(gateaux_derivative(fn::void_indicator(b), dm(s, {1.0}), {1.0}, rho).mean ==
          doctest::Approx(-std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("remainder function") {
    for (double t : {0.5, 0.1, 1e-3, 1e-6}) {
        const double naive = std::sqrt(std::expm1(t * t) - t * t);
        CHECK(frechet_o_tilde(t) == doctest::Approx(naive).epsilon(t > 1e-2 ? 1e-12 : 1e-3));
        CHECK(frechet_o_tilde(t) / t < 1.0);
    }
    CHECK(frechet_o_tilde(1e-6) == doctest::Approx(1e-12 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("Frechet remainder of the void functional") {
    const auto s = gen::atoms(1);
    const auto rep = frechet_remainder_check(fn::void_indicator(Region::atoms({0})), dm(s, {1.0}),
                                             {{0.5}, {0.25}, {0.125}});
    REQUIRE(rep.rows.size() == 3);
    for (const auto& row : rep.rows) {
        const double t = row.norm;
        CHECK(row.remainder == doctest::Approx(std::exp(-1.0) * (std::exp(-t) - 1.0 + t)).epsilon(1e-12));
        CHECK(row.within_bound);
    }
    CHECK(rep.ratio_decreasing);
    CHECK_THROWS_AS(frechet_remainder_check(fn::count(Region::all()), dm(s, {1.0}), {{-2.0}}), std::domain_error);
}

TEST_CASE("higher-order energy of the void functional") {
    const auto s = gen::atoms(1);
    // Σ_{n≥2} e^{−2}/n! = e^{−2}(e − 2).
    CHECK(higher_order_energy(fn::void_indicator(Region::all()), dm(s, {1.0})) ==
          doctest::Approx(std::exp(-2.0) * (std::exp(1.0) - 2.0)).epsilon(1e-10));
    CHECK(higher_order_energy(fn::count(Region::all()), dm(s, {1.5})) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("stopping window") {
    SeriesResult r;
    CHECK_FALSE(append_series_term(r, 1.0, 1.0, 0.0, 1e-10, false));
    CHECK_FALSE(append_series_term(r, 1e-12, 1e-12, 0.0, 1e-10, false));
    CHECK(append_series_term(r, 1e-13, 1e-13, 0.0, 1e-10, false));
    // Orders 1 and 2 fall inside the window; order 0 is the last significant one.
    CHECK(r.truncation_order == 0);
    CHECK(r.to_csv().rfind("order,term,partial_sum,abs_term", 0) == 0);
}
