#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "perturb/exact.hpp"
#include "perturb/measure.hpp"

using namespace perturb;

namespace {

DiscreteMeasure dm(const SpacePtr& s, std::vector<double> m) { return DiscreteMeasure(s, std::move(m)); }

// 1 − Σ_k √(p(k) q(k)) for two Poisson laws on one atom, by direct summation.
double one_atom_law_hellinger(double a, double b) {
    double s = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double la = k * std::log(a) - a - std::lgamma(k + 1.0);
        const double lb = k * std::log(b) - b - std::lgamma(k + 1.0);
        s += std::exp(0.5 * (la + lb));
    }
    return 1.0 - s;
}

}  // namespace

TEST_CASE("discrete measure construction and arithmetic") {
    const auto s = gen::atoms(2);
    CHECK_THROWS_AS(dm(s, {1.0, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(dm(s, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(dm(s, {NAN, 1.0}), std::invalid_argument);
    const auto a = dm(s, {1.0, 2.0});
    const auto b = dm(s, {0.5, 0.5});
    CHECK(a.total() == 3.0);
    CHECK(a.plus(b).masses() == std::vector<double>{1.5, 2.5});
    CHECK(a.minus(b).masses() == std::vector<double>{0.5, 1.5});
    CHECK_THROWS_AS(b.minus(a), std::domain_error);
    const auto pairs = DiscreteMeasure::parse_pairs("x0 1.5 # c\nx1 2\nx0 0.5\n");
    const auto p = DiscreteMeasure::from_pairs(s, pairs);
    CHECK(p.masses() == std::vector<double>{2.0, 2.0});
    CHECK_THROWS_AS(DiscreteMeasure::from_pairs(s, {{"nope", 1.0}}), std::out_of_range);
}

TEST_CASE("signed power integral examples") {
    const auto s = gen::atoms(2);
    const auto one = [](std::span<const std::int32_t>) { return 1.0; };
    // λ={x:1}, ν={x:3}, n=2 → 2² = 4.
    auto p = SignedPerturbation::between(dm(s, {1.0, 0.0}), dm(s, {3.0, 0.0}));
    CHECK(signed_power_integral(one, p, 2) == doctest::Approx(4.0).epsilon(1e-14));
    // λ={x:1}, ν={x:2,y:1}, n=1 → 2.
    p = SignedPerturbation::between(dm(s, {1.0, 0.0}), dm(s, {2.0, 1.0}));
    CHECK(signed_power_integral(one, p, 1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(signed_power_integral(one, p, 0), std::invalid_argument);
}

TEST_CASE("signed power integral factorizes over product integrands") {
    for (std::uint64_t c = 0; c < 25; ++c) {
        gen::Gen g(c);
        const int k = g.integer(1, 4);
        const auto s = gen::atoms(k);
        const auto p = SignedPerturbation::between(dm(s, g.masses(k, 2.0, 0.2)), dm(s, g.masses(k, 2.0, 0.2)));
        const int n = g.integer(1, 3);
        std::vector<std::vector<double>> gs(static_cast<std::size_t>(n));
        for (auto& gi : gs) gi = g.doubles(static_cast<std::size_t>(k), -1.0, 1.0);
        const auto w = p.signed_masses();
        double prod = 1.0;
        for (const auto& gi : gs) {
            double one = 0.0;
            for (int i = 0; i < k; ++i) one += gi[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
            prod *= one;
        }
        const double full = signed_power_integral(
            [&](std::span<const std::int32_t> idx) {
                double v = 1.0;
                for (std::size_t j = 0; j < idx.size(); ++j) v *= gs[j][static_cast<std::size_t>(idx[j])];
                return v;
            },
            p, n);
        CHECK(full == doctest::Approx(prod).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("Hellinger distance of intensity measures") {
    const auto s = gen::atoms(2);
    CHECK(hellinger_measures(dm(s, {1.0, 0.0}), dm(s, {4.0, 0.0})) == doctest::Approx(0.5));
    CHECK(hellinger_measures(dm(s, {1.0, 0.0}), dm(s, {1.0, 1.0})) == doctest::Approx(0.5));
    CHECK(hellinger_poisson(dm(s, {1.0, 0.0}), dm(s, {4.0, 0.0})) == doctest::Approx(1.0 - std::exp(-0.5)));
    CHECK(hellinger_poisson(dm(s, {1.0, 0.0}), dm(s, {4.0, 0.0})) ==
          doctest::Approx(one_atom_law_hellinger(1.0, 4.0)).epsilon(1e-12));
    CHECK(hellinger_poisson_from(INFINITY) == 1.0);
}

TEST_CASE("Hellinger properties on random instances") {
    for (std::uint64_t c = 0; c < 40; ++c) {
        gen::Gen g(c + 1000);
        const int k = g.integer(1, 5);
        const auto s = gen::atoms(k);
        const auto a = dm(s, g.masses(k, 3.0, 0.25));
        const auto b = dm(s, g.masses(k, 3.0, 0.25));
        const double h = hellinger_measures(a, b);
        CHECK(h == doctest::Approx(hellinger_measures(b, a)).epsilon(1e-12));
        const auto rho2 = a.plus(b).scaled(2.0);
        CHECK(std::abs(h - hellinger_measures(a, b, rho2)) < 1e-12);
        CHECK(std::abs(h - hellinger_by_decomposition(a, b)) < 1e-12);
        CHECK(std::abs(h - hellinger_by_decomposition(b, a)) < 1e-12);
        CHECK(hellinger_measures(a, a) == 0.0);
        if (!(a == b)) CHECK(h > 0.0);
    }
}

TEST_CASE("Lebesgue decomposition splits by support") {
    const auto s = gen::atoms(2);
    const auto parts = lebesgue_decompose(dm(s, {2.0, 3.0}), dm(s, {1.0, 0.0}));
    CHECK(parts.absolutely_continuous.masses() == std::vector<double>{2.0, 0.0});
    CHECK(parts.singular.masses() == std::vector<double>{0.0, 3.0});
    const auto ac = lebesgue_decompose(dm(s, {2.0, 0.0}), dm(s, {1.0, 1.0}));
    CHECK(ac.singular.total() == 0.0);
    const auto sing = lebesgue_decompose(dm(s, {0.0, 2.0}), dm(s, {1.0, 0.0}));
    CHECK(sing.absolutely_continuous.total() == 0.0);
}

TEST_CASE("admissibility report examples") {
    const auto s = gen::atoms(1);
    const auto r = admissibility_check(dm(s, {1.0}), dm(s, {2.0}), dm(s, {2.0}));
    CHECK(r.l2_gap_low == doctest::Approx(0.5));
    CHECK(r.l2_gap_high == doctest::Approx(0.0));
    CHECK(r.verdict_l2);
    // Monotone case λ = {x:1}, μ = {x:1}: both gap forms equal 0.5.
    const auto m = admissibility_check(dm(s, {1.0}), dm(s, {2.0}));
    CHECK(m.increasing);
    CHECK(m.monotone_linear_gap == doctest::Approx(0.5));
    CHECK(m.monotone_square_gap == doctest::Approx(0.5));
}

TEST_CASE("monotone gap identity on random increasing instances") {
    for (std::uint64_t c = 0; c < 20; ++c) {
        gen::Gen g(c + 2000);
        const int k = g.integer(1, 4);
        const auto s = gen::atoms(k);
        const auto lam = dm(s, g.masses(k, 2.0));
        const auto mu = dm(s, g.masses(k, 2.0, 0.3));
        const auto r = admissibility_check(lam, lam.plus(mu));
        CHECK(r.increasing);
        CHECK(r.monotone_linear_gap == doctest::Approx(r.monotone_square_gap).epsilon(1e-12));
    }
}
