#include <doctest.h>

#include <cmath>

#include "perturb/levy.hpp"
#include "perturb/rng.hpp"

using namespace perturb;
namespace pf = perturb::path_functionals;

namespace {

LevyModel cp_model(std::vector<std::pair<double, double>> atoms, double a = 0.0) {
    LevyModel m;
    m.nu_star = JumpMeasure::compound_poisson_1d(atoms);
    m.b = drift_from_uncompensated(Jump{a}, m.nu_star, 1);
    m.grid = 4;
    return m;
}

}  // namespace

TEST_CASE("gamma drift in compensated form") {
    // θ/β (1 − e^{−β}) at θ = 2, β = 1.
    const Jump b = drift_from_uncompensated(Jump{0.0}, JumpMeasure::gamma_tail(2.0, 1.0), 1);
    CHECK(b[0] == doctest::Approx(1.2642411).epsilon(1e-7));
    CHECK(b[0] == doctest::Approx(2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("jump measure masses and moments") {
    const auto g = JumpMeasure::gamma_tail(2.0, 1.0);
    // θ E1(1) above 1; std::expint gives Ei, and E1(x) = −Ei(−x).
    CHECK(g.abs_integral(0.0, 1.0, INFINITY) == doctest::Approx(-2.0 * std::expint(-1.0)).epsilon(1e-10));
    CHECK(g.first_moment(0.0, INFINITY)[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(JumpSampler(g, 1.0).mass() == doctest::Approx(-2.0 * std::expint(-1.0)).epsilon(1e-10));
    CHECK(g.levy_integrable());
    CHECK(g.finite_variation());
    CHECK(g.upper_second_moment_finite());
    const auto st = JumpMeasure::symmetric_stable(1.0, 1.0);
    CHECK(st.levy_integrable());
    CHECK_FALSE(st.finite_variation());
    CHECK_FALSE(st.upper_second_moment_finite());
}

TEST_CASE("stable direction index constraint") {
    const std::vector<std::pair<Jump, double>> q = {{Jump{1.0}, 1.0}};
    CHECK_NOTHROW(JumpMeasure::stable_direction(1.5, 0.5, q, 1));
    CHECK_THROWS_AS(JumpMeasure::stable_direction(1.5, 0.75, q, 1), std::invalid_argument);
    CHECK_THROWS_AS(JumpMeasure::stable_direction(1.5, 0.0, q, 1), std::invalid_argument);
    const auto dir = JumpMeasure::stable_direction(1.5, 0.5, q, 1);
    const auto ref = JumpMeasure::stable(1.5, q, 1);
    CHECK(std::isfinite(density_ratio_energy(dir, ref)));
}

TEST_CASE("simulated means") {
    McPlan plan;
    plan.samples = 100000;
    plan.seed = 5;
    const auto cp = cp_model({{1.0, 1.0}});
    const auto e = levy_expectation(pf::terminal(), cp, plan);
    CHECK(std::abs(e.mean - 1.0) < 3.0 * e.se);

    LevyModel gm;
    gm.nu_star = JumpMeasure::gamma_tail(2.0, 1.0);
    gm.b = drift_from_uncompensated(Jump{0.0}, gm.nu_star, 1);
    gm.eps = 1e-4;
    gm.grid = 4;
    const auto mom = triplet_moments(gm);
    CHECK(mom.mean_exact == doctest::Approx(2.0).epsilon(1e-10));
    const auto ge = levy_expectation(pf::terminal(), gm, plan);
    CHECK(std::abs(ge.mean - mom.mean_simulated) < 3.0 * ge.se);
    // Dropped small jumps shift the mean by far less than the noise.
    CHECK(mom.mean_exact - mom.mean_simulated < ge.se / 3.0);
}

TEST_CASE("path shift adds the jump at the terminal time") {
    RngStream rng(9, 0);
    auto m = cp_model({{1.0, 1.0}, {-0.5, 2.0}});
    m.sigma = {0.2};
    m.grid = 8;
    const PathSimulator sim(m);
    for (int i = 0; i < 200; ++i) {
        const auto w = sim.simulate(rng);
        const double t = rng.uniform();
        const double x = 2.0 * rng.uniform() - 1.0;
        const auto s = path_shift(w, t, Jump{x});
        CHECK(std::abs((s.terminal()[0] - w.terminal()[0]) - x) < 1e-12);
        CHECK(s.jumps().size() == w.jumps().size() + 1);
    }
    const auto w = sim.simulate(rng);
    CHECK_THROWS(path_shift(w, 1.5, Jump{1.0}));
}

TEST_CASE("supremum of a nondecreasing path shifts by the jump") {
    RngStream rng(10, 0);
    const auto m = cp_model({{0.5, 1.0}, {2.0, 0.5}}, 0.3);
    const PathSimulator sim(m);
    const auto sup = pf::supremum();
    for (int i = 0; i < 200; ++i) {
        const auto w = sim.simulate(rng);
        const double x = 3.0 * rng.uniform();
        const auto s = path_shift(w, rng.uniform(), Jump{x});
        CHECK(std::abs((sup(s) - sup(w)) - x) < 1e-12);
        CHECK(sup(w) == doctest::Approx(w.terminal()[0]).epsilon(1e-14));
    }
}

TEST_CASE("supremum running pieces") {
    const CadlagPath w(1, 1.0, {0.0, 1.0}, {Jump{0.0}, Jump{-1.0}}, {{0.5, Jump{2.0}}});
    // Skeleton falls linearly to −1; a jump of 2 at t = 0.5 gives 1.5 just after.
    CHECK(w.supremum() == doctest::Approx(1.5));
    const auto [past, future] = w.past_future_sup(0.25);
    CHECK(past == doctest::Approx(0.0));
    CHECK(future == doctest::Approx(1.5));
    CHECK(w.left_limit(0.5)[0] == doctest::Approx(-0.5));
    CHECK(w.value(0.5)[0] == doctest::Approx(1.5));
}

TEST_CASE("derivative of the terminal value is the direction's first moment") {
    const auto m = cp_model({{0.5, 1.0}, {1.0, 1.0}});
    const auto dir = JumpMeasure::signed_atoms_1d({{0.5, 0.3}, {1.0, -0.2}});
    McPlan plan;
    plan.samples = 100000;
    plan.seed = 13;
    const auto d = levy_derivative(pf::terminal(), m, dir, plan);
    CHECK(std::abs(d.mean - (0.5 * 0.3 - 0.2)) < 3.0 * d.se);
    const auto zero = levy_derivative(pf::terminal(), m, JumpMeasure(1), plan);
    CHECK(zero.mean == 0.0);
    CHECK(zero.se == 0.0);
}

TEST_CASE("direction checks") {
    const auto m = cp_model({{1.0, 1.0}});
    // Mass where ν* has none is not of the form g·ν*.
    CHECK_FALSE(check_direction(m, JumpMeasure::signed_atoms_1d({{2.0, 1.0}})).empty());
    CHECK(check_direction(m, JumpMeasure::signed_atoms_1d({{1.0, -0.5}})).empty());
    McPlan plan;
    plan.samples = 1000;
    CHECK_THROWS_AS(levy_derivative(pf::terminal(), m, JumpMeasure::signed_atoms_1d({{2.0, 1.0}}), plan),
                    AdmissibilityError);
}

TEST_CASE("symmetric direction leaves the drift unchanged") {
    const Jump b{0.7};
    const auto sym = JumpMeasure::signed_atoms_1d({{0.5, 1.0}, {-0.5, 1.0}});
    CHECK(drift_adjust(b, sym, 0.3)[0] == doctest::Approx(0.7).epsilon(1e-15));
    const auto one = JumpMeasure::signed_atoms_1d({{0.5, 1.0}});
    CHECK(drift_adjust(b, one, 0.3)[0] == doctest::Approx(0.7 + 0.3 * 0.5).epsilon(1e-15));
}

TEST_CASE("rate-change series reduces to the void series") {
    const auto m = cp_model({{1.0, 1.0}});
    LevySeriesOptions opt;
    opt.n_max = 8;
    opt.plan.samples = 20000;
    opt.plan.seed = 31;
    opt.max_order_samples = std::uint64_t{1} << 15;
    const auto r = levy_series(pf::no_jumps(), m, JumpMeasure::compound_poisson_1d({{1.0, 1.0}}), opt);
    REQUIRE(r.terms.size() >= 3);
    for (std::size_t n = 0; n < 3; ++n) {
        const double want = std::exp(-1.0) * (n % 2 == 0 ? 1.0 : -1.0) / std::tgamma(double(n) + 1.0);
        CHECK(std::abs(r.terms[n] - want) < 3.0 * r.term_se[n] + 1e-15);
    }
    double se2 = 0.0;
    for (double se : r.term_se) se2 += se * se;
    CHECK(std::abs(r.value() - std::exp(-2.0)) < 3.0 * std::sqrt(se2));
}

TEST_CASE("supremum derivative for a nondecreasing model") {
    const auto m = cp_model({{0.5, 1.0}, {1.0, 1.0}}, 0.2);
    const auto dir = JumpMeasure::signed_atoms_1d({{0.5, 0.4}, {1.0, 0.3}});
    McPlan plan;
    plan.samples = 50000;
    plan.seed = 17;
    const auto r = supremum_derivative(m, dir, plan);
    // Y ≤ 0 everywhere, so the kernel is x and the estimate is t0 ∫ x g dν*.
    CHECK(std::abs(r.estimate.mean - (0.5 * 0.4 + 0.3)) < 3.0 * r.estimate.se + 1e-12);
    CHECK(r.bound_violations == 0);
    CHECK(r.max_kernel_gap <= 1e-12);
}
