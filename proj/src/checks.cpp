#include "perturb/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "perturb/derivatives.hpp"
#include "perturb/exact.hpp"
#include "perturb/functionals.hpp"
#include "perturb/levy.hpp"
#include "perturb/likelihood.hpp"
#include "perturb/measure.hpp"
#include "perturb/sampler.hpp"
#include "perturb/series.hpp"

namespace perturb {

namespace {

namespace fn = functionals;

McPlan plan_for(const CheckOptions& opt, const std::string& label, double base) {
    McPlan p;
    p.samples = static_cast<std::uint64_t>(std::max(4096.0, std::llround(base * opt.scale) * 1.0));
    p.seed = opt.seed + tag_of(label);
    p.workers = opt.workers;
    return p;
}

CheckRow make_row(const std::string& id, int k, const std::string& name, double value, double reference,
                  double tolerance, bool pass, const std::string& detail = "") {
    CheckRow r;
    r.id = id;
    r.criterion = k;
    r.name = name;
    r.formula = criterion_formula(k);
    r.value = value;
    r.reference = reference;
    r.tolerance = tolerance;
    r.pass = pass;
    r.detail = detail;
    return r;
}

// |value − reference| < tol.
CheckRow close_row(const std::string& id, int k, const std::string& name, double value, double reference,
                   double tol) {
    return make_row(id, k, name, value, reference, tol, std::abs(value - reference) < tol);
}

// Agreement within 3 combined standard errors.
CheckRow sigma_row(const std::string& id, int k, const std::string& name, const Estimate& e, double reference,
                   double reference_se = 0.0) {
    const double tol = 3.0 * std::sqrt(e.se * e.se + reference_se * reference_se);
    std::ostringstream d;
    d << "se=" << e.se << " n=" << e.n;
    return make_row(id, k, name, e.mean, reference, tol, std::abs(e.mean - reference) <= tol, d.str());
}

SpacePtr atoms_space(int k) {
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
    return GroundSpace::discrete(names);
}

DiscreteMeasure on(const SpacePtr& s, std::vector<double> m) { return DiscreteMeasure(s, std::move(m)); }

// Criterion 1: void probability through the exact series.
std::vector<CheckRow> c1() {
    const auto s = atoms_space(1);
    SeriesOptions o;
    o.n_max = 30;
    o.mode = EvalMode::exact;
    const auto r = variational_series(fn::void_indicator(Region::atoms({0})), on(s, {1.0}), on(s, {2.0}), o);
    return {close_row("C1.void", 1, "void probability partial sum", r.value(), std::exp(-2.0), 1e-8)};
}

std::vector<CheckRow> c2() {
    const auto s = atoms_space(1);
    SeriesOptions o;
    o.n_max = 30;
    const auto r = variational_series(fn::count_squared(Region::atoms({0})), on(s, {1.0}), on(s, {3.0}), o);
    std::vector<CheckRow> rows;
    const double at2 = r.partial_sums.size() > 2 ? r.partial_sums[2] : NAN;
    rows.push_back(close_row("C2.order2", 2, "partial sum at order 2", at2, 12.0, 1e-12));
    rows.push_back(make_row("C2.truncation", 2, "truncation order", r.truncation_order, 2.0, 0.0,
                            r.truncation_order == 2 && r.converged));
    rows.push_back(close_row("C2.residual", 2, "final partial sum", r.value(), 12.0, 1e-12));
    return rows;
}

Functional random_bounded(RngStream& rng, const Region& b) {
    const int kind = static_cast<int>(rng.uniform() * 4.0);
    const int k = 1 + static_cast<int>(rng.uniform() * 3.0);
    switch (kind) {
        case 0: return fn::void_indicator(b);
        case 1: return fn::at_least(b, k);
        case 2: return fn::capped_count(b, k);
        default: return fn::exp_count(b, 0.1 + 1.9 * rng.uniform());
    }
}

std::vector<CheckRow> c3(const CheckOptions& opt) {
    std::vector<CheckRow> rows;
    {
        const auto s = atoms_space(1);
        const auto f = fn::void_indicator(Region::atoms({0}));
        const auto r = fock_identity_check(f, f, on(s, {1.0}), 30);
        rows.push_back(make_row("C3.void", 3, "void indicator gap", r.gap, 0.0, 1e-8, r.gap < 1e-8));
    }
    RngStream rng(opt.seed, tag_of("C3.battery"));
    double worst = 0.0;
    std::string where;
    for (int inst = 0; inst < 20; ++inst) {
        const int k = 1 + static_cast<int>(rng.uniform() * 3.0);
        const auto s = atoms_space(k);
        std::vector<double> m(static_cast<std::size_t>(k));
        for (auto& x : m) x = 3.0 * rng.uniform();
        std::vector<std::int32_t> ids;
        for (int i = 0; i < k; ++i) {
            if (rng.uniform() < 0.6) ids.push_back(i);
        }
        if (ids.empty()) ids.push_back(0);
        const Region b = Region::atoms(ids);
        const auto f = random_bounded(rng, b);
        const auto g = random_bounded(rng, b);
        const auto r = fock_identity_check(f, g, on(s, m), 60);
        if (!(r.gap <= worst)) {
            worst = r.gap;
            where = "instance " + std::to_string(inst) + ": " + f.name + " x " + g.name;
        }
    }
    rows.push_back(make_row("C3.battery", 3, "max gap over 20 random instances", worst, 0.0, 1e-6, worst < 1e-6,
                            where));
    return rows;
}

std::vector<CheckRow> c4(const CheckOptions& opt) {
    const auto s = atoms_space(3);
    const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> inst = {
        {on(s, {1.0, 0.5, 2.0}), on(s, {0.8, 1.0, 1.5})},
        {on(s, {0.0, 1.2, 0.7}), on(s, {0.5, 1.2, 0.3})},
        {on(s, {2.5, 0.1, 0.0}), on(s, {2.0, 0.4, 0.6})},
    };
    const std::vector<Functional> gs = {fn::exp_count(Region::all(), 0.4), fn::count_squared(Region::atoms({0, 2}))};
    double first = 0.0;
    double second = 0.0;
    double reweight = 0.0;
    std::vector<CheckRow> rows;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const auto& [nu, rho] = inst[i];
        first = std::max(first, std::abs(exact_first_moment(nu, rho) - 1.0));
        const double bound = second_moment_bound(nu, rho);
        second = std::max(second, std::abs(exact_second_moment(nu, rho) - bound));
        for (std::size_t j = 0; j < gs.size(); ++j) {
            const double direct = exact_expectation(gs[j], nu);
            const auto ex = reweighted_expectation(gs[j], nu, rho, EvalMode::exact);
            reweight = std::max(reweight, std::abs(ex.mean - direct));
            const auto mc = reweighted_expectation(
                gs[j], nu, rho, EvalMode::mc,
                plan_for(opt, "C4.mc." + std::to_string(i) + "." + std::to_string(j), 1e5));
            rows.push_back(sigma_row("C4.mc" + std::to_string(i) + std::to_string(j), 4,
                                     "MC reweighted vs direct, " + gs[j].name, mc, direct));
        }
    }
    rows.insert(rows.begin(), close_row("C4.reweight_exact", 4, "max |reweighted − direct| (exact)", reweight, 0.0, 1e-10));
    rows.insert(rows.begin(), close_row("C4.second", 4, "max |E L² − exp∫(h−1)²dρ|", second, 0.0, 1e-10));
    rows.insert(rows.begin(), close_row("C4.first", 4, "max |E L − 1|", first, 0.0, 1e-10));
    return rows;
}

// Hellinger distance 1 − Σ_k √(p_λ(k) p_ν(k)) of two Poisson laws by joint
// enumeration of count vectors.
double poisson_law_hellinger(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    const std::size_t k = a.size();
    std::vector<std::vector<double>> pa(k);
    std::vector<std::vector<double>> pb(k);
    std::vector<int> cap(k);
    for (std::size_t i = 0; i < k; ++i) {
        cap[i] = poisson_cap(std::max(a.mass(i), b.mass(i)), 1e-17);
        pa[i] = poisson_pmf(a.mass(i), cap[i]);
        pb[i] = poisson_pmf(b.mass(i), cap[i]);
    }
    std::vector<int> c(k, 0);
    double sum = 0.0;
    double comp = 0.0;
    for (;;) {
        double t = 1.0;
        for (std::size_t i = 0; i < k; ++i) t *= std::sqrt(pa[i][static_cast<std::size_t>(c[i])] *
                                                           pb[i][static_cast<std::size_t>(c[i])]);
        const double y = t - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        std::size_t i = k;
        while (i > 0) {
            if (++c[i - 1] <= cap[i - 1]) break;
            c[i - 1] = 0;
            --i;
        }
        if (i == 0) break;
    }
    return 1.0 - sum;
}

std::vector<CheckRow> c5(const CheckOptions& opt) {
    std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> inst;
    {
        const auto s = atoms_space(2);
        inst.emplace_back(on(s, {1.0, 0.0}), on(s, {0.0, 2.0}));
        inst.emplace_back(on(s, {1.0, 3.0}), on(s, {1.0, 3.0}));
    }
    RngStream rng(opt.seed, tag_of("C5.instances"));
    for (int n = 0; n < 12; ++n) {
        const int k = 1 + static_cast<int>(rng.uniform() * 3.0);
        const auto s = atoms_space(k);
        std::vector<double> a(static_cast<std::size_t>(k));
        std::vector<double> b(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            a[static_cast<std::size_t>(i)] = rng.uniform() < 0.15 ? 0.0 : 3.0 * rng.uniform();
            b[static_cast<std::size_t>(i)] = rng.uniform() < 0.15 ? 0.0 : 3.0 * rng.uniform();
        }
        inst.emplace_back(on(s, a), on(s, b));
    }
    double worst = 0.0;
    for (const auto& [a, b] : inst) {
        const double lhs = hellinger_poisson_from(hellinger_measures(a, b));
        worst = std::max(worst, std::abs(lhs - poisson_law_hellinger(a, b)));
    }
    return {close_row("C5.identity", 5,
                      "max |1 − exp(−H) − law Hellinger| over " + std::to_string(inst.size()) + " instances", worst,
                      0.0, 1e-8)};
}

std::vector<CheckRow> c6(const CheckOptions& opt) {
    std::vector<CheckRow> rows;
    const auto s1 = atoms_space(1);
    const auto lambda = on(s1, {1.0});
    const auto f = fn::at_least(Region::atoms({0}), 1);
    const auto piv = pivotal_derivative(f, lambda, 0.5, plan_for(opt, "C6.pivotal", 1e5));
    rows.push_back(sigma_row("C6.pivotal", 6, "pivotal estimator vs exp(−0.5)", piv, std::exp(-0.5)));
    const auto integral = scaled_derivative(f, lambda, 0.5, EvalMode::mc, plan_for(opt, "C6.integral", 1e5));
    rows.push_back(sigma_row("C6.integral", 6, "pivotal vs integral form", piv, integral.mean, integral.se));

    const auto s2 = atoms_space(2);
    const auto fam = PerturbationFamily::linear(on(s2, {1.0, 0.5}), {1.0, 1.0}, {0.6, -0.4}, 0.0, -1.0, 1.0);
    const auto g = fn::capped_count(Region::all(), 2);
    const double theta = 0.3;
    const auto d = linear_derivative(g, fam, theta, EvalMode::exact);
    const double fd = richardson_derivative(
        [&](double t) { return exact_expectation(g, fam.measure_at(t)); }, theta, 1e-2);
    rows.push_back(close_row("C6.linear_fd", 6, "exact linear derivative vs Richardson difference", d.mean, fd, 1e-6));
    return rows;
}

std::vector<CheckRow> c7() {
    const auto s = atoms_space(2);
    const auto f = fn::void_indicator(Region::atoms({0}));
    const std::vector<double> ts = {0.5, 0.25, 0.125};
    std::vector<std::vector<double>> hs;
    for (double t : ts) hs.push_back({t, 0.0});
    const auto rep = frechet_remainder_check(f, on(s, {1.0, 1.0}), hs);
    std::vector<CheckRow> rows;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        std::ostringstream d;
        d << "ratio=" << r.ratio << " norm=" << r.norm;
        rows.push_back(make_row("C7.t" + std::to_string(i), 7, "|remainder| within the bound at t=" +
                                                                   std::to_string(ts[i]).substr(0, 5),
                                std::abs(r.remainder), 0.0, r.bound, r.within_bound, d.str()));
    }
    const double last_ratio = rep.rows.empty() ? NAN : rep.rows.back().ratio;
    rows.push_back(make_row("C7.monotone", 7, "remainder/norm decreasing in t", last_ratio, 0.0, 0.0,
                            rep.ratio_decreasing && rep.all_within_bound));
    return rows;
}

std::vector<CheckRow> c8(const CheckOptions& opt) {
    std::vector<CheckRow> rows;
    const auto s = atoms_space(3);
    const auto m = on(s, {1.0, 0.5, 2.0});
    auto mecke_row = [&](const std::string& id, const std::string& name, const MeckeResult& r) {
        return sigma_row(id, 8, name, r.lhs, r.rhs.mean, r.rhs.se);
    };
    {
        const MeckeIntegrand f = [](const Point& x, const PointConfiguration& phi) {
            return (x.atom + 1.0) * std::exp(-0.3 * phi.size());
        };
        rows.push_back(mecke_row("C8.weighted", "atom weight times exp(−0.3 N)",
                                 mecke_check(f, m, Region::all(), plan_for(opt, "C8.a", 1e5))));
    }
    {
        const MeckeIntegrand f = [](const Point& x, const PointConfiguration& phi) {
            const double c = phi.count_atom(1);
            return x.atom == 0 ? c * c : 0.0;
        };
        rows.push_back(mecke_row("C8.cross", "indicator of atom a times N_b squared",
                                 mecke_check(f, m, Region::all(), plan_for(opt, "C8.b", 1e5))));
    }
    {
        DensityMeasure d;
        d.reference = ReferenceMeasure::lebesgue(GroundSpace::box({0.0, 0.0}, {1.0, 1.0}), 3.0);
        d.density = [](const Point& x) { return 0.5 + x.x[0]; };
        d.bound = 1.5;
        d.known_mass = 3.0;
        const MeckeIntegrand f = [](const Point& x, const PointConfiguration& phi) {
            int near = 0;
            for (const auto& [y, k] : phi.entries()) {
                const double dx = y.x[0] - x.x[0];
                const double dy = y.x[1] - x.x[1];
                if (dx * dx + dy * dy < 0.09) near += k;
            }
            return x.x[1] * near;
        };
        rows.push_back(mecke_row("C8.continuum", "neighbours within 0.3 on the unit square",
                                 mecke_check(f, d, Region::all(), plan_for(opt, "C8.c", 1e5))));
    }
    return rows;
}

std::vector<CheckRow> c9(const CheckOptions& opt) {
    const double theta = 2.0;
    const double beta0 = 1.0;
    const auto p = JumpPerturbation::gamma_scale(theta, beta0);
    LevyModel model;
    model.nu_star = JumpMeasure::symmetric_stable(1.0, 1.0);
    model.nu_delta = p.delta_at(beta0);
    model.t0 = 1.0;
    model.eps = 0.05;
    model.validate();
    const auto est = levy_nonlinear_derivative(path_functionals::terminal(), model, p, plan_for(opt, "C9", 1e5));
    std::vector<CheckRow> rows;
    rows.push_back(sigma_row("C9.estimate", 9, "gamma scale derivative of E X_t0", est, -2.0));
    boost::math::quadrature::exp_sinh<double> q;
    const double quad =
        -theta * model.t0 * q.integrate([&](double x) { return x * std::exp(-beta0 * x); }, 0.0,
                                        std::numeric_limits<double>::infinity());
    rows.push_back(close_row("C9.quadrature", 9, "quadrature of −θ t0 ∫ x exp(−β0 x) dx", quad, -2.0, 1e-6));
    return rows;
}

LevyModel two_sided_cp() {
    LevyModel m;
    m.nu_star = JumpMeasure::compound_poisson_1d({{1.0, 1.0}, {-0.7, 1.5}});
    m.b = drift_from_uncompensated(Jump{0.2, 0, 0, 0}, m.nu_star, 1);
    m.t0 = 1.0;
    m.grid = 1;
    m.validate();
    return m;
}

std::vector<CheckRow> c10(const CheckOptions& opt) {
    const auto model = two_sided_cp();
    const auto dir = JumpMeasure::signed_atoms_1d({{1.0, 0.5}, {-0.7, -0.5}});
    const auto p = JumpPerturbation::linear(model, dir, 0.0, -0.5, 0.5);
    // The kernel bound must be checked on at least 1e6 samples at any scale.
    auto plan = plan_for(opt, "C10.estimator", 1e6);
    plan.samples = std::max<std::uint64_t>(plan.samples, 1000000);
    const auto sup = supremum_derivative(model, dir, plan);
    const auto fd = levy_coupled_fd(path_functionals::supremum(), model, p, 0.05, plan_for(opt, "C10.fd", 1e6));
    std::vector<CheckRow> rows;
    rows.push_back(sigma_row("C10.fd", 10, "supremum derivative vs coupled difference", sup.estimate, fd.mean, fd.se));
    rows.push_back(make_row("C10.kernel", 10, "max kernel identity gap", sup.max_kernel_gap, 0.0, 1e-12,
                            sup.max_kernel_gap <= 1e-12));
    const double need = static_cast<double>(plan.samples);
    std::ostringstream d;
    d << "checks=" << sup.kernel_checks;
    rows.push_back(make_row("C10.bound", 10, "samples with |Δ| > 2|x|", static_cast<double>(sup.bound_violations), 0.0,
                            0.0, sup.bound_violations == 0 && static_cast<double>(sup.kernel_checks) >= need,
                            d.str()));
    return rows;
}

std::vector<CheckRow> invariants(const CheckOptions& opt) {
    std::vector<CheckRow> rows;
    // Moments of simulated paths against the triplet formulas.
    auto moment_rows = [&](const std::string& tag, const LevyModel& model) {
        const auto tm = triplet_moments(model);
        const PathSimulator sim(model);
        const auto plan = plan_for(opt, "I.moments." + tag, 2e4);
        const auto mean = mc_mean(plan, tag_of("moments-mean"), [&](RngStream& rng) {
            return sim.simulate(rng).terminal()[0];
        });
        const auto sq = mc_mean(plan, tag_of("moments-square"), [&](RngStream& rng) {
            const double x = sim.simulate(rng).terminal()[0] - tm.mean_simulated;
            return x * x;
        });
        rows.push_back(sigma_row("I.mean_" + tag, 0, "E X_t0 of " + tag + " vs triplet", mean, tm.mean_simulated));
        rows.push_back(sigma_row("I.var_" + tag, 0, "Var X_t0 of " + tag + " vs triplet", sq, tm.var_simulated));
    };
    {
        auto m = two_sided_cp();
        m.sigma = {0.25};
        m.grid = 16;
        moment_rows("cp", m);
    }
    {
        LevyModel m;
        m.nu_star = JumpMeasure::gamma_tail(2.0, 1.0);
        m.b = Jump{0.1, 0, 0, 0};
        m.eps = 1e-3;
        m.validate();
        moment_rows("gamma", m);
    }
    {
        const auto b = drift_adjust(Jump{0.5, 0, 0, 0}, JumpMeasure::gamma_tail(2.0, 1.0), 1.0);
        rows.push_back(close_row("I.drift_gamma", 0, "drift adjustment by a gamma measure", b[0],
                                 0.5 + 2.0 * (1.0 - std::exp(-1.0)), 1e-7));
    }
    {
        // Inserting a jump moves the terminal value by exactly that jump.
        const auto model = two_sided_cp();
        const PathSimulator sim(model);
        RngStream rng(opt.seed, tag_of("I.terminal"));
        double gap = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const auto w = sim.simulate(rng);
            const double t = rng.uniform() * model.t0;
            const double x = 4.0 * rng.uniform() - 2.0;
            gap = std::max(gap, std::abs(w.shifted(t, Jump{x, 0, 0, 0}).terminal()[0] - w.terminal()[0] - x));
        }
        rows.push_back(make_row("I.terminal_shift", 0, "max |Δ X_t0 − x| over 2000 shifts", gap, 0.0, 1e-12,
                                gap <= 1e-12));
    }
    {
        // Rate change 1 → 2 of a single jump size: P(no jumps) = exp(−2).
        LevyModel m;
        m.nu_star = JumpMeasure::compound_poisson_1d({{1.0, 1.0}});
        m.grid = 1;
        m.validate();
        LevySeriesOptions so;
        so.n_max = 8;
        so.plan = plan_for(opt, "I.levy_series", 2e4);
        so.max_order_samples = std::max<std::uint64_t>(so.plan.samples, std::uint64_t{1} << 16);
        const auto r = levy_series(path_functionals::no_jumps(), m, JumpMeasure::compound_poisson_1d({{1.0, 1.0}}), so);
        double var = 0.0;
        for (double se : r.term_se) var += se * se;
        rows.push_back(sigma_row("I.levy_series", 0, "jump-rate series for P(no jumps)",
                                 Estimate{r.value(), std::sqrt(var), so.plan.samples}, std::exp(-2.0)));
    }
    {
        // Nondecreasing model: Y_t ≤ 0, so the kernel is x itself.
        LevyModel m;
        m.nu_star = JumpMeasure::compound_poisson_1d({{1.0, 1.0}, {0.5, 1.0}});
        m.b = drift_from_uncompensated(Jump{0.3, 0, 0, 0}, m.nu_star, 1);
        m.grid = 1;
        m.validate();
        const auto dir = JumpMeasure::compound_poisson_1d({{1.0, 0.5}});
        const auto r = supremum_derivative(m, dir, plan_for(opt, "I.sup_monotone", 2e4));
        rows.push_back(close_row("I.sup_monotone", 0, "nondecreasing model gives t0 ∫ x g dν*", r.estimate.mean, 0.5,
                                 1e-12));
        const auto zero = supremum_derivative(m, JumpMeasure(1), plan_for(opt, "I.sup_zero", 4096));
        rows.push_back(make_row("I.sup_zero", 0, "zero direction gives 0 with se 0", zero.estimate.mean, 0.0, 0.0,
                                zero.estimate.mean == 0.0 && zero.estimate.se == 0.0));
    }
    for (auto& r : rows) r.formula = "Levy path invariants";
    return rows;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string criterion_formula(int k) {
    switch (k) {
        case 1:
        case 2: return "variational series";
        case 3: return "Fock space identity";
        case 4: return "likelihood ratio reweighting";
        case 5: return "Hellinger distance of Poisson laws";
        case 6: return "Margulis-Russo formula";
        case 7: return "Frechet remainder bound";
        case 8: return "Mecke equation";
        case 9: return "gamma scale derivative";
        case 10: return "running supremum derivative";
        case 11: return "determinism contract";
        default: return "Levy path invariants";
    }
}

std::string criterion_title(int k) {
    switch (k) {
        case 1: return "void-probability series";
        case 2: return "quadratic functional series";
        case 3: return "Fock identity";
        case 4: return "likelihood reweighting";
        case 5: return "Hellinger identity";
        case 6: return "Russo derivatives";
        case 7: return "Frechet remainder";
        case 8: return "Mecke identity";
        case 9: return "Levy gamma-scale derivative";
        case 10: return "supremum derivative";
        case 11: return "determinism";
        default: return "invariants";
    }
}

std::vector<CheckRow> run_criterion(int k, const CheckOptions& opt) {
    switch (k) {
        case 1: return c1();
        case 2: return c2();
        case 3: return c3(opt);
        case 4: return c4(opt);
        case 5: return c5(opt);
        case 6: return c6(opt);
        case 7: return c7();
        case 8: return c8(opt);
        case 9: return c9(opt);
        case 10: return c10(opt);
        default: throw std::out_of_range("criterion index must be in 1..10");
    }
}

std::vector<CheckRow> run_invariants(const CheckOptions& opt) { return invariants(opt); }

std::vector<CheckRow> run_battery(const CheckOptions& opt) {
    std::vector<CheckRow> all;
    for (int k = 1; k <= 10; ++k) {
        auto rows = run_criterion(k, opt);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    auto inv = run_invariants(opt);
    all.insert(all.end(), inv.begin(), inv.end());
    return all;
}

std::string rows_to_csv(const std::vector<CheckRow>& rows) {
    std::string out = "id,criterion,name,formula,value,reference,tolerance,pass\n";
    for (const auto& r : rows) {
        out += csv_field(r.id) + "," + std::to_string(r.criterion) + "," + csv_field(r.name) + "," +
               csv_field(r.formula) + "," + fmt(r.value) + "," + fmt(r.reference) + "," + fmt(r.tolerance) + "," +
               (r.pass ? "pass" : "fail") + "\n";
    }
    return out;
}

}  // namespace perturb
