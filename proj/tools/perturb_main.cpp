// perturb: batch runner for the perturbation studies.  Every subcommand reads
// a flat key-value config, writes CSV files plus summary.txt into --out, and
// exits 0 (pass), 2 (config error), 3 (admissibility failure) or 4 (a check
// failed).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "perturb/checks.hpp"
#include "perturb/config.hpp"
#include "perturb/derivatives.hpp"
#include "perturb/functionals.hpp"
#include "perturb/levy.hpp"
#include "perturb/likelihood.hpp"
#include "perturb/measure.hpp"
#include "perturb/series.hpp"

namespace fs = std::filesystem;
using namespace perturb;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAdmissibility = 3;
constexpr int kExitFailed = 4;

struct Context {
    Config cfg;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    fs::path out = "perturb_out";
    bool strict = false;
    double scale = 1.0;
};

struct Outcome {
    std::string formula;
    std::vector<CheckRow> rows;
    std::vector<std::string> notes;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

McPlan plan_of(const Context& ctx, const std::string& key, double fallback) {
    McPlan p;
    const double n = ctx.cfg.num(key, fallback) * ctx.scale;
    p.samples = static_cast<std::uint64_t>(std::max(2048.0, std::round(n)));
    p.seed = ctx.seed;
    p.workers = ctx.workers;
    return p;
}

// [measures] atoms = a, b; <name> = masses aligned with the atoms.
SpacePtr space_of(const Config& c) {
    const auto names = split_list(c.str("measures.atoms"));
    if (names.empty()) throw ConfigError("measures.atoms is empty");
    return GroundSpace::discrete(names);
}

DiscreteMeasure measure_of(const Config& c, const SpacePtr& s, const std::string& key) {
    auto m = c.nums(key);
    if (m.size() != s->atom_count())
        throw ConfigError(key + ": expected " + std::to_string(s->atom_count()) + " masses");
    return DiscreteMeasure(s, m);
}

std::vector<double> vec_of(const Config& c, const std::string& key, std::size_t n) {
    auto v = c.nums(key);
    if (v.size() != n) throw ConfigError(key + ": expected " + std::to_string(n) + " entries");
    return v;
}

Region region_of(const Config& c, const SpacePtr& s, const std::string& key) {
    const std::string r = c.str(key, "all");
    if (r == "all") return Region::all();
    std::vector<std::int32_t> ids;
    for (const auto& n : split_list(r)) {
        const auto id = s->find_atom(n);
        if (!id) throw ConfigError(key + ": unknown atom '" + n + "'");
        ids.push_back(*id);
    }
    return Region::atoms(ids);
}

Functional functional_of(const Config& c, const SpacePtr& s, const std::string& section) {
    const auto id = c.str(section + ".functional");
    try {
        return functionals::by_id(id, region_of(c, s, section + ".region"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(section + ".functional: " + e.what());
    }
}

EvalMode mode_of(const Config& c, const std::string& key) {
    const auto m = c.str(key, "exact");
    if (m == "exact") return EvalMode::exact;
    if (m == "mc") return EvalMode::mc;
    throw ConfigError(key + ": expected exact or mc");
}

PerturbationFamily family_of(const Config& c, const SpacePtr& s) {
    const auto rho = measure_of(c, s, "family.rho");
    return PerturbationFamily::linear(rho, vec_of(c, "family.h_base", s->atom_count()),
                                      vec_of(c, "family.direction", s->atom_count()), c.num("family.theta0", 0.0),
                                      c.num("family.lo"), c.num("family.hi"));
}

CheckRow row(const std::string& id, const std::string& formula, const std::string& name, double value,
             double reference, double tol) {
    CheckRow r;
    r.id = id;
    r.name = name;
    r.formula = formula;
    r.value = value;
    r.reference = reference;
    r.tolerance = tol;
    r.pass = std::abs(value - reference) <= tol;
    return r;
}

CheckRow sigma_row(const std::string& id, const std::string& formula, const std::string& name, const Estimate& e,
                   double reference, double reference_se = 0.0) {
    return row(id, formula, name, e.mean, reference, 3.0 * std::sqrt(e.se * e.se + reference_se * reference_se));
}

std::string estimate_csv(const std::vector<std::pair<std::string, Estimate>>& rows) {
    std::string out = "quantity,estimate,stderr,samples\n";
    for (const auto& [k, e] : rows) out += k + "," + fmt(e.mean) + "," + fmt(e.se) + "," + std::to_string(e.n) + "\n";
    return out;
}

// ---- discrete studies ------------------------------------------------------

Outcome run_series(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto s = space_of(c);
    const auto f = functional_of(c, s, "series");
    SeriesOptions o;
    o.n_max = static_cast<int>(c.integer("series.n_max", 30));
    o.mode = mode_of(c, "series.mode");
    o.plan = plan_of(ctx, "series.samples", 1e5);
    o.eps_abs = c.num("series.eps", 1e-10);
    o.strict = ctx.strict;
    const auto kind = c.str("series.kind", "variational");
    Outcome out;
    SeriesResult r;
    double oracle = 0.0;
    if (kind == "variational") {
        out.formula = criterion_formula(1);
        const auto lambda = measure_of(c, s, "measures.lambda");
        const auto nu = measure_of(c, s, "measures.nu");
        r = variational_series(f, lambda, nu, o);
        oracle = exact_expectation(f, nu, o.enumeration);
    } else if (kind == "parametric") {
        out.formula = "parametric series of a linear family";
        const auto fam = family_of(c, s);
        const double theta = c.num("family.theta");
        r = parametric_series(f, fam, theta, o);
        oracle = exact_expectation(f, fam.measure_at(theta), o.enumeration);
    } else {
        throw ConfigError("series.kind: expected variational or parametric");
    }
    write_file(ctx.out / "series.csv", r.to_csv());
    out.notes = r.warnings;
    if (o.mode == EvalMode::exact) {
        out.rows.push_back(row("final_partial_sum", out.formula, "final partial sum vs exact expectation", r.value(),
                               oracle, c.num("series.tolerance", 1e-8)));
    } else {
        double var = 0.0;
        for (double se : r.term_se) var += se * se;
        out.rows.push_back(sigma_row("final_partial_sum", out.formula, "final partial sum vs exact expectation",
                                     Estimate{r.value(), std::sqrt(var), o.plan.samples}, oracle));
    }
    CheckRow conv;
    conv.id = "converged";
    conv.name = "stopping rule reached";
    conv.formula = out.formula;
    conv.value = r.truncation_order;
    conv.pass = r.converged;
    out.rows.push_back(conv);
    return out;
}

Outcome run_deriv(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto kind = c.str("deriv.kind");
    const double delta = c.num("deriv.delta", 1e-2);
    const double tol = c.num("deriv.tolerance", 1e-6);
    Outcome out;
    out.formula = kind == "pivotal" ? criterion_formula(6) : "derivative of the intensity family";
    std::vector<std::pair<std::string, Estimate>> csv;
    if (kind == "nonlinear") {
        const auto sizes = c.nums("caricature.sizes");
        const auto car = gamma_scale_caricature(sizes, vec_of(c, "caricature.weights", sizes.size()),
                                                c.num("caricature.theta"), c.num("caricature.alpha"),
                                                c.num("caricature.beta0"));
        const auto& fam = car.family;
        const auto s = fam.rho.space();
        const auto f = functional_of(c, s, "deriv");
        const auto d = nonlinear_derivative(f, fam);
        const double fd = richardson_derivative(
            [&](double t) { return exact_expectation(f, fam.measure_at(t)); }, fam.theta0, delta);
        csv.emplace_back("derivative", d);
        csv.emplace_back("richardson", Estimate{fd, 0.0, 0});
        out.rows.push_back(row("derivative", out.formula, "nonlinear derivative vs Richardson", d.mean, fd, tol));
    } else {
        const auto s = space_of(c);
        const auto f = functional_of(c, s, "deriv");
        const double theta = c.num("deriv.theta");
        if (kind == "linear") {
            const auto fam = family_of(c, s);
            const auto mode = mode_of(c, "deriv.mode");
            const auto d = linear_derivative(f, fam, theta, mode, plan_of(ctx, "deriv.samples", 1e5));
            csv.emplace_back("derivative", d);
            if (mode == EvalMode::exact) {
                const double fd = richardson_derivative(
                    [&](double t) { return exact_expectation(f, fam.measure_at(t)); }, theta, delta);
                csv.emplace_back("richardson", Estimate{fd, 0.0, 0});
                out.rows.push_back(row("derivative", out.formula, "linear derivative vs Richardson", d.mean, fd, tol));
            } else {
                auto plan = plan_of(ctx, "deriv.samples", 1e5);
                plan.seed = ctx.seed + 1;
                const auto fd = coupled_fd_derivative(f, fam, theta, c.num("deriv.fd_delta", 0.05), plan);
                csv.emplace_back("coupled_fd", fd);
                out.rows.push_back(sigma_row("derivative", out.formula, "linear derivative vs coupled difference", d,
                                             fd.mean, fd.se));
            }
        } else if (kind == "scaled" || kind == "pivotal") {
            const auto lambda = measure_of(c, s, "measures.lambda");
            const double fd = richardson_derivative(
                [&](double t) { return exact_expectation(f, lambda.scaled(t)); }, theta, delta);
            csv.emplace_back("richardson", Estimate{fd, 0.0, 0});
            if (kind == "scaled") {
                const auto d = scaled_derivative(f, lambda, theta);
                csv.emplace_back("derivative", d);
                out.rows.push_back(row("derivative", out.formula, "scaled derivative vs Richardson", d.mean, fd, tol));
            } else {
                const auto d = pivotal_derivative(f, lambda, theta, plan_of(ctx, "deriv.samples", 1e5));
                csv.emplace_back("pivotal", d);
                out.rows.push_back(sigma_row("derivative", out.formula, "pivotal count vs Richardson", d, fd));
            }
        } else {
            throw ConfigError("deriv.kind: expected linear, nonlinear, scaled or pivotal");
        }
    }
    write_file(ctx.out / "deriv.csv", estimate_csv(csv));
    return out;
}

Outcome run_likelihood(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto s = space_of(c);
    const auto nu = measure_of(c, s, "measures.nu");
    const auto rho = measure_of(c, s, "measures.rho");
    const auto g = functional_of(c, s, "likelihood");
    Outcome out;
    out.formula = criterion_formula(4);
    const double first = exact_first_moment(nu, rho);
    const double second = exact_second_moment(nu, rho);
    const double bound = second_moment_bound(nu, rho);
    const double direct = exact_expectation(g, nu);
    const auto ex = reweighted_expectation(g, nu, rho, EvalMode::exact);
    const auto mc = reweighted_expectation(g, nu, rho, EvalMode::mc, plan_of(ctx, "likelihood.samples", 1e5));
    out.rows.push_back(row("first_moment", out.formula, "E_rho L", first, 1.0, 1e-10));
    out.rows.push_back(row("second_moment", out.formula, "E_rho L^2 vs exp of the square gap", second, bound, 1e-10));
    out.rows.push_back(row("reweighted_exact", out.formula, "reweighted vs direct (exact)", ex.mean, direct, 1e-10));
    out.rows.push_back(sigma_row("reweighted_mc", out.formula, "reweighted vs direct (MC)", mc, direct));
    write_file(ctx.out / "likelihood.csv",
               estimate_csv({{"first_moment", {first, 0, 0}},
                             {"second_moment", {second, 0, 0}},
                             {"second_moment_bound", {bound, 0, 0}},
                             {"direct", {direct, 0, 0}},
                             {"reweighted_exact", ex},
                             {"reweighted_mc", mc}}));
    return out;
}

Outcome run_hellinger(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto s = space_of(c);
    const auto lambda = measure_of(c, s, "measures.lambda");
    const auto nu = measure_of(c, s, "measures.nu");
    const auto rep = c.has("measures.rho") ? admissibility_check(lambda, nu, measure_of(c, s, "measures.rho"))
                                           : admissibility_check(lambda, nu);
    Outcome out;
    out.formula = criterion_formula(5);
    std::ostringstream csv;
    csv << "quantity,value\n"
        << "l2_gap_low," << fmt(rep.l2_gap_low) << "\nl2_gap_high," << fmt(rep.l2_gap_high) << "\nhellinger,"
        << fmt(rep.hellinger) << "\nhellinger_poisson," << fmt(rep.hellinger_poisson) << "\nnecessary_sum,"
        << fmt(rep.necessary_sum) << "\nverdict_l2," << rep.verdict_l2 << "\nverdict_necessary,"
        << rep.verdict_necessary << "\nverdict_monotone," << rep.verdict_monotone << "\n";
    write_file(ctx.out / "hellinger.csv", csv.str());
    out.rows.push_back(row("decomposition", out.formula, "H by densities vs by Lebesgue decomposition",
                           hellinger_measures(lambda, nu), hellinger_by_decomposition(lambda, nu), 1e-12));
    out.rows.push_back(row("poisson_law", out.formula, "1 - exp(-H) of the report",
                           rep.hellinger_poisson, hellinger_poisson_from(rep.hellinger), 1e-15));
    if (!rep.verdict_l2) {
        const std::string msg = "square-integrability gaps are not finite below the cap";
        if (ctx.strict) throw AdmissibilityError(msg);
        out.notes.push_back(msg);
    }
    return out;
}

// ---- Lévy studies ----------------------------------------------------------

JumpMeasure jump_measure_of(const Config& c, const std::string& sec) {
    const auto b = c.str(sec + ".builder", "none");
    if (b == "none") return JumpMeasure(1);
    if (b == "cp") {
        const auto xs = c.nums(sec + ".atoms");
        const auto ms = vec_of(c, sec + ".masses", xs.size());
        std::vector<std::pair<double, double>> a;
        for (std::size_t i = 0; i < xs.size(); ++i) a.emplace_back(xs[i], ms[i]);
        return JumpMeasure::signed_atoms_1d(a);
    }
    if (b == "gamma") return JumpMeasure::gamma_tail(c.num(sec + ".theta"), c.num(sec + ".beta"));
    if (b == "symmetric_stable") return JumpMeasure::symmetric_stable(c.num(sec + ".alpha"), c.num(sec + ".c", 1.0));
    if (b == "stable")
        return JumpMeasure::stable(c.num(sec + ".alpha"),
                                   {{Jump{1.0}, c.num(sec + ".c_pos", 1.0)}, {Jump{-1.0}, c.num(sec + ".c_neg", 1.0)}},
                                   1);
    if (b == "stable_direction")
        return JumpMeasure::stable_direction(c.num(sec + ".alpha"), c.num(sec + ".alpha_prime"),
                                             {{Jump{1.0}, c.num(sec + ".c_pos", 1.0)},
                                              {Jump{-1.0}, c.num(sec + ".c_neg", 1.0)}},
                                             1);
    if (b == "gamma_scale") return JumpMeasure::gamma_scale_direction(c.num(sec + ".theta"), c.num(sec + ".beta0"));
    throw ConfigError(sec + ".builder: unknown builder '" + b + "'");
}

LevyModel model_of(const Config& c) {
    LevyModel m;
    m.nu_star = jump_measure_of(c, "model");
    if (!m.nu_star.is_positive()) throw ConfigError("model: the reference jump measure must be nonnegative");
    m.nu_delta = jump_measure_of(c, "delta");
    m.t0 = c.num("model.t0", 1.0);
    m.eps = c.num("model.eps", 0.0);
    m.grid = static_cast<int>(c.integer("model.grid", 64));
    const double var = c.num("model.sigma", 0.0);
    if (var > 0.0) m.sigma = {var};
    if (c.has("model.drift") && c.has("model.drift_uncompensated"))
        throw ConfigError("model: give either drift or drift_uncompensated");
    if (c.has("model.drift_uncompensated")) {
        m.b = drift_from_uncompensated(Jump{c.num("model.drift_uncompensated")}, m.nu(), 1);
    } else {
        m.b = Jump{c.num("model.drift", 0.0)};
    }
    m.validate();
    return m;
}

PathFunctional path_functional_of(const Config& c, const std::string& key) {
    try {
        return path_functionals::by_id(c.str(key, "terminal"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

Outcome run_levy_sim(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto model = model_of(c);
    const auto plan = plan_of(ctx, "sim.samples", 2e4);
    const PathSimulator sim(model);
    const auto tm = triplet_moments(model);
    const auto mean = mc_mean(plan, tag_of("sim-mean"),
                                      [&](RngStream& rng) { return sim.simulate(rng).terminal()[0]; });
    const auto sq = mc_mean(plan, tag_of("sim-square"), [&](RngStream& rng) {
        const double x = sim.simulate(rng).terminal()[0] - tm.mean_simulated;
        return x * x;
    });
    const auto sup = mc_mean(plan, tag_of("sim-sup"), [&](RngStream& rng) { return sim.simulate(rng).supremum(); });
    Outcome out;
    out.formula = "characteristic triplet moments";
    out.rows.push_back(sigma_row("mean", out.formula, "E X_t0 vs triplet", mean, tm.mean_simulated));
    out.rows.push_back(sigma_row("variance", out.formula, "Var X_t0 vs triplet", sq, tm.var_simulated));
    std::ostringstream csv;
    csv << "quantity,estimate,stderr,exact,exact_untruncated\n"
        << "mean," << fmt(mean.mean) << "," << fmt(mean.se) << "," << fmt(tm.mean_simulated) << ","
        << fmt(tm.mean_exact) << "\nvariance," << fmt(sq.mean) << "," << fmt(sq.se) << "," << fmt(tm.var_simulated)
        << "," << fmt(tm.var_exact) << "\nsupremum," << fmt(sup.mean) << "," << fmt(sup.se) << ",,\n";
    write_file(ctx.out / "levy_sim.csv", csv.str());
    // A few sample paths: jump times and sizes.
    std::ostringstream paths;
    paths << "path,t,x\n";
    RngStream rng(ctx.seed, tag_of("sim-paths"));
    for (int i = 0; i < static_cast<int>(c.integer("sim.paths", 5)); ++i) {
        const auto w = sim.simulate(rng);
        for (const auto& j : w.jumps()) paths << i << "," << fmt(j.t) << "," << fmt(j.x[0]) << "\n";
    }
    write_file(ctx.out / "levy_paths.csv", paths.str());
    return out;
}

Outcome run_levy_deriv(Context& ctx) {
    const auto& c = ctx.cfg;
    auto model = model_of(c);
    const auto f = path_functional_of(c, "deriv.functional");
    const auto plan = plan_of(ctx, "deriv.samples", 1e5);
    Outcome out;
    out.formula = "Levy jump-measure derivative";
    std::vector<std::pair<std::string, Estimate>> csv;
    JumpPerturbation p;
    Estimate d;
    const auto kind = c.str("deriv.kind", "linear");
    if (kind == "gamma_scale") {
        out.formula = criterion_formula(9);
        p = JumpPerturbation::gamma_scale(c.num("perturbation.theta"), c.num("perturbation.beta0"));
        model.nu_delta = p.delta_at(p.theta0);
        d = levy_nonlinear_derivative(f, model, p, plan);
    } else if (kind == "linear") {
        p = JumpPerturbation::linear(model, jump_measure_of(c, "direction"), c.num("perturbation.theta0", 0.0),
                                     c.num("perturbation.lo", -0.5), c.num("perturbation.hi", 0.5));
        d = levy_derivative(f, model, p.direction, plan);
    } else {
        throw ConfigError("deriv.kind: expected linear or gamma_scale");
    }
    csv.emplace_back("derivative", d);
    if (f.name == "terminal") {
        // Δ = x for the terminal value, so the derivative is t0 ∫ x g dν*.
        const double exact = model.t0 * p.direction.first_moment(0.0, std::numeric_limits<double>::infinity())[0];
        csv.emplace_back("closed_form", Estimate{exact, 0.0, 0});
        out.rows.push_back(sigma_row("derivative", out.formula, "estimate vs t0 * integral of x g", d, exact));
    }
    if (c.flag("deriv.fd_oracle", f.name != "terminal")) {
        auto fplan = plan;
        fplan.seed = ctx.seed + 1;
        const auto fd = levy_coupled_fd(f, model, p, c.num("deriv.fd_delta", 0.05), fplan);
        csv.emplace_back("coupled_fd", fd);
        out.rows.push_back(sigma_row("coupled_fd", out.formula, "estimate vs coupled difference", d, fd.mean, fd.se));
    }
    write_file(ctx.out / "levy_deriv.csv", estimate_csv(csv));
    return out;
}

Outcome run_levy_sup(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto model = model_of(c);
    const auto dir = jump_measure_of(c, "direction");
    SupremumOptions so;
    so.bins = static_cast<int>(c.integer("sup.bins", 40));
    so.y_lo = c.num("sup.y_lo", -4.0);
    so.y_hi = c.num("sup.y_hi", 4.0);
    const auto r = supremum_derivative(model, dir, plan_of(ctx, "sup.samples", 1e5), so);
    Outcome out;
    out.formula = criterion_formula(10);
    std::vector<std::pair<std::string, Estimate>> csv{{"derivative", r.estimate}};
    CheckRow kernel = row("kernel_identity", out.formula, "max kernel identity gap", r.max_kernel_gap, 0.0, 1e-12);
    out.rows.push_back(kernel);
    CheckRow bound = row("difference_bound", out.formula, "samples with |Delta| > 2|x|",
                         static_cast<double>(r.bound_violations), 0.0, 0.0);
    out.rows.push_back(bound);
    if (dir.empty()) {
        out.rows.push_back(row("zero_direction", out.formula, "zero direction gives 0", r.estimate.mean, 0.0, 0.0));
        out.rows.push_back(row("zero_direction_se", out.formula, "zero direction gives se 0", r.estimate.se, 0.0, 0.0));
    } else if (c.flag("sup.fd_oracle", true)) {
        const auto p = JumpPerturbation::linear(model, dir, 0.0, c.num("perturbation.lo", -0.5),
                                                c.num("perturbation.hi", 0.5));
        auto fplan = plan_of(ctx, "sup.samples", 1e5);
        fplan.seed = ctx.seed + 1;
        const auto fd =
            levy_coupled_fd(path_functionals::supremum(), model, p, c.num("sup.fd_delta", 0.05), fplan);
        csv.emplace_back("coupled_fd", fd);
        out.rows.push_back(sigma_row("coupled_fd", out.formula, "estimate vs coupled difference", r.estimate, fd.mean,
                                     fd.se));
    }
    write_file(ctx.out / "levy_sup.csv", estimate_csv(csv));
    write_file(ctx.out / "q_histogram.csv", r.q.to_csv());
    return out;
}

Outcome run_validate(Context& ctx) {
    CheckOptions o;
    o.seed = ctx.seed;
    o.workers = ctx.workers;
    o.scale = ctx.scale;
    Outcome out;
    out.formula = "full battery";
    out.rows = run_battery(o);
    return out;
}

std::string summary_of(const std::string& cmd, const Outcome& o) {
    std::ostringstream s;
    s << "subcommand: " << cmd << "\n";
    s << "identity: " << o.formula << "\n";
    for (const auto& n : o.notes) s << "warning: " << n << "\n";
    for (const auto& r : o.rows) {
        s << (r.pass ? "PASS " : "FAIL ") << r.id << "  [" << r.formula << "] " << r.name << ": value=" << fmt(r.value)
          << " reference=" << fmt(r.reference) << " tolerance=" << fmt(r.tolerance);
        if (!r.detail.empty()) s << " (" << r.detail << ")";
        s << "\n";
    }
    return s.str();
}

const char* kHelpColumns =
    "CSV columns:\n"
    "  series:      series.csv order,term,partial_sum,abs_term[,term_se]\n"
    "  deriv, likelihood, levy-deriv, levy-sup: quantity,estimate,stderr,samples\n"
    "  hellinger:   hellinger.csv quantity,value\n"
    "  levy-sim:    levy_sim.csv quantity,estimate,stderr,exact,exact_untruncated; levy_paths.csv path,t,x\n"
    "  levy-sup:    q_histogram.csv lo,hi,mass (plus below/above rows)\n"
    "  all:         checks.csv id,criterion,name,formula,value,reference,tolerance,pass\n"
    "Exit codes: 0 pass, 2 config error, 3 admissibility failure, 4 check failure.";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perturbation studies for Poisson and Levy processes"};
    app.footer(kHelpColumns);
    app.require_subcommand(1);
    std::string config_path;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string out_dir = "perturb_out";
    bool strict = false;
    double scale = 1.0;
    app.add_option("--config", config_path, "experiment config file");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides run.seed)");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--strict", strict, "fail on admissibility warnings");
    app.add_option("--scale", scale, "multiplier for Monte Carlo sample sizes")->check(CLI::PositiveNumber);

    using Runner = Outcome (*)(Context&);
    const std::vector<std::tuple<std::string, std::string, Runner>> commands = {
        {"series", "variational or parametric series against the exact expectation", run_series},
        {"deriv", "linear, nonlinear, scaled or pivotal derivative against finite differences", run_deriv},
        {"likelihood", "likelihood ratio reweighting checks", run_likelihood},
        {"hellinger", "admissibility report", run_hellinger},
        {"levy-sim", "simulate Levy paths and compare moments", run_levy_sim},
        {"levy-deriv", "Levy jump-measure derivative", run_levy_deriv},
        {"levy-sup", "running supremum derivative", run_levy_sup},
        {"validate", "full check battery", run_validate},
    };
    // Accept the global flags after the subcommand as well.
    app.fallthrough();
    std::vector<CLI::App*> subs;
    for (const auto& [name, desc, fn] : commands) subs.push_back(app.add_subcommand(name, desc));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    std::size_t which = 0;
    while (which < subs.size() && !subs[which]->parsed()) ++which;
    const auto& [name, desc, runner] = commands[which];

    Context ctx;
    try {
        if (!config_path.empty()) ctx.cfg = Config::load(config_path);
        // Config values are parsed even when a flag overrides them.
        const std::optional<std::uint64_t> cfg_seed =
            ctx.cfg.has("run.seed") ? std::optional(ctx.cfg.u64("run.seed")) : std::nullopt;
        if (seed_opt->count() > 0) {
            ctx.seed = seed;
        } else if (cfg_seed) {
            ctx.seed = *cfg_seed;
        } else if (name == "validate") {
            ctx.seed = CheckOptions{}.seed;
        } else {
            throw ConfigError("a seed is required (run.seed or --seed)");
        }
        ctx.workers = static_cast<unsigned>(ctx.cfg.u64("run.workers", workers));
        if (app.get_option("--workers")->count() > 0) ctx.workers = workers;
        ctx.out = out_dir;
        ctx.strict = strict || ctx.cfg.flag("run.strict", false);
        ctx.scale = scale;
        if (name != "validate" && config_path.empty()) throw ConfigError(name + " needs --config");
        fs::create_directories(ctx.out);

        const Outcome o = runner(ctx);
        ctx.cfg.require_all_read();
        write_file(ctx.out / "checks.csv", rows_to_csv(o.rows));
        const auto summary = summary_of(name, o);
        write_file(ctx.out / "summary.txt", summary);
        std::cout << summary;
        for (const auto& r : o.rows) {
            if (!r.pass) return kExitFailed;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const AdmissibilityError& e) {
        std::cerr << "admissibility failure: " << e.what() << "\n";
        return kExitAdmissibility;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::out_of_range& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
