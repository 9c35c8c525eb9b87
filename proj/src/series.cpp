#include "perturb/series.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "perturb/configuration.hpp"
#include "perturb/sampler.hpp"

namespace perturb {

std::string SeriesResult::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17);
    const bool with_se = std::any_of(term_se.begin(), term_se.end(), [](double s) { return s != 0.0; });
    os << "order,term,partial_sum,abs_term" << (with_se ? ",term_se" : "") << '\n';
    for (std::size_t n = 0; n < terms.size(); ++n) {
        os << n << ',' << terms[n] << ',' << partial_sums[n] << ',' << abs_terms[n];
        if (with_se) os << ',' << term_se[n];
        os << '\n';
    }
    return os.str();
}

bool append_series_term(SeriesResult& r, double term, double abs_term, double se, double eps, bool mc) {
    r.terms.push_back(term);
    r.abs_terms.push_back(abs_term);
    r.term_se.push_back(se);
    r.partial_sums.push_back((r.partial_sums.empty() ? 0.0 : r.partial_sums.back()) + term);
    const std::size_t n = r.terms.size() - 1;
    auto small = [&](std::size_t i) {
        const double lim = mc ? 2.0 * r.term_se[i] + eps : eps;
        return std::abs(r.terms[i]) < lim || (mc && r.terms[i] == 0.0 && r.term_se[i] == 0.0);
    };
    if (n >= 2 && small(n) && small(n - 1)) {
        r.converged = true;
        r.truncation_order = static_cast<int>(n) - 2;
        return true;
    }
    r.truncation_order = static_cast<int>(n);
    return false;
}

namespace {

SeriesResult series_from_table(const DifferenceTable& table, const std::vector<double>& w, int n_max, double eps) {
    SeriesResult r;
    for (int n = 0; n <= n_max; ++n) {
        const double term = weighted_order_sum(table, w, n);
        const double abs_term = weighted_order_sum(table, w, n, true);
        if (append_series_term(r, term, abs_term, 0.0, eps, false)) break;
    }
    return r;
}

std::uint64_t order_samples(const SeriesOptions& opt, int n) {
    const std::uint64_t base = std::max<std::uint64_t>(opt.plan.samples, 1);
    const std::uint64_t cap = std::max(opt.max_order_samples, base);
    if (n >= 40 || base > (cap >> n)) return cap;
    return base << n;
}

struct TermStats {
    RunningStats term;
    RunningStats abs_term;
};

// Monte Carlo term of order n: points from the normalized reference carry
// weight ρ(W)·(signed density) each; Φ_λ is drawn once per sample.
template <class PhiSampler, class PointSampler>
SeriesResult mc_series(const Functional& f, const PhiSampler& sample_phi, const PointSampler& sample_x,
                       const SeriesOptions& opt, std::uint64_t tag) {
    SeriesResult r;
    double factorial = 1.0;
    for (int n = 0; n <= opt.n_max; ++n) {
        if (n > 0) factorial *= n;
        McPlan plan = opt.plan;
        plan.samples = order_samples(opt, n);
        const auto parts = run_chunks<TermStats>(
            plan, tag + static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ull,
            [&](RngStream& rng, std::uint64_t begin, std::uint64_t end, std::uint64_t) {
                TermStats s;
                std::vector<Point> xs(static_cast<std::size_t>(n));
                for (std::uint64_t i = begin; i < end; ++i) {
                    double w = 1.0 / factorial;
                    for (auto& x : xs) {
                        const auto [pt, wx] = sample_x(rng);
                        x = pt;
                        w *= wx;
                    }
                    const auto phi = sample_phi(rng);
                    const double d = w == 0.0 ? 0.0 : difference_n(f, phi, xs);
                    s.term.add(w * d);
                    s.abs_term.add(std::abs(w * d));
                }
                return s;
            });
        TermStats total;
        for (const auto& p : parts) {
            total.term.merge(p.term);
            total.abs_term.merge(p.abs_term);
        }
        const auto e = total.term.estimate();
        if (append_series_term(r, e.mean, total.abs_term.mean(), e.se, opt.eps_abs, true)) break;
    }
    return r;
}

DiscreteMeasure reference_for(const DiscreteMeasure& lambda, const DiscreteMeasure& nu, ReferenceChoice choice) {
    switch (choice) {
        case ReferenceChoice::sum: return lambda.plus(nu);
        case ReferenceChoice::lambda_plus_singular: return lambda.plus(lebesgue_decompose(nu, lambda).singular);
        case ReferenceChoice::nu_plus_singular: return nu.plus(lebesgue_decompose(lambda, nu).singular);
        case ReferenceChoice::monotone:
            (void)nu.minus(lambda);  // throws unless ν ≥ λ
            return nu;
    }
    return lambda.plus(nu);
}

void admissibility_gate(const DiscreteMeasure& lambda, const DiscreteMeasure& nu, const SeriesOptions& opt,
                        SeriesResult& r) {
    const auto rho = reference_for(lambda, nu, opt.reference);
    const auto rep = admissibility_check(lambda, nu, rho);
    if (!rep.verdict_l2) {
        const std::string msg = rep.verdict_necessary
                                    ? "square-integrability gaps are infinite; only the Hellinger-type necessary "
                                      "condition holds, so convergence to E_nu f is not guaranteed"
                                    : "square-integrability gaps are infinite";
        if (opt.strict) throw AdmissibilityError(msg);
        r.warnings.push_back(msg);
    }
}

std::vector<std::int32_t> nonzero_atoms(const std::vector<double>& w) {
    std::vector<std::int32_t> out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] != 0.0) out.push_back(static_cast<std::int32_t>(i));
    }
    return out;
}

std::vector<double> gather(const std::vector<double>& w, const std::vector<std::int32_t>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(w[static_cast<std::size_t>(i)]);
    return out;
}

// Reference sampler over atoms with weight ρ(X)·density(atom).
struct AtomProposal {
    ReferencePtr ref;
    std::vector<double> signed_density;
    std::pair<Point, double> operator()(RngStream& rng) const {
        const Point x = ref->sample(rng);
        return {x, ref->mass * signed_density[static_cast<std::size_t>(x.atom)]};
    }
};

}  // namespace

SeriesResult variational_series(const Functional& f, const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                                const SeriesOptions& opt) {
    require_same_space(lambda, nu);
    SeriesResult pre;
    admissibility_gate(lambda, nu, opt, pre);
    SeriesResult r;
    if (opt.mode == EvalMode::exact) {
        const auto p = SignedPerturbation::between(lambda, nu);
        const auto s = p.signed_masses();
        const auto dirs = nonzero_atoms(s);
        const DifferenceTable table(f, lambda, dirs, opt.n_max, opt.enumeration);
        r = series_from_table(table, gather(s, dirs), opt.n_max, opt.eps_abs);
    } else {
        const auto p = SignedPerturbation::between(lambda, nu);
        std::vector<double> sd(p.h_low.size());
        for (std::size_t i = 0; i < sd.size(); ++i) sd[i] = p.h_high[i] - p.h_low[i];
        if (p.rho.total() == 0.0) {
            // Both measures vanish: the series is f(∅).
            r.terms = r.partial_sums = {f(PointConfiguration{})};
            r.abs_terms = {std::abs(r.terms[0])};
            r.term_se = {0.0};
            r.converged = true;
        } else {
            const AtomProposal prop{ReferenceMeasure::discrete(p.rho), sd};
            r = mc_series(
                f, [&](RngStream& rng) { return sample_poisson(lambda, rng); }, prop, opt, tag_of("series-mc"));
        }
    }
    r.warnings = pre.warnings;
    return r;
}

SeriesResult variational_series(const Functional& f, const DensityMeasure& lambda, const DensityMeasure& nu,
                                const SeriesOptions& opt) {
    if (lambda.reference != nu.reference) throw std::invalid_argument("variational_series: references differ");
    if (opt.mode == EvalMode::exact) throw std::invalid_argument("density measures support Monte Carlo mode only");
    const auto& ref = *lambda.reference;
    const Region window = ref.window;
    return mc_series(
        f, [&](RngStream& rng) { return sample_poisson(lambda, window, rng); },
        [&](RngStream& rng) {
            const Point x = ref.sample(rng);
            return std::pair<Point, double>{x, ref.mass * (nu.at(x) - lambda.at(x))};
        },
        opt, tag_of("series-mc-density"));
}

SeriesResult parametric_series(const Functional& f, const PerturbationFamily& family, double theta,
                               const SeriesOptions& opt) {
    if (!family.is_linear()) throw std::invalid_argument("parametric_series needs a linear family (R ≡ 0)");
    if (!family.contains(theta)) throw std::domain_error("θ outside the family's interval");
    const auto base = family.measure_at(family.theta0);
    (void)family.measure_at(theta);  // densities must stay nonnegative at θ
    const double dt = theta - family.theta0;
    const auto dm = family.direction_masses();
    if (opt.mode == EvalMode::exact) {
        const auto dirs = nonzero_atoms(dm);
        auto w = gather(dm, dirs);
        for (double& v : w) v *= dt;
        const DifferenceTable table(f, base, dirs, opt.n_max, opt.enumeration);
        return series_from_table(table, w, opt.n_max, opt.eps_abs);
    }
    std::vector<double> sd(family.direction.size());
    for (std::size_t i = 0; i < sd.size(); ++i) sd[i] = dt * family.direction[i];
    if (family.rho.total() == 0.0) throw std::invalid_argument("parametric_series: reference has no mass");
    const AtomProposal prop{ReferenceMeasure::discrete(family.rho), sd};
    return mc_series(
        f, [&](RngStream& rng) { return sample_poisson(base, rng); }, prop, opt, tag_of("parametric-mc"));
}

Estimate gateaux_derivative(const Functional& f, const DiscreteMeasure& lambda, const std::vector<double>& h,
                            const DiscreteMeasure& rho, EvalMode mode, const McPlan& plan,
                            const EnumerationPlan& enumeration) {
    require_same_space(lambda, rho);
    if (h.size() != rho.size()) throw std::invalid_argument("gateaux_derivative: direction size mismatch");
    std::vector<double> c(h.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = h[i] * rho.mass(i);
    Estimate e;
    if (mode == EvalMode::exact) {
        const auto dirs = nonzero_atoms(c);
        if (dirs.empty()) return e;
        const DifferenceTable table(f, lambda, dirs, 1, enumeration);
        e.mean = weighted_order_sum(table, gather(c, dirs), 1);
        return e;
    }
    if (rho.total() == 0.0) return e;
    const auto ref = ReferenceMeasure::discrete(rho);
    return mc_mean(plan, tag_of("gateaux-mc"), [&](RngStream& rng) {
        const Point x = ref->sample(rng);
        const double w = ref->mass * h[static_cast<std::size_t>(x.atom)];
        if (w == 0.0) return 0.0;
        auto phi = sample_poisson(lambda, rng);
        const double base = f(phi);
        phi.add(x);
        return w * (f(phi) - base);
    });
}

Estimate mixed_sample_value(const Functional& f, const DiscreteMeasure& lambda, const DiscreteMeasure& mu,
                            const McPlan& plan) {
    require_same_space(lambda, mu);
    return mc_mean(plan, tag_of("mixed-sample"), [&](RngStream& rng) {
        auto phi = sample_poisson(lambda, rng);
        const auto extra = sample_poisson(mu, rng);
        for (const auto& [x, k] : extra.entries()) phi.add(x, k);
        return f(phi);
    });
}

double frechet_o_tilde(double t) {
    const double x = t * t;
    if (x < 0.5) {
        // e^x − 1 − x = Σ_{k≥2} x^k / k!
        double term = x * x / 2.0;
        double s = 0.0;
        for (int k = 2; k < 40 && term > 0.0; ++k) {
            s += term;
            term *= x / (k + 1);
        }
        return std::sqrt(s);
    }
    return std::sqrt(std::expm1(x) - x);
}

double higher_order_energy(const Functional& f, const DiscreteMeasure& lambda, const EnumerationPlan& enumeration) {
    Functional sq = f;
    sq.name = f.name + "^2";
    sq.eval = [&f](const PointConfiguration& phi) {
        const double v = f(phi);
        return v * v;
    };
    if (f.bound) {
        sq.bound = *f.bound * *f.bound;
    } else if (f.growth) {
        sq.growth = 2.0 * *f.growth;
    }
    const double ef2 = exact_expectation(sq, lambda, enumeration);
    const double ef = exact_expectation(f, lambda, enumeration);
    const auto dirs = nonzero_atoms(lambda.masses());
    double first = 0.0;
    if (!dirs.empty()) {
        const DifferenceTable table(f, lambda, dirs, 1, enumeration);
        std::vector<int> m(dirs.size(), 0);
        for (std::size_t i = 0; i < dirs.size(); ++i) {
            m[i] = 1;
            const double d = table.at(m);
            first += d * d * lambda.mass(static_cast<std::size_t>(dirs[i]));
            m[i] = 0;
        }
    }
    return std::max(0.0, ef2 - ef * ef - first);
}

FrechetReport frechet_remainder_check(const Functional& f, const DiscreteMeasure& lambda,
                                      const std::vector<std::vector<double>>& h_list,
                                      const EnumerationPlan& enumeration) {
    FrechetReport rep;
    rep.second_factor = std::sqrt(higher_order_energy(f, lambda, enumeration));
    const double base = exact_expectation(f, lambda, enumeration);
    for (const auto& h : h_list) {
        if (h.size() != lambda.size()) throw std::invalid_argument("frechet_remainder_check: direction size mismatch");
        std::vector<double> masses(lambda.size());
        double norm2 = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (lambda.mass(i) == 0.0) continue;
            if (1.0 + h[i] < 0.0) throw std::domain_error("direction violates 1 + h >= 0");
            masses[i] = (1.0 + h[i]) * lambda.mass(i);
            norm2 += h[i] * h[i] * lambda.mass(i);
        }
        const DiscreteMeasure lh(lambda.space(), std::move(masses));
        const double g = gateaux_derivative(f, lambda, h, lambda, EvalMode::exact, {}, enumeration).mean;
        FrechetRow row;
        row.norm = std::sqrt(norm2);
        row.remainder = exact_expectation(f, lh, enumeration) - base - g;
        row.bound = rep.second_factor * frechet_o_tilde(row.norm);
        row.ratio = row.norm > 0.0 ? std::abs(row.remainder) / row.norm : 0.0;
        // Exact-arithmetic slack for the enumeration tail and rounding.
        row.within_bound = std::abs(row.remainder) <= row.bound + 1e-12;
        rep.rows.push_back(row);
    }
    rep.all_within_bound =
        std::all_of(rep.rows.begin(), rep.rows.end(), [](const FrechetRow& r) { return r.within_bound; });
    std::vector<std::size_t> order(rep.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rep.rows[a].norm > rep.rows[b].norm; });
    rep.ratio_decreasing = true;
    for (std::size_t k = 1; k < order.size(); ++k) {
        if (!(rep.rows[order[k]].ratio < rep.rows[order[k - 1]].ratio)) rep.ratio_decreasing = false;
    }
    return rep;
}

}  // namespace perturb
