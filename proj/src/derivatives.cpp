#include "perturb/derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "perturb/sampler.hpp"

namespace perturb {

Estimate linear_derivative(const Functional& f, const PerturbationFamily& family, double theta, EvalMode mode,
                           const McPlan& plan, const EnumerationPlan& enumeration) {
    if (!family.is_linear()) throw std::invalid_argument("linear_derivative needs a linear family");
    if (!family.contains(theta)) throw std::domain_error("θ outside the family's interval");
    return gateaux_derivative(f, family.measure_at(theta), family.direction, family.rho, mode, plan, enumeration);
}

Estimate nonlinear_derivative(const Functional& f, const PerturbationFamily& family, EvalMode mode,
                              const McPlan& plan, const EnumerationPlan& enumeration) {
    if (const auto problem = family.check(); !problem.empty())
        throw AdmissibilityError("perturbation family hypotheses fail: " + problem);
    return gateaux_derivative(f, family.measure_at(family.theta0), family.direction, family.rho, mode, plan,
                              enumeration);
}

Estimate scaled_derivative(const Functional& f, const DiscreteMeasure& lambda, double theta, EvalMode mode,
                           const McPlan& plan, const EnumerationPlan& enumeration) {
    if (!(theta >= 0.0)) throw std::domain_error("scaled_derivative needs θ >= 0");
    return gateaux_derivative(f, lambda.scaled(theta), std::vector<double>(lambda.size(), 1.0), lambda, mode, plan,
                              enumeration);
}

SeriesResult scaled_taylor_report(const Functional& f, const DiscreteMeasure& lambda, double theta0, double theta,
                                  const SeriesOptions& opt) {
    const auto family = PerturbationFamily::scaled(lambda, theta0, std::max(theta0, theta) + 1.0);
    return parametric_series(f, family, theta, opt);
}

namespace {

double pivotal_sum(const Functional& f, const PointConfiguration& phi, const std::vector<double>* h, bool check) {
    const double full = f(phi);
    PointConfiguration rest = phi;
    double s = 0.0;
    for (const auto& [x, k] : phi.entries()) {
        rest.remove(x);
        const double d = full - f(rest);
        rest.add(x);
        if (check && d < 0.0)
            throw std::domain_error("functional '" + f.name + "' decreased when a point was added; not increasing");
        const double w = h ? (*h)[static_cast<std::size_t>(x.atom)] : 1.0;
        s += k * d * w;
    }
    return s;
}

}  // namespace

Estimate pivotal_derivative(const Functional& f, const DiscreteMeasure& lambda, double theta, const McPlan& plan) {
    if (!(theta > 0.0)) throw std::domain_error("pivotal_derivative needs θ > 0");
    if (!f.increasing) throw std::invalid_argument("pivotal_derivative needs a functional declared increasing");
    const auto m = lambda.scaled(theta);
    Estimate e = mc_mean(plan, tag_of("pivotal"),
                                 [&](RngStream& rng) { return pivotal_sum(f, sample_poisson(m, rng), nullptr, true); });
    e.mean /= theta;
    e.se /= theta;
    return e;
}

Estimate weighted_pivotal_derivative(const Functional& f, const DiscreteMeasure& lambda, const std::vector<double>& h,
                                     const McPlan& plan) {
    if (h.size() != lambda.size()) throw std::invalid_argument("weighted_pivotal_derivative: size mismatch");
    return mc_mean(plan, tag_of("pivotal-weighted"),
                           [&](RngStream& rng) { return pivotal_sum(f, sample_poisson(lambda, rng), &h, false); });
}

bool spot_check_increasing(const Functional& f, const DiscreteMeasure& lambda, int samples, std::uint64_t seed) {
    RngStream rng(seed, tag_of("increasing-check"));
    for (int i = 0; i < samples; ++i) {
        auto phi = sample_poisson(lambda, rng);
        const double before = f(phi);
        const auto atom = static_cast<std::int32_t>(rng() % lambda.size());
        phi.add(Point::on_atom(atom));
        if (f(phi) < before) return false;
    }
    return true;
}

double central_difference(const std::function<double(double)>& F, double theta, double delta) {
    return (F(theta + delta) - F(theta - delta)) / (2.0 * delta);
}

double richardson_derivative(const std::function<double(double)>& F, double theta, double delta) {
    const double d1 = central_difference(F, theta, delta);
    const double d2 = central_difference(F, theta, delta / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

Estimate coupled_fd_derivative(const Functional& f, const PerturbationFamily& family, double theta, double delta,
                               const McPlan& plan) {
    if (!(delta > 0.0)) throw std::invalid_argument("coupled_fd_derivative needs δ > 0");
    const auto lo = family.measure_at(theta - delta);
    const auto hi = family.measure_at(theta + delta);
    return mc_mean(plan, tag_of("coupled-fd"), [&](RngStream& rng) {
        const auto pair = thin_superpose_couple(lo, hi, Region::all(), rng);
        return (f(pair.phi_nu) - f(pair.phi_lambda)) / (2.0 * delta);
    });
}

double exp_tail_remainder(double u, double x) {
    const double ux = u * x;
    if (std::abs(ux) < 0.5) {
        double term = x * ux / 2.0;  // n = 2
        double s = 0.0;
        for (int n = 2; n < 60; ++n) {
            s += term;
            term *= ux / (n + 1);
            if (std::abs(term) < 1e-18 * std::abs(s)) break;
        }
        return s;
    }
    return (std::expm1(ux) - ux) / u;
}

GammaScaleCaricature gamma_scale_caricature(const std::vector<double>& sizes, const std::vector<double>& weights,
                                            double theta, double alpha, double beta0) {
    if (sizes.size() != weights.size() || sizes.empty())
        throw std::invalid_argument("gamma_scale_caricature: sizes/weights mismatch");
    if (!(beta0 > 0.0) || theta < 0.0) throw std::invalid_argument("gamma_scale_caricature: needs β0 > 0, θ >= 0");
    std::vector<std::string> names;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        if (!(sizes[j] > 0.0)) throw std::invalid_argument("gamma_scale_caricature: sizes must be positive");
        names.push_back("c" + std::to_string(j));
    }
    DiscreteMeasure rho(GroundSpace::discrete(names), weights);
    std::vector<double> base(sizes.size());
    std::vector<double> dir(sizes.size());
    std::vector<double> env(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        const double c = sizes[j];
        base[j] = 1.0 + theta * std::pow(c, alpha) * std::exp(-beta0 * c);
        dir[j] = -theta * std::pow(c, alpha + 1.0) * std::exp(-beta0 * c);
        env[j] = theta / (beta0 / 2.0) * std::pow(c, alpha) * std::exp(-beta0 * c / 2.0);
    }
    auto fam = PerturbationFamily::linear(rho, base, dir, beta0, beta0 / 2.0, 1.5 * beta0);
    fam.envelope = env;
    fam.remainder = [sizes, theta, alpha, beta0](double beta, std::int32_t atom) {
        const double c = sizes[static_cast<std::size_t>(atom)];
        return -theta * std::pow(c, alpha) * std::exp(-beta0 * c) * exp_tail_remainder(beta0 - beta, c);
    };
    return GammaScaleCaricature{std::move(fam), sizes};
}

}  // namespace perturb
