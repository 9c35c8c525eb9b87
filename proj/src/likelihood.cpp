#include "perturb/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perturb/functionals.hpp"
#include "perturb/sampler.hpp"

namespace perturb {
namespace {

struct LogSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace

LikelihoodRatio::LikelihoodRatio(DiscreteMeasure nu, DiscreteMeasure rho) : nu_(std::move(nu)), rho_(std::move(rho)) {
    require_same_space(nu_, rho_);
    h_ = discrete_density(nu_, rho_);
    LogSum pre;
    LogSum gap;
    for (std::size_t i = 0; i < h_.size(); ++i) {
        if (std::isinf(h_[i]))
            throw AdmissibilityError("likelihood ratio: ν charges an atom where ρ vanishes; ∫(h−1)² dρ is infinite");
        if (rho_.mass(i) == 0.0) continue;  // ρ-null atoms never carry points under Π_ρ
        if (h_[i] != 1.0) {
            support_.push_back(static_cast<std::int32_t>(i));
            pre.add(rho_.mass(i) - nu_.mass(i));
            const double d = h_[i] - 1.0;
            gap.add(d * d * rho_.mass(i));
        }
    }
    log_prefactor_ = pre.value();
    hsquare_ = gap.value();
}

double LikelihoodRatio::operator()(const PointConfiguration& phi) const {
    LogSum ls;
    ls.add(log_prefactor_);
    for (const auto& [x, k] : phi.entries()) {
        if (!x.is_atom() || static_cast<std::size_t>(x.atom) >= h_.size()) continue;
        const double h = h_[static_cast<std::size_t>(x.atom)];
        if (h == 1.0) continue;
        if (h == 0.0) return 0.0;
        ls.add(k * std::log(h));
    }
    return std::exp(ls.value());
}

double likelihood_eval(const LikelihoodRatio& L, const PointConfiguration& phi) { return L(phi); }

WindowLikelihoodRatio::WindowLikelihoodRatio(DensityMeasure nu) : nu_(std::move(nu)) {
    if (!nu_.known_mass) throw std::invalid_argument("window likelihood needs the total mass ν(W)");
    log_prefactor_ = nu_.reference->mass - *nu_.known_mass;
}

double WindowLikelihoodRatio::operator()(const PointConfiguration& phi) const {
    LogSum ls;
    ls.add(log_prefactor_);
    for (const auto& [x, k] : phi.entries()) {
        if (!nu_.reference->window.contains(x)) continue;
        const double h = nu_.at(x);
        if (h == 0.0) return 0.0;
        ls.add(k * std::log(h));
    }
    return std::exp(ls.value());
}

Estimate reweighted_expectation(const Functional& g, const DiscreteMeasure& nu, const DiscreteMeasure& rho,
                                EvalMode mode, const McPlan& plan, const EnumerationPlan& enumeration) {
    const LikelihoodRatio L(nu, rho);
    if (!std::isfinite(L.hsquare())) throw AdmissibilityError("reweighting: ∫(h−1)² dρ is infinite");
    if (mode == EvalMode::exact) {
        // Under ρ weighted by L the integrand's tail is the ν tail, so the caps
        // cover both laws.
        const auto caps_nu = enumeration_caps(g, nu, enumeration);
        const auto caps_rho = enumeration_caps(g, rho, enumeration);
        std::vector<int> caps(caps_nu.size());
        for (std::size_t i = 0; i < caps.size(); ++i) caps[i] = rho.mass(i) > 0.0 ? std::max(caps_nu[i], caps_rho[i]) : 0;
        Estimate e;
        e.mean = enumerate_expectation(
            [&](std::span<const int> k) {
                const auto phi = PointConfiguration::from_counts(k);
                const double l = L(phi);
                return l == 0.0 ? 0.0 : l * g(phi);
            },
            rho.masses(), caps, enumeration.max_states);
        return e;
    }
    auto sample = [&](RngStream& rng) {
        const auto phi = sample_poisson(rho, rng);
        const double l = L(phi);
        return l == 0.0 ? 0.0 : l * g(phi);
    };
    return mc_mean(plan, tag_of("reweighted"), sample);
}

Estimate reweighted_expectation(const Functional& g, const DensityMeasure& nu, const McPlan& plan) {
    const WindowLikelihoodRatio L(nu);
    const auto& ref = *nu.reference;
    return mc_mean(plan, tag_of("reweighted-window"), [&](RngStream& rng) {
        PointConfiguration phi;
        const int n = sample_poisson_count(ref.mass, rng);
        for (int k = 0; k < n; ++k) phi.add(ref.sample(rng));
        const double l = L(phi);
        return l == 0.0 ? 0.0 : l * g(phi);
    });
}

double second_moment_bound(const DiscreteMeasure& nu, const DiscreteMeasure& rho) {
    return std::exp(LikelihoodRatio(nu, rho).hsquare());
}

double exact_first_moment(const DiscreteMeasure& nu, const DiscreteMeasure& rho, const EnumerationPlan& plan) {
    return reweighted_expectation(functionals::constant(1.0), nu, rho, EvalMode::exact, {}, plan).mean;
}

double exact_second_moment(const DiscreteMeasure& nu, const DiscreteMeasure& rho, const EnumerationPlan& plan) {
    const LikelihoodRatio L(nu, rho);
    // ρ-pmf times h^{2k} is proportional to the Poisson(ν²/ρ) pmf.
    std::vector<int> caps(rho.size(), 0);
    for (std::size_t i = 0; i < caps.size(); ++i) {
        if (rho.mass(i) == 0.0) continue;
        const double tilt = nu.mass(i) * nu.mass(i) / rho.mass(i);
        caps[i] = poisson_cap(std::max({rho.mass(i), nu.mass(i), tilt}), plan.tail);
    }
    return enumerate_expectation(
        [&](std::span<const int> k) {
            const double l = L(PointConfiguration::from_counts(k));
            return l * l;
        },
        rho.masses(), caps, plan.max_states);
}

}  // namespace perturb
