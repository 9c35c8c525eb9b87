#include "perturb/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace perturb {

int sample_poisson_count(double mean, RngStream& rng) {
    if (!std::isfinite(mean) || mean < 0.0) throw std::domain_error("Poisson mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    std::poisson_distribution<int> dist(mean);
    return dist(rng);
}

namespace {

// Categorical draw over atoms by inverse CDF.
class AtomPicker {
public:
    AtomPicker(const DiscreteMeasure& m, const Region& window) {
        cdf_.reserve(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            const bool in = window.contains(Point::on_atom(static_cast<std::int32_t>(i)));
            total_ += in ? m.mass(i) : 0.0;
            cdf_.push_back(total_);
        }
    }
    double total() const { return total_; }
    std::int32_t pick(RngStream& rng) const {
        const double u = rng.uniform() * total_;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) {
            // u rounded up to the total: take the last atom with mass.
            it = std::lower_bound(cdf_.begin(), cdf_.end(), total_);
        }
        return static_cast<std::int32_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

}  // namespace

PointConfiguration sample_poisson(const DiscreteMeasure& m, const Region& window, RngStream& rng) {
    AtomPicker picker(m, window);
    PointConfiguration phi;
    const int n = sample_poisson_count(picker.total(), rng);
    for (int k = 0; k < n; ++k) phi.add(Point::on_atom(picker.pick(rng)));
    return phi;
}

std::vector<int> sample_counts(const DiscreteMeasure& m, RngStream& rng) {
    AtomPicker picker(m, Region::all());
    std::vector<int> counts(m.size(), 0);
    const int n = sample_poisson_count(picker.total(), rng);
    for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(picker.pick(rng))];
    return counts;
}

namespace {

// Poisson process with intensity `dens` · ρ on the reference window, by
// thinning a Poisson(bound · ρ(W)) reference sample.
template <class Density>
void thinned_points(const ReferenceMeasure& ref, double bound, const Density& dens, const Region& window,
                    RngStream& rng, PointConfiguration& out) {
    if (!(bound >= 0.0) || !std::isfinite(bound)) throw std::domain_error("density bound must be finite");
    if (!std::isfinite(ref.mass)) throw std::domain_error("reference has infinite mass on the window");
    const int n = sample_poisson_count(bound * ref.mass, rng);
    for (int k = 0; k < n; ++k) {
        const Point x = ref.sample(rng);
        const double h = dens(x);
        if (h > bound * (1.0 + 1e-12)) throw std::domain_error("density exceeds its declared bound");
        const double u = rng.uniform();
        if (u * bound < h && window.contains(x)) out.add(x);
    }
}

}  // namespace

PointConfiguration sample_poisson(const DensityMeasure& m, const Region& window, RngStream& rng) {
    PointConfiguration phi;
    thinned_points(*m.reference, m.bound, [&](const Point& x) { return m.at(x); }, window, rng, phi);
    return phi;
}

CoupledPair thin_superpose_couple(const DiscreteMeasure& lambda, const DiscreteMeasure& nu, const Region& window,
                                  RngStream& rng) {
    require_same_space(lambda, nu);
    CoupledPair out;
    out.phi_lambda = sample_poisson(lambda, window, rng);
    for (const auto& [x, k] : out.phi_lambda.entries()) {
        const double hl = lambda.mass(static_cast<std::size_t>(x.atom));
        const double hn = nu.mass(static_cast<std::size_t>(x.atom));
        // Densities against λ + ν are proportional to the masses, so the
        // retention probability on {h_λ > h_ν} is ν/λ.
        const double p = hl > hn ? hn / hl : 1.0;
        for (int j = 0; j < k; ++j) {
            if (p >= 1.0 || rng.uniform() < p) out.shared.add(x);
        }
    }
    std::vector<double> excess(nu.size(), 0.0);
    for (std::size_t i = 0; i < excess.size(); ++i) excess[i] = std::max(0.0, nu.mass(i) - lambda.mass(i));
    const auto added = sample_poisson(DiscreteMeasure(nu.space(), std::move(excess)), window, rng);
    out.phi_nu = out.shared;
    for (const auto& [x, k] : added.entries()) out.phi_nu.add(x, k);
    return out;
}

CoupledPair thin_superpose_couple(const DensityMeasure& lambda, const DensityMeasure& nu, const Region& window,
                                  RngStream& rng) {
    if (lambda.reference != nu.reference) throw std::invalid_argument("coupling needs a common reference");
    CoupledPair out;
    out.phi_lambda = sample_poisson(lambda, window, rng);
    for (const auto& [x, k] : out.phi_lambda.entries()) {
        const double hl = lambda.at(x);
        const double hn = nu.at(x);
        if (hl > hn && hl <= 0.0) throw std::domain_error("coupling: zero density on the thinning set");
        const double p = hl > hn ? hn / hl : 1.0;
        for (int j = 0; j < k; ++j) {
            if (p >= 1.0 || rng.uniform() < p) out.shared.add(x);
        }
    }
    out.phi_nu = out.shared;
    thinned_points(
        *lambda.reference, nu.bound, [&](const Point& x) { return std::max(0.0, nu.at(x) - lambda.at(x)); }, window,
        rng, out.phi_nu);
    return out;
}

double MeckeResult::z() const {
    const double s = combined_sigma(lhs, rhs);
    const double d = std::abs(lhs.mean - rhs.mean);
    return s > 0.0 ? d / s : (d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
}

namespace {

double lhs_sample(const MeckeIntegrand& f, const PointConfiguration& phi) {
    double s = 0.0;
    PointConfiguration rest = phi;
    for (const auto& [x, k] : phi.entries()) {
        rest.remove(x);
        s += k * f(x, rest);
        rest.add(x);
    }
    if (std::isnan(s)) throw NumericalError("Mecke integrand returned NaN");
    return s;
}

}  // namespace

MeckeResult mecke_check(const MeckeIntegrand& f, const DiscreteMeasure& m, const Region& window,
                        const McPlan& plan) {
    MeckeResult r;
    const auto base = tag_of("mecke");
    r.lhs = mc_mean(plan, base ^ 1u, [&](RngStream& rng) { return lhs_sample(f, sample_poisson(m, window, rng)); });
    r.rhs = mc_mean(plan, base ^ 2u, [&](RngStream& rng) {
        const auto phi = sample_poisson(m, window, rng);
        double s = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const Point x = Point::on_atom(static_cast<std::int32_t>(i));
            if (m.mass(i) > 0.0 && window.contains(x)) s += m.mass(i) * f(x, phi);
        }
        if (std::isnan(s)) throw NumericalError("Mecke integrand returned NaN");
        return s;
    });
    return r;
}

MeckeResult mecke_check(const MeckeIntegrand& f, const DensityMeasure& m, const Region& window, const McPlan& plan) {
    MeckeResult r;
    const auto base = tag_of("mecke-density");
    r.lhs = mc_mean(plan, base ^ 1u, [&](RngStream& rng) { return lhs_sample(f, sample_poisson(m, window, rng)); });
    const double mass = m.reference->mass;
    r.rhs = mc_mean(plan, base ^ 2u, [&](RngStream& rng) {
        const auto phi = sample_poisson(m, window, rng);
        const Point x = m.reference->sample(rng);
        if (!window.contains(x)) return 0.0;
        const double v = mass * m.at(x) * f(x, phi);
        if (std::isnan(v)) throw NumericalError("Mecke integrand returned NaN");
        return v;
    });
    return r;
}

}  // namespace perturb
