#pragma once

// Poisson process samplers, the thinning/superposition coupling of two
// intensity measures, and a Monte Carlo harness for the Mecke equation.

#include <functional>
#include <vector>

#include "perturb/configuration.hpp"
#include "perturb/measure.hpp"
#include "perturb/parallel.hpp"
#include "perturb/rng.hpp"

namespace perturb {

/// Poisson(mean) variate; mean must be finite and >= 0.
int sample_poisson_count(double mean, RngStream& rng);

/// Mixed-sample draw: N ~ Poisson(m(window)), then N i.i.d. points from the
/// normalized restriction.
PointConfiguration sample_poisson(const DiscreteMeasure& m, const Region& window, RngStream& rng);
inline PointConfiguration sample_poisson(const DiscreteMeasure& m, RngStream& rng) {
    return sample_poisson(m, Region::all(), rng);
}
/// Density measures: Poisson(bound · ρ(W)) reference points thinned with
/// probability density/bound, then restricted to `window`.  Throws
/// std::domain_error when the density exceeds its declared bound.
PointConfiguration sample_poisson(const DensityMeasure& m, const Region& window, RngStream& rng);
/// Per-atom counts of a mixed-sample draw (same law, no configuration built).
std::vector<int> sample_counts(const DiscreteMeasure& m, RngStream& rng);

struct CoupledPair {
    PointConfiguration phi_lambda;
    PointConfiguration phi_nu;
    PointConfiguration shared;
};

/// Φ_λ thinned where h_λ > h_ν (retention h_ν/h_λ), plus an independent
/// Poisson process with intensity (h_ν − h_λ)^+ dρ.  Both marginals are exact.
CoupledPair thin_superpose_couple(const DiscreteMeasure& lambda, const DiscreteMeasure& nu, const Region& window,
                                  RngStream& rng);
CoupledPair thin_superpose_couple(const DensityMeasure& lambda, const DensityMeasure& nu, const Region& window,
                                  RngStream& rng);

struct MeckeResult {
    Estimate lhs;  // E ∫ f(x, Φ − δ_x) Φ(dx)
    Estimate rhs;  // ∫ E f(x, Φ) m(dx)
    double z() const;
};

using MeckeIntegrand = std::function<double(const Point&, const PointConfiguration&)>;

/// The two sides use independent streams so their errors combine in
/// quadrature.
MeckeResult mecke_check(const MeckeIntegrand& f, const DiscreteMeasure& m, const Region& window,
                        const McPlan& plan);
MeckeResult mecke_check(const MeckeIntegrand& f, const DensityMeasure& m, const Region& window, const McPlan& plan);

}  // namespace perturb
