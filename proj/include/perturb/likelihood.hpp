#pragma once

// Likelihood ratios between Poisson laws and reweighted (importance-sampled)
// expectations.

#include <cstdint>
#include <vector>

#include "perturb/configuration.hpp"
#include "perturb/exact.hpp"
#include "perturb/measure.hpp"
#include "perturb/parallel.hpp"

namespace perturb {

/// dΠ_ν/dΠ_ρ in the discrete regime, where the support set is exactly
/// C = {h ≠ 1} with h = dν/dρ.
class LikelihoodRatio {
public:
    /// Throws AdmissibilityError unless ν ≪ ρ (otherwise ∫(h−1)² dρ = ∞).
    LikelihoodRatio(DiscreteMeasure nu, DiscreteMeasure rho);

    const DiscreteMeasure& nu() const { return nu_; }
    const DiscreteMeasure& rho() const { return rho_; }
    const std::vector<double>& density() const { return h_; }
    const std::vector<std::int32_t>& support() const { return support_; }
    /// ρ(C) − ν(C).
    double log_prefactor() const { return log_prefactor_; }
    /// ∫ (h − 1)² dρ.
    double hsquare() const { return hsquare_; }

    /// L(φ) = exp[ρ(C) − ν(C)] Π_{y ∈ φ_C} h(y); any point with h = 0 gives 0.
    double operator()(const PointConfiguration& phi) const;

private:
    DiscreteMeasure nu_;
    DiscreteMeasure rho_;
    std::vector<double> h_;
    std::vector<std::int32_t> support_;
    double log_prefactor_ = 0.0;
    double hsquare_ = 0.0;
};

/// The same on a finite-mass window of a density measure: C is the whole
/// window, h = dν/dρ, and ν(W) must be known.
class WindowLikelihoodRatio {
public:
    WindowLikelihoodRatio(DensityMeasure nu);
    double operator()(const PointConfiguration& phi) const;
    double log_prefactor() const { return log_prefactor_; }

private:
    DensityMeasure nu_;
    double log_prefactor_ = 0.0;
};

double likelihood_eval(const LikelihoodRatio& L, const PointConfiguration& phi);

/// E_ρ[L_{ν,ρ}(Φ) g(Φ)] (= E_ν g(Φ)).  Exact mode enumerates count vectors;
/// MC mode samples Π_ρ.  An infinite ∫(h−1)² dρ throws AdmissibilityError.
Estimate reweighted_expectation(const Functional& g, const DiscreteMeasure& nu, const DiscreteMeasure& rho,
                                EvalMode mode, const McPlan& plan = {}, const EnumerationPlan& enumeration = {});
/// Continuum version on the reference window (MC only).
Estimate reweighted_expectation(const Functional& g, const DensityMeasure& nu, const McPlan& plan);

/// exp[∫(h − 1)² dρ], the upper bound for E_ρ L².
double second_moment_bound(const DiscreteMeasure& nu, const DiscreteMeasure& rho);

/// E_ρ L² by exact enumeration.
double exact_second_moment(const DiscreteMeasure& nu, const DiscreteMeasure& rho, const EnumerationPlan& plan = {});
/// E_ρ L by exact enumeration (equals 1).
double exact_first_moment(const DiscreteMeasure& nu, const DiscreteMeasure& rho, const EnumerationPlan& plan = {});

}  // namespace perturb
