#pragma once

// Derivatives of θ ↦ E_{λ_θ} f(Φ): the integral (difference-operator) form
// for linear, nonlinear and scaled families, the pivotal-count form for
// increasing events, and finite-difference oracles.

#include <functional>
#include <optional>
#include <vector>

#include "perturb/exact.hpp"
#include "perturb/family.hpp"
#include "perturb/parallel.hpp"
#include "perturb/series.hpp"

namespace perturb {

/// ∫ (E_{λ_θ} D_x f) h(x) ρ(dx) for a linear family.
Estimate linear_derivative(const Functional& f, const PerturbationFamily& family, double theta,
                           EvalMode mode = EvalMode::exact, const McPlan& plan = {},
                           const EnumerationPlan& enumeration = {});

/// Derivative at θ0 of a possibly nonlinear family.  The family's sampled
/// hypothesis checks run first; a violation throws AdmissibilityError.
Estimate nonlinear_derivative(const Functional& f, const PerturbationFamily& family, EvalMode mode = EvalMode::exact,
                              const McPlan& plan = {}, const EnumerationPlan& enumeration = {});

/// d/dθ E_{θλ} f = ∫ (E_{θλ} D_x f) λ(dx), θ ≥ 0.
Estimate scaled_derivative(const Functional& f, const DiscreteMeasure& lambda, double theta,
                           EvalMode mode = EvalMode::exact, const McPlan& plan = {},
                           const EnumerationPlan& enumeration = {});

/// Taylor coefficients of θ ↦ E_{θλ} f around θ0 evaluated at θ (the
/// parametric series of the scaled family).
SeriesResult scaled_taylor_report(const Functional& f, const DiscreteMeasure& lambda, double theta0, double theta,
                                  const SeriesOptions& opt = {});

/// θ^{-1} E_{θλ} ∫ (f(Φ) − f(Φ − δ_x)) Φ(dx), i.e. the expected number of
/// pivotal points over θ.  f must be declared increasing; a negative
/// pivotal term throws std::domain_error..
Estimate pivotal_derivative(const Functional& f, const DiscreteMeasure& lambda, double theta, const McPlan& plan);

/// E_λ ∫ (f(Φ) − f(Φ − δ_x)) h(x) Φ(dx) for a family with density
/// 1 + (θ − θ0)(h + R_θ) against λ (weighted pivotal count).
Estimate weighted_pivotal_derivative(const Functional& f, const DiscreteMeasure& lambda, const std::vector<double>& h,
                                     const McPlan& plan);

/// Adds one random atom to sampled configurations and reports whether f
/// never decreased.
bool spot_check_increasing(const Functional& f, const DiscreteMeasure& lambda, int samples, std::uint64_t seed);

/// Central difference (F(θ+δ) − F(θ−δ)) / 2δ.
double central_difference(const std::function<double(double)>& F, double theta, double delta);
/// Richardson extrapolation of central differences at δ and δ/2.
double richardson_derivative(const std::function<double(double)>& F, double theta, double delta);

/// Finite-difference oracle with common random numbers: couples Π_{λ_{θ−δ}}
/// and Π_{λ_{θ+δ}} by thinning/superposition and averages the coupled
/// differences over 2δ.
Estimate coupled_fd_derivative(const Functional& f, const PerturbationFamily& family, double theta, double delta,
                               const McPlan& plan);

/// Σ_{n≥2} u^{n−1} x^n / n! = (e^{ux} − 1 − ux)/u, by its series when |ux|
/// is small.
double exp_tail_remainder(double u, double x);

/// Discrete analogue of the gamma scale family: atoms at sizes c_j with
/// reference masses w_j, base density 1 + θ c^α e^{−β0 c}, direction
/// −θ c^{α+1} e^{−β0 c}, remainder
/// −θ c^α e^{−β0 c} [e^{(β0−β)c} − 1 − (β0−β)c] / (β0 − β) and envelope
/// θ (β0/2)^{-1} c^α e^{−β0 c / 2}, on the interval (β0/2, 3β0/2).
struct GammaScaleCaricature {
    PerturbationFamily family;
    std::vector<double> sizes;
};
GammaScaleCaricature gamma_scale_caricature(const std::vector<double>& sizes, const std::vector<double>& weights,
                                            double theta, double alpha, double beta0);

}  // namespace perturb
