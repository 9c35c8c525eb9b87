#pragma once

// The variational series E_ν f = Σ_n (1/n!) ∫ E_λ D^n f d(ν − λ)^n with exact
// or Monte Carlo term evaluation, its parametric form, and Gâteaux/Fréchet
// derivative checks.

#include <string>
#include <vector>

#include "perturb/exact.hpp"
#include "perturb/family.hpp"
#include "perturb/measure.hpp"
#include "perturb/parallel.hpp"

namespace perturb {

struct SeriesResult {
    std::vector<double> terms;
    std::vector<double> partial_sums;
    std::vector<double> abs_terms;
    std::vector<double> term_se;  // zeros in exact mode
    int truncation_order = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    double value() const { return partial_sums.empty() ? 0.0 : partial_sums.back(); }
    /// Columns: order,term,partial_sum,abs_term (plus term_se in MC mode).
    std::string to_csv() const;
};

/// Appends one order and applies the stopping window (two consecutive terms
/// below eps, or below 2 standard errors + eps when `mc`).  Returns true once
/// the series is declared converged.
bool append_series_term(SeriesResult& r, double term, double abs_term, double se, double eps, bool mc);

/// Dominating reference used for the admissibility diagnostics.
enum class ReferenceChoice {
    sum,            // λ + ν
    lambda_plus_singular,  // λ + ν2, ν2 the part of ν singular to λ
    nu_plus_singular,      // ν + λ2, λ2 the part of λ singular to ν
    monotone,       // λ + μ for ν = λ + μ
};

struct SeriesOptions {
    int n_max = 30;
    EvalMode mode = EvalMode::exact;
    McPlan plan{};                    // plan.samples is the order-1 base size in MC mode
    std::uint64_t max_order_samples = std::uint64_t{1} << 22;
    EnumerationPlan enumeration{};
    double eps_abs = 1e-10;
    bool strict = false;
    ReferenceChoice reference = ReferenceChoice::sum;
};

/// Discrete regime.  In strict mode a failed square-integrability verdict
/// throws AdmissibilityError; otherwise it is recorded as a warning.
SeriesResult variational_series(const Functional& f, const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                                const SeriesOptions& opt = {});

/// Density measures on one reference window (Monte Carlo only).
SeriesResult variational_series(const Functional& f, const DensityMeasure& lambda, const DensityMeasure& nu,
                                const SeriesOptions& opt);

/// Terms (θ − θ0)^n/n! ∫ (E_{λ_{θ0}} D^n f) h^{⊗n} dρ^n of a linear family.
/// Throws std::domain_error for θ outside the interval.
SeriesResult parametric_series(const Functional& f, const PerturbationFamily& family, double theta,
                               const SeriesOptions& opt = {});

/// ∫ (E_λ D_x f) h(x) ρ(dx), h given as a density against ρ.
Estimate gateaux_derivative(const Functional& f, const DiscreteMeasure& lambda, const std::vector<double>& h,
                            const DiscreteMeasure& rho, EvalMode mode = EvalMode::exact, const McPlan& plan = {},
                            const EnumerationPlan& enumeration = {});

/// E f(Φ_λ + Φ_μ) by Monte Carlo: the mixed-sample value of the series for
/// ν = λ + μ.
Estimate mixed_sample_value(const Functional& f, const DiscreteMeasure& lambda, const DiscreteMeasure& mu,
                            const McPlan& plan);

/// õ(t) = √(e^{t²} − 1 − t²), accurate for small t.
double frechet_o_tilde(double t);

struct FrechetRow {
    double norm = 0.0;       // ‖h‖ in L²(λ)
    double remainder = 0.0;  // E_{λ_h} f − E_λ f − G(h)
    double bound = 0.0;
    double ratio = 0.0;      // |remainder| / ‖h‖
    bool within_bound = false;
};

struct FrechetReport {
    double second_factor = 0.0;  // √(Σ_{n≥2} (1/n!) ∫ (E_λ D^n f)² dλ^n)
    std::vector<FrechetRow> rows;
    bool all_within_bound = false;
    bool ratio_decreasing = false;
};

/// Each h is a density against λ (λ_h = (1 + h) λ); 1 + h < 0 on a charged
/// atom throws std::domain_error.
FrechetReport frechet_remainder_check(const Functional& f, const DiscreteMeasure& lambda,
                                      const std::vector<std::vector<double>>& h_list,
                                      const EnumerationPlan& enumeration = {});

/// Σ_{n≥2} (1/n!) ∫ (E_λ D^n f)² dλ^n by the identity with E f², (E f)² and
/// ∫ (E_λ D_x f)² λ(dx).
double higher_order_energy(const Functional& f, const DiscreteMeasure& lambda, const EnumerationPlan& enumeration = {});

}  // namespace perturb
