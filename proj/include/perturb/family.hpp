#pragma once

// One-parameter perturbation families θ ↦ λ_θ on a discrete space, with
// densities h_λ + (θ − θ0)(h + R_θ) against a reference ρ.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "perturb/measure.hpp"

namespace perturb {

struct PerturbationFamily {
    DiscreteMeasure rho;
    std::vector<double> h_base;     // h_λ
    std::vector<double> direction;  // h
    // R_θ(atom); empty means the linear family (R ≡ 0).
    std::function<double(double, std::int32_t)> remainder;
    // Dominating envelope R̄(atom) with |R_θ| ≤ R̄ on the interval.
    std::vector<double> envelope;
    double theta0 = 0.0;
    double lo = 0.0;
    double hi = 1.0;

    /// Linear family with R ≡ 0 on [lo, hi].
    static PerturbationFamily linear(DiscreteMeasure rho, std::vector<double> h_base, std::vector<double> direction,
                                     double theta0, double lo, double hi);
    /// θ ↦ θλ around θ0 on [0, hi] (ρ = λ, h_λ = θ0, h = 1).
    static PerturbationFamily scaled(const DiscreteMeasure& lambda, double theta0, double hi = 1e6);

    bool is_linear() const { return !remainder; }
    bool contains(double theta) const { return theta >= lo && theta <= hi; }
    double remainder_at(double theta, std::int32_t atom) const;
    /// Density h_λ + (θ − θ0)(h + R_θ) on one atom.
    double density_at(double theta, std::int32_t atom) const;
    /// λ_θ; throws std::domain_error outside the interval or when a mass
    /// turns negative.
    DiscreteMeasure measure_at(double theta) const;
    /// Masses of h ρ (the direction as a signed measure).
    std::vector<double> direction_masses() const;

    /// Sampled hypothesis checks on a grid of `grid` points in the interval:
    /// nonnegative densities, |R_θ| ≤ R̄, ∫R̄² dρ < ∞, and R_θ → 0 as θ → θ0.
    /// Returns an empty string when all pass, otherwise a description.
    std::string check(int grid = 64) const;
};

}  // namespace perturb
