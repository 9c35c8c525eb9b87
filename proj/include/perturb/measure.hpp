#pragma once

// Intensity measures, signed perturbations between two of them, and the
// admissibility diagnostics (square-integrability gaps, Hellinger distance).

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perturb/parallel.hpp"
#include "perturb/space.hpp"

namespace perturb {

/// A hypothesis of an estimator (square-integrability, Hellinger-type
/// finiteness) fails; strict callers map it to a dedicated exit code.
class AdmissibilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

using AtomMasses = std::vector<std::pair<std::string, double>>;

/// Finite list of atom masses on a discrete ground space.
class DiscreteMeasure {
public:
    /// Throws std::invalid_argument on negative, non-finite or mis-sized masses.
    DiscreteMeasure(SpacePtr space, std::vector<double> masses);

    static DiscreteMeasure zero(SpacePtr space);
    /// Unknown names throw std::out_of_range; repeated names accumulate.
    static DiscreteMeasure from_pairs(SpacePtr space, const AtomMasses& pairs);
    /// Builds several measures on the union of their atom names (in order of
    /// first appearance).
    static std::vector<DiscreteMeasure> on_common_space(const std::vector<AtomMasses>& specs);

    /// Parses one `atom-id mass` pair per line; '#' starts a comment.
    static AtomMasses parse_pairs(const std::string& text);
    std::string to_text() const;

    const SpacePtr& space() const { return space_; }
    std::size_t size() const { return masses_.size(); }
    double mass(std::size_t i) const { return masses_[i]; }
    double mass(const std::string& atom) const { return masses_[space_->atom_index(atom)]; }
    const std::vector<double>& masses() const { return masses_; }
    double total() const;
    double total(const Region& window) const;

    DiscreteMeasure plus(const DiscreteMeasure& o) const;
    DiscreteMeasure scaled(double c) const;
    /// this − o; throws std::domain_error if any atom would go negative.
    DiscreteMeasure minus(const DiscreteMeasure& o) const;
    DiscreteMeasure restricted(const Region& window) const;

    bool same_space(const DiscreteMeasure& o) const;
    bool operator==(const DiscreteMeasure& o) const;

private:
    SpacePtr space_;
    std::vector<double> masses_;
};

/// Throws std::invalid_argument if the two measures live on different spaces.
void require_same_space(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Densities on the atoms with the 0/0 = 0 convention: d(num)/d(den).
std::vector<double> discrete_density(const DiscreteMeasure& num, const DiscreteMeasure& den);

/// A finite-on-the-window reference measure with an exact sampler of its
/// normalization.
struct ReferenceMeasure {
    SpacePtr space;
    Region window;
    double mass = 0.0;
    std::function<Point(RngStream&)> sample;

    /// Lebesgue measure on a box space, scaled by `scale`.
    static std::shared_ptr<const ReferenceMeasure> lebesgue(SpacePtr box_space, double scale = 1.0);
    /// A discrete measure used as reference.
    static std::shared_ptr<const ReferenceMeasure> discrete(const DiscreteMeasure& m);
};

using ReferencePtr = std::shared_ptr<const ReferenceMeasure>;

/// Measure given by a density against a reference.  `bound` must dominate
/// the density on the window; it drives thinning samplers.
struct DensityMeasure {
    ReferencePtr reference;
    std::function<double(const Point&)> density;
    double bound = 1.0;
    // Total mass on the reference window when known in closed form.
    std::optional<double> known_mass;

    /// Evaluates the density and rejects NaN, infinite or negative values
    /// with std::domain_error.
    double at(const Point& x) const;
    /// Total mass estimated by Monte Carlo against the reference.
    Estimate total_mass(const McPlan& plan) const;
};

/// ν − λ expressed by the two densities against a common reference.
struct SignedPerturbation {
    DiscreteMeasure rho;
    std::vector<double> h_low;
    std::vector<double> h_high;

    /// ρ = λ + ν.
    static SignedPerturbation between(const DiscreteMeasure& lambda, const DiscreteMeasure& nu);
    /// Arbitrary dominating ρ; throws std::invalid_argument if λ or ν is not
    /// absolutely continuous with respect to ρ.
    static SignedPerturbation against(const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                                      const DiscreteMeasure& rho);

    /// (h_high − h_low)(x) ρ({x}) per atom, i.e. the masses of ν − λ.
    std::vector<double> signed_masses() const;
};

/// ∫ g (h_ν − h_λ)^{⊗n} dρ^n by exact enumeration of all atom tuples.  g
/// receives the tuple of atom indices.  n = 0 and tuples beyond 5e7 terms
/// throw std::invalid_argument.
double signed_power_integral(const std::function<double(std::span<const std::int32_t>)>& g,
                             const SignedPerturbation& p, int n);

/// Monte Carlo version for density measures sharing one reference: draws n
/// reference points per sample and weights by ρ(W)^n Π (h_ν − h_λ).
Estimate signed_power_integral_mc(const std::function<double(std::span<const Point>)>& g,
                                  const DensityMeasure& lambda, const DensityMeasure& nu, int n,
                                  const McPlan& plan);

/// H(λ, ν) = ½ ∫ (√h_λ − √h_ν)² dρ with ρ = λ + ν.
double hellinger_measures(const DiscreteMeasure& lambda, const DiscreteMeasure& nu);
/// Same with a caller-chosen dominating reference.
double hellinger_measures(const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                          const DiscreteMeasure& rho);
/// Monte Carlo estimate for density measures on a common reference.
Estimate hellinger_measures(const DensityMeasure& lambda, const DensityMeasure& nu, const McPlan& plan);

/// Decomposition form: ½[∫(1 − √(dν1/dλ))² dλ + ν2(X)], equal to
/// hellinger_measures.
double hellinger_by_decomposition(const DiscreteMeasure& lambda, const DiscreteMeasure& nu);

/// Hellinger distance of the two Poisson laws, 1 − exp(−H(λ, ν)).
double hellinger_poisson(const DiscreteMeasure& lambda, const DiscreteMeasure& nu);
double hellinger_poisson_from(double h_measures);

struct LebesgueParts {
    DiscreteMeasure absolutely_continuous;  // supported where λ > 0
    DiscreteMeasure singular;               // supported where λ = 0
};

LebesgueParts lebesgue_decompose(const DiscreteMeasure& nu, const DiscreteMeasure& lambda);

struct AdmissibilityReport {
    double l2_gap_low = 0.0;   // ∫(1 − h_λ)² dρ
    double l2_gap_high = 0.0;  // ∫(1 − h_ν)² dρ
    double hellinger = 0.0;    // H(λ, ν)
    double hellinger_poisson = 0.0;
    // Necessary condition: Hellinger-type sum over both Lebesgue decompositions.
    double necessary_sum = 0.0;
    bool l2_gap_low_capped = false;
    bool l2_gap_high_capped = false;
    bool hellinger_capped = false;
    bool verdict_l2 = false;         // both L² gaps finite below the cap
    bool verdict_necessary = false;  // necessary_sum finite below the cap

    // Monotone cases.  For ν ≥ λ with μ = ν − λ and h = dλ/d(λ+μ):
    bool increasing = false;
    double monotone_square_gap = 0.0;   // ∫(1 − h)² d(λ+μ)
    double monotone_linear_gap = 0.0;   // ∫(1 − h) dμ
    // For ν ≤ λ with μ = λ − ν: ∫ (dμ/dλ)² dλ.
    bool decreasing = false;
    double thinning_square = 0.0;
    bool verdict_monotone = false;

    double cap = 1e12;
};

/// Admissibility report.  Values above `cap` are clamped to the cap and
/// flagged.  ρ must dominate both λ and ν.
AdmissibilityReport admissibility_check(const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                                        const DiscreteMeasure& rho, double cap = 1e12);
AdmissibilityReport admissibility_check(const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                                        double cap = 1e12);

}  // namespace perturb
