#pragma once

// Exact expectations under Poisson laws on finite discrete spaces by
// truncated enumeration of count vectors.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "perturb/configuration.hpp"
#include "perturb/measure.hpp"

namespace perturb {

struct EnumerationPlan {
    double tail = 1e-14;             // per-atom truncated tail mass (growth-weighted)
    std::size_t max_atoms = 6;       // atoms with positive mass
    std::uint64_t max_states = 50'000'000;
};

/// Poisson pmf p(0..cap) computed in log space.
std::vector<double> poisson_pmf(double mean, int cap);

/// Smallest K with Σ_{k>K} p(k) (1+k)^growth < tail.
int poisson_cap(double mean, double tail, double growth = 0.0);

/// Low-level engine: Σ_k eval(k) Π_i p_i(k_i) over 0 ≤ k_i ≤ caps[i], with
/// compensated accumulation in odometer order (last atom fastest).
double enumerate_expectation(const std::function<double(std::span<const int>)>& eval,
                             std::span<const double> means, std::span<const int> caps,
                             std::uint64_t max_states = 50'000'000);

/// Per-atom caps for f under m; zero-mass atoms get cap 0.  Throws
/// std::invalid_argument when f declares neither a bound nor a growth
/// degree, or when more than plan.max_atoms atoms carry mass.
std::vector<int> enumeration_caps(const Functional& f, const DiscreteMeasure& m, const EnumerationPlan& plan);

/// E_m f(Φ).
double exact_expectation(const Functional& f, const DiscreteMeasure& m, const EnumerationPlan& plan = {});

/// E_m D^n_{x_1..x_n} f(Φ) for atom points xs.
double exact_expected_difference(const Functional& f, const DiscreteMeasure& m, std::span<const Point> xs,
                                 const EnumerationPlan& plan = {});

/// Table of E_λ D^{m} f(Φ) for every multiplicity vector m ∈ [0, order]^k
/// over a chosen list of k direction atoms, where D^{m} applies m_i shifts
/// at direction atom i.  Built from the shifted expectations
/// F(j) = E_λ f(Φ + Σ j_i δ_{a_i}) by forward differences along each axis.
class DifferenceTable {
public:
    DifferenceTable(const Functional& f, const DiscreteMeasure& lambda, std::vector<std::int32_t> directions,
                    int order, const EnumerationPlan& plan = {}, std::uint64_t max_cells = 20'000'000);

    int order() const { return order_; }
    const std::vector<std::int32_t>& directions() const { return dirs_; }
    /// E_λ D^{m} f; m has one entry per direction with entries in [0, order].
    double at(std::span<const int> m) const;
    /// Shifted expectation F(j).
    double shifted(std::span<const int> j) const;

    /// Calls fn(m, value) for every m with |m| = n (lexicographic order).
    void for_each_of_order(int n, const std::function<void(std::span<const int>, double)>& fn) const;

private:
    std::size_t offset(std::span<const int> m) const;

    std::vector<std::int32_t> dirs_;
    int order_ = 0;
    std::vector<double> shifted_;  // F on [0, order]^k, row-major
    std::vector<double> diffs_;    // Δ^m F(0) on [0, order]^k
};

/// Σ_{|m| = n} Π_i (w_i^{m_i} / m_i!) · table(m): the order-n coefficient of
/// the multinomial expansion of ∫ (E D^n f) dw^n / n!.
double weighted_order_sum(const DifferenceTable& table, std::span<const double> w, int n, bool absolute = false);

struct FockResult {
    double lhs = 0.0;          // E[f g]
    double rhs_partial = 0.0;  // Σ_{n ≤ N} (1/n!) ∫ (E D^n f)(E D^n g) dm^n
    double gap = 0.0;
    std::vector<double> terms;
};

FockResult fock_identity_check(const Functional& f, const Functional& g, const DiscreteMeasure& m, int N,
                               const EnumerationPlan& plan = {});

}  // namespace perturb
