#pragma once

// Jump measures on R^d built from rays (radial densities along fixed unit
// directions) and atoms.  Components carry a sign so the same type holds
// Lévy measures, perturbation directions g·ν* and differences ν − ν*.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "perturb/rng.hpp"

namespace perturb {

using Jump = std::array<double, 4>;

double jump_norm(const Jump& x, int dim);

/// scale · r^power · e^{−rate r} on (lo, hi); hi may be +inf.
struct RadialLaw {
    double scale = 1.0;
    double power = 0.0;
    double rate = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    double density(double r) const;
    /// ∫_{(a,b] ∩ (lo,hi)} r^q · density(r) dr; +inf when divergent (decided
    /// from the exponents), closed forms for rate 0 and for q + power > −1,
    /// Boost quadrature otherwise.
    double integral(double q, double a, double b) const;
};

struct RayComponent {
    Jump direction{};  // unit vector
    RadialLaw law;
    int sign = 1;
};

struct AtomComponent {
    Jump x{};
    double mass = 0.0;
    int sign = 1;
};

class JumpMeasure {
public:
    explicit JumpMeasure(int dim = 1);

    /// ∫_S ∫_0^∞ 1{ru ∈ ·} r^{−α−1} dr Q(du) with Q given as weighted
    /// directions; α ∈ (0, 2).
    static JumpMeasure stable(double alpha, const std::vector<std::pair<Jump, double>>& q, int dim);
    /// 1{x ≠ 0} c |x|^{−α−1} dx on the line.
    static JumpMeasure symmetric_stable(double alpha, double c = 1.0);
    /// θ 1{x>0} x^{−1} e^{−βx} dx, the Lévy measure of a gamma process.
    static JumpMeasure gamma_tail(double theta, double beta);
    /// Finite jump law: atoms with masses.
    static JumpMeasure compound_poisson(const std::vector<std::pair<Jump, double>>& atoms, int dim);
    static JumpMeasure compound_poisson_1d(const std::vector<std::pair<double, double>>& atoms);
    /// Signed atoms on the line; a negative weight gives a negative component.
    static JumpMeasure signed_atoms_1d(const std::vector<std::pair<double, double>>& atoms);
    /// ∫_S ∫_0^1 1{ru ∈ ·} r^{−α′−1} dr Q′(du): the finite-range stable
    /// direction against a stable reference of index α.  Requires
    /// 0 < α′ < α/2 so that its density is square-integrable.
    static JumpMeasure stable_direction(double alpha, double alpha_prime,
                                        const std::vector<std::pair<Jump, double>>& q, int dim);
    /// Signed measure −θ 1{x>0} e^{−β0 x} dx: the scale direction of the
    /// gamma family written as g·ν*.
    static JumpMeasure gamma_scale_direction(double theta, double beta0);

    int dim() const { return dim_; }
    const std::vector<RayComponent>& rays() const { return rays_; }
    const std::vector<AtomComponent>& atoms() const { return atoms_; }
    bool empty() const { return rays_.empty() && atoms_.empty(); }
    bool is_positive() const;

    void add_ray(Jump direction, RadialLaw law, int sign = 1);
    void add_atom(Jump x, double mass, int sign = 1);

    JumpMeasure plus(const JumpMeasure& other) const;
    /// Multiplies by c; c < 0 flips component signs.
    JumpMeasure scaled(double c) const;
    /// The components with sign +1 (resp. −1, returned with sign +1).
    JumpMeasure positive_part() const;
    JumpMeasure negative_part() const;

    /// ∫_{a<|x|≤b} |x|^q d|μ| where |μ| sums component magnitudes.
    double abs_integral(double q, double a, double b) const;
    /// ∫_{a<|x|≤b} x μ(dx) (signed).
    Jump first_moment(double a, double b) const;
    /// ∫_{a<|x|≤b} x_k² μ(dx) (signed).
    double second_moment(int k, double a, double b) const;

    /// Signed density along the ray through x (sum of ray components with
    /// direction x/|x| and radius in range) and signed atom mass at x.
    double ray_density(const Jump& x) const;
    double atom_mass(const Jump& x) const;

    /// ν({0}) = 0 and ∫(|x|² ∧ 1) dν < ∞, from the exponents.
    bool levy_integrable() const;
    /// ∫(|x| ∧ 1) d|μ| < ∞.
    bool finite_variation() const;
    /// ∫_{x_1>1} x_1² dμ < ∞ (positive upper tail of the first coordinate).
    bool upper_second_moment_finite() const;

    std::string describe() const;

private:
    int dim_;
    std::vector<RayComponent> rays_;
    std::vector<AtomComponent> atoms_;
};

/// ∫ (dμ/dκ)² dκ for a signed μ and positive κ: +inf when μ is not
/// absolutely continuous with respect to κ or the integral diverges (decided
/// from the exponents); quadrature otherwise.
double density_ratio_energy(const JumpMeasure& mu, const JumpMeasure& kappa);

/// Samples |μ| restricted to {|x| > eps}, normalized.  Piece masses are
/// computed once at construction.
class JumpSampler {
public:
    JumpSampler(const JumpMeasure& mu, double eps);

    struct Draw {
        Jump x{};
        int sign = 1;
        bool atom = false;
    };

    double mass() const { return total_; }
    Draw operator()(RngStream& rng) const;

private:
    struct Piece {
        bool atom = false;
        Jump direction{};
        RadialLaw law;
        double a = 0.0;
        double b = 0.0;
        int sign = 1;
    };
    int dim_;
    std::vector<Piece> pieces_;
    std::vector<double> cdf_;
    double total_ = 0.0;

    double sample_radius(const Piece& p, RngStream& rng) const;
};

}  // namespace perturb
