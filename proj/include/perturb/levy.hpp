#pragma once

// Lévy processes from characteristic triplets, path shifts, and the
// estimators built on them (derivatives, series, running supremum).

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "perturb/levy_measure.hpp"
#include "perturb/parallel.hpp"
#include "perturb/series.hpp"

namespace perturb {

/// Triplet (Σ, b, ν) with ν = ν* + nu_delta.  The drift b belongs to the
/// compensated form (small jumps |x| ≤ 1 compensated).
struct LevyModel {
    int dim = 1;
    std::vector<double> sigma;  // dim×dim row-major covariance; empty means 0
    Jump b{};
    JumpMeasure nu_star{1};
    JumpMeasure nu_delta{1};  // ν − ν*, may carry negative components
    double t0 = 1.0;
    double eps = 0.0;  // jumps with |x| <= eps are dropped
    int grid = 256;    // Wiener skeleton steps on [0, t0]

    JumpMeasure nu() const { return nu_star.plus(nu_delta); }
    /// dν/dν* at a jump size (ray densities, or atom masses on atoms).
    double g_nu(const Jump& x) const;
    bool has_diffusion() const;
    /// Throws std::invalid_argument on a malformed triplet.
    void validate() const;
};

/// Drift of the compensated form from the finite-variation drift a:
/// b = a + ∫_{|x|≤1} x ν(dx).
Jump drift_from_uncompensated(const Jump& a, const JumpMeasure& nu, int dim);

/// b + θΔ ∫_{|x|≤1} x g(x) ν*(dx) with the direction given as the signed
/// measure g·ν*.  Throws NumericalError if the integral is not finite.
Jump drift_adjust(const Jump& b, const JumpMeasure& direction, double theta_delta);

/// Mean and variance of coordinate k of X_{t0}: the exact triplet values
/// and those of the simulated (ε-truncated) process.
struct TripletMoments {
    double mean_exact = 0.0;
    double mean_simulated = 0.0;
    double var_exact = 0.0;
    double var_simulated = 0.0;
};
TripletMoments triplet_moments(const LevyModel& model, int k = 0);

struct PathJump {
    double t = 0.0;
    Jump x{};
};

/// Piecewise-linear skeleton (drift plus Wiener part on a grid) plus jumps.
class CadlagPath {
public:
    CadlagPath(int dim, double t0, std::vector<double> grid_t, std::vector<Jump> skeleton,
               std::vector<PathJump> jumps);

    int dim() const { return dim_; }
    double horizon() const { return t0_; }
    const std::vector<PathJump>& jumps() const { return jumps_; }
    const std::vector<double>& grid_times() const { return grid_t_; }

    Jump value(double t) const;
    Jump left_limit(double t) const;
    Jump terminal() const { return value(t0_); }
    /// sup_{0≤s≤t0} of coordinate k (exact for the piecewise-linear path).
    double supremum(int k = 0) const;
    /// S_t = sup_{s≤t} X_s and Z_t = sup_{t≤s≤t0} X_s of coordinate k.
    std::pair<double, double> past_future_sup(double t, int k = 0) const;

    /// w^{t,x}: inserts the jump x at time t.  t outside [0, t0] throws.
    CadlagPath shifted(double t, const Jump& x) const;

private:
    Jump skeleton_at(double t) const;
    // Values in time order: at every grid node and jump time the left
    // limit and the value.
    void event_values(int k, std::vector<double>& times, std::vector<double>& vals) const;

    int dim_;
    double t0_;
    std::vector<double> grid_t_;
    std::vector<Jump> skeleton_;
    std::vector<PathJump> jumps_;
};

CadlagPath path_shift(const CadlagPath& w, double t, const Jump& x);

/// Path simulator for one or more models sharing ν*, Σ, t0, ε and grid.  All
/// paths of one call share the Wiener skeleton and the candidate jumps of a
/// common dominating measure; each model keeps a candidate with probability
/// (its density)/(dominating density) using one shared uniform, which is the
/// thinning coupling used by the finite-difference oracles.
class PathSimulator {
public:
    explicit PathSimulator(std::vector<LevyModel> models);
    explicit PathSimulator(const LevyModel& model) : PathSimulator(std::vector<LevyModel>{model}) {}

    std::vector<CadlagPath> simulate_all(RngStream& rng) const;
    CadlagPath simulate(RngStream& rng) const { return simulate_all(rng).front(); }
    const Jump& effective_drift(std::size_t i) const { return drift_[i]; }

private:
    std::vector<LevyModel> models_;
    std::vector<JumpMeasure> nus_;
    JumpMeasure dominating_;
    JumpSampler sampler_;
    std::vector<Jump> drift_;
    std::vector<double> chol_;
    bool diffusion_ = false;
};

/// One path; builds a simulator per call (prefer PathSimulator in loops).
CadlagPath simulate_path(const LevyModel& model, RngStream& rng);

struct PathFunctional {
    std::string name;
    std::function<double(const CadlagPath&)> eval;
    double operator()(const CadlagPath& w) const;
};

namespace path_functionals {
PathFunctional terminal(int k = 0);
PathFunctional supremum();
/// 1 when the path has no nonzero jump on [0, t0].
PathFunctional no_jumps();
PathFunctional value_at(double s, int k = 0);
/// Ids: terminal, supremum, no_jumps.
PathFunctional by_id(const std::string& id);
}  // namespace path_functionals

/// Perturbation θ ↦ ν_θ of the jump measure around θ0.  For a linear
/// family ν_θ − ν* = nu_delta + (θ − θ0)·direction; otherwise delta_at
/// gives ν_θ − ν* and remainder/envelope describe the nonlinear part
/// (densities against ν*).
struct JumpPerturbation {
    JumpMeasure direction{1};  // g·ν*
    double theta0 = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::function<JumpMeasure(double)> delta_at;
    std::function<double(double, const Jump&)> remainder;
    std::function<double(const Jump&)> envelope;

    static JumpPerturbation linear(const LevyModel& model, JumpMeasure direction, double theta0, double lo,
                                   double hi);
    /// The gamma scale family ν_β = ν* + θ μ_β around β0 on (β0/2, 3β0/2).
    static JumpPerturbation gamma_scale(double theta, double beta0);
};

/// Model at θ: ν_θ from the perturbation and b_θ = b + ∫_{|x|≤1} x (ν_θ − ν_{θ0})(dx).
LevyModel perturbed_model(const LevyModel& model, const JumpPerturbation& p, double theta);

/// Square-integrability and small-jump conditions for a base model and a
/// direction g·ν*; "" when they hold, otherwise a description.
std::string check_direction(const LevyModel& model, const JumpMeasure& direction);
/// Sampled checks of a nonlinear perturbation on its interval: nonnegative
/// densities, |R_θ| ≤ R̄, and R_θ → 0 at θ0.
std::string check_perturbation(const LevyModel& model, const JumpPerturbation& p, int grid = 20);

/// E f(X) by direct simulation.
Estimate levy_expectation(const PathFunctional& f, const LevyModel& model, const McPlan& plan);

/// ∫∫ (E Δ_{t,x} f(X)) g(x) dt ν*(dx) over [0, t0]: (t, x) drawn from
/// dt ⊗ |g|ν* normalized with signs as weights, Δ by path shift on one
/// simulated path.  Throws AdmissibilityError when check_direction fails and
/// std::domain_error when |g|ν* has infinite mass.
Estimate levy_derivative(const PathFunctional& f, const LevyModel& model, const JumpMeasure& direction,
                         const McPlan& plan);

/// Derivative at θ0 of a (possibly nonlinear) perturbation after
/// check_perturbation; a violation throws AdmissibilityError.
Estimate levy_nonlinear_derivative(const PathFunctional& f, const LevyModel& model, const JumpPerturbation& p,
                                   const McPlan& plan);

/// Central difference (E_{θ0+δ} f − E_{θ0−δ} f)/2δ on coupled paths.
Estimate levy_coupled_fd(const PathFunctional& f, const LevyModel& model, const JumpPerturbation& p, double delta,
                         const McPlan& plan);

struct LevySeriesOptions {
    int n_max = 6;
    McPlan plan{};  // plan.samples is the order-1 base size
    std::uint64_t max_order_samples = std::uint64_t{1} << 20;
    double eps_abs = 1e-10;
};

/// Terms (1/n!) ∫ (E Δ^n f)(g_ν′ − g_ν)^{⊗n} d(dt ⊗ ν*)^n by Monte Carlo,
/// with the change ν′ − ν given as a signed measure.  Hypothesis failures
/// throw AdmissibilityError.
SeriesResult levy_series(const PathFunctional& f, const LevyModel& model, const JumpMeasure& change,
                         const LevySeriesOptions& opt = {});

/// Model with ν′ = ν + change and the matching compensated drift.
LevyModel changed_model(const LevyModel& model, const JumpMeasure& change);

/// Histogram of Q = ∫_0^{t0} P(Y_t ∈ ·) dt on fixed bins plus the mass
/// outside them.
struct QHistogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> mass;
    double below = 0.0;
    double above = 0.0;
    std::string to_csv() const;
};

struct SupremumOptions {
    int bins = 40;
    double y_lo = -4.0;
    double y_hi = 4.0;
};

struct SupremumResult {
    Estimate estimate;
    QHistogram q;
    double max_kernel_gap = 0.0;  // |re-evaluated Δ − ((x−Y)^+ − Y^−)|
    std::uint64_t bound_violations = 0;  // samples with |Δ| > 2|x|
    std::uint64_t kernel_checks = 0;
};

/// ∫∫ ((x−y)^+ − y^−) g(x) Q(dy) ν*(dx) for d = 1, with per-sample checks of
/// the kernel identity and of |Δ| ≤ 2|x|.  A divergent ∫_{x>1} x² ν*(dx)
/// throws AdmissibilityError.
SupremumResult supremum_derivative(const LevyModel& model, const JumpMeasure& direction, const McPlan& plan,
                                   const SupremumOptions& opt = {});

}  // namespace perturb
