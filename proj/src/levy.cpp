#include "perturb/levy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "perturb/configuration.hpp"
#include "perturb/derivatives.hpp"
#include "perturb/kernels.hpp"
#include "perturb/measure.hpp"

namespace perturb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_jump(const Jump& x, int dim) {
    for (int k = 0; k < dim; ++k) {
        if (!std::isfinite(x[k])) return false;
    }
    return true;
}

// Lower Cholesky factor of a PSD matrix; zero pivots give zero columns.
std::vector<double> cholesky(const std::vector<double>& a, int n) {
    std::vector<double> l(static_cast<std::size_t>(n * n), 0.0);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[static_cast<std::size_t>(i * n + i)]));
    for (int j = 0; j < n; ++j) {
        double d = a[static_cast<std::size_t>(j * n + j)];
        for (int k = 0; k < j; ++k) d -= l[static_cast<std::size_t>(j * n + k)] * l[static_cast<std::size_t>(j * n + k)];
        if (d < -1e-12 * std::max(scale, 1.0)) throw std::invalid_argument("Σ is not positive semidefinite");
        const double piv = d > 1e-300 ? std::sqrt(d) : 0.0;
        l[static_cast<std::size_t>(j * n + j)] = piv;
        for (int i = j + 1; i < n; ++i) {
            double s = a[static_cast<std::size_t>(i * n + j)];
            for (int k = 0; k < j; ++k)
                s -= l[static_cast<std::size_t>(i * n + k)] * l[static_cast<std::size_t>(j * n + k)];
            l[static_cast<std::size_t>(i * n + j)] = piv > 0.0 ? s / piv : 0.0;
        }
    }
    return l;
}

// Radii used by the sampled density checks.
std::vector<double> probe_radii(double lo, double hi) {
    std::vector<double> r;
    const double a = std::max(lo, 1e-4);
    const double b = std::min(hi, 1e2);
    if (!(b > a)) return r;
    constexpr int kPoints = 40;
    for (int i = 0; i <= kPoints; ++i) {
        const double v = a * std::pow(b / a, static_cast<double>(i) / kPoints);
        if (v > lo && v <= hi) r.push_back(v);
    }
    return r;
}

// Jump sizes at which densities against ν* are probed.
std::vector<Jump> probe_points(const JumpMeasure& nu_star, const JumpMeasure& extra) {
    std::vector<Jump> pts;
    auto add_rays = [&](const JumpMeasure& m) {
        for (const auto& c : m.rays()) {
            for (double r : probe_radii(c.law.lo, c.law.hi)) {
                Jump x{};
                for (int k = 0; k < m.dim(); ++k) x[k] = r * c.direction[k];
                pts.push_back(x);
            }
        }
        for (const auto& a : m.atoms()) pts.push_back(a.x);
    };
    add_rays(nu_star);
    add_rays(extra);
    return pts;
}

double density_against(const JumpMeasure& m, const JumpMeasure& ref, const Jump& x) {
    const double d = ref.ray_density(x);
    if (d > 0.0) return m.ray_density(x) / d;
    const double a = ref.atom_mass(x);
    if (a > 0.0) return m.atom_mass(x) / a;
    return 0.0;
}

}  // namespace

double LevyModel::g_nu(const Jump& x) const {
    const double den = nu_star.ray_density(x);
    if (den > 0.0) return (den + nu_delta.ray_density(x)) / den;
    const double am = nu_star.atom_mass(x);
    if (am > 0.0) return (am + nu_delta.atom_mass(x)) / am;
    const double extra = nu_delta.ray_density(x) + nu_delta.atom_mass(x);
    return extra == 0.0 ? 1.0 : kInf;
}

bool LevyModel::has_diffusion() const {
    return std::any_of(sigma.begin(), sigma.end(), [](double v) { return v != 0.0; });
}

void LevyModel::validate() const {
    if (dim < 1 || dim > 4) throw std::invalid_argument("Lévy model dimension must be 1..4");
    if (nu_star.dim() != dim || nu_delta.dim() != dim)
        throw std::invalid_argument("jump measures do not match the model dimension");
    if (!sigma.empty()) {
        if (sigma.size() != static_cast<std::size_t>(dim * dim)) throw std::invalid_argument("Σ must be d×d");
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (sigma[static_cast<std::size_t>(i * dim + j)] != sigma[static_cast<std::size_t>(j * dim + i)])
                    throw std::invalid_argument("Σ must be symmetric");
        (void)cholesky(sigma, dim);
    }
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw std::invalid_argument("horizon t0 must be positive");
    if (!(eps >= 0.0)) throw std::invalid_argument("small-jump threshold ε must be >= 0");
    if (grid < 1) throw std::invalid_argument("grid resolution must be >= 1");
    if (!finite_jump(b, dim)) throw std::invalid_argument("drift must be finite");
    if (!nu_star.levy_integrable()) throw std::invalid_argument("ν* is not a Lévy measure");
    const auto abs_nu = nu_star.plus(nu_delta.positive_part()).plus(nu_delta.negative_part());
    if (!std::isfinite(abs_nu.abs_integral(2.0, 0.0, 1.0) + abs_nu.abs_integral(0.0, 1.0, kInf)))
        throw std::invalid_argument("ν is not a Lévy measure");
    if (!nu_delta.is_positive()) {
        const auto nu_all = nu();
        for (const auto& x : probe_points(nu_star, nu_delta)) {
            if (nu_all.ray_density(x) < -1e-12 * std::abs(nu_star.ray_density(x)) ||
                nu_all.atom_mass(x) < -1e-12 * std::abs(nu_star.atom_mass(x)))
                throw std::invalid_argument("jump density dν/dν* is negative at a sampled size");
        }
    }
}

Jump drift_from_uncompensated(const Jump& a, const JumpMeasure& nu, int dim) {
    const Jump m = nu.first_moment(0.0, 1.0);
    if (!finite_jump(m, dim)) throw NumericalError("∫_{|x|≤1} x ν(dx) is not finite");
    Jump b = a;
    for (int k = 0; k < dim; ++k) b[k] += m[k];
    return b;
}

Jump drift_adjust(const Jump& b, const JumpMeasure& direction, double theta_delta) {
    if (theta_delta == 0.0 || direction.empty()) return b;
    const Jump m = direction.first_moment(0.0, 1.0);
    if (!finite_jump(m, direction.dim())) throw NumericalError("∫_{|x|≤1} x g dν* is not finite");
    Jump out = b;
    for (int k = 0; k < direction.dim(); ++k) out[k] += theta_delta * m[k];
    return out;
}

TripletMoments triplet_moments(const LevyModel& model, int k) {
    const auto nu = model.nu();
    const double s = model.sigma.empty() ? 0.0 : model.sigma[static_cast<std::size_t>(k * model.dim + k)];
    TripletMoments m;
    m.mean_exact = model.t0 * (model.b[k] + nu.first_moment(1.0, kInf)[k]);
    if (nu.finite_variation()) {
        const double a = model.b[k] - nu.first_moment(0.0, 1.0)[k];
        m.mean_simulated = model.t0 * (a + nu.first_moment(model.eps, kInf)[k]);
    } else {
        m.mean_simulated = m.mean_exact;
    }
    m.var_exact = model.t0 * (s + nu.second_moment(k, 0.0, kInf));
    m.var_simulated = model.t0 * (s + nu.second_moment(k, model.eps, kInf));
    return m;
}

CadlagPath::CadlagPath(int dim, double t0, std::vector<double> grid_t, std::vector<Jump> skeleton,
                       std::vector<PathJump> jumps)
    : dim_(dim), t0_(t0), grid_t_(std::move(grid_t)), skeleton_(std::move(skeleton)), jumps_(std::move(jumps)) {
    if (grid_t_.size() < 2 || grid_t_.size() != skeleton_.size() || grid_t_.front() != 0.0 || grid_t_.back() != t0_)
        throw std::invalid_argument("CadlagPath: skeleton grid must run from 0 to t0");
    std::stable_sort(jumps_.begin(), jumps_.end(), [](const PathJump& a, const PathJump& b) { return a.t < b.t; });
    for (const auto& j : jumps_) {
        if (!(j.t >= 0.0 && j.t <= t0_)) throw std::out_of_range("CadlagPath: jump time outside [0, t0]");
    }
}

Jump CadlagPath::skeleton_at(double t) const {
    auto it = std::upper_bound(grid_t_.begin(), grid_t_.end(), t);
    std::size_t i = it == grid_t_.begin() ? 0 : static_cast<std::size_t>(it - grid_t_.begin()) - 1;
    if (i + 1 >= grid_t_.size()) return skeleton_.back();
    const double w = (t - grid_t_[i]) / (grid_t_[i + 1] - grid_t_[i]);
    Jump v{};
    for (int k = 0; k < dim_; ++k) v[k] = skeleton_[i][k] + w * (skeleton_[i + 1][k] - skeleton_[i][k]);
    return v;
}

Jump CadlagPath::value(double t) const {
    Jump v = skeleton_at(t);
    for (const auto& j : jumps_) {
        if (j.t > t) break;
        for (int k = 0; k < dim_; ++k) v[k] += j.x[k];
    }
    return v;
}

Jump CadlagPath::left_limit(double t) const {
    Jump v = skeleton_at(t);
    for (const auto& j : jumps_) {
        if (j.t >= t) break;
        for (int k = 0; k < dim_; ++k) v[k] += j.x[k];
    }
    return v;
}

void CadlagPath::event_values(int k, std::vector<double>& times, std::vector<double>& vals) const {
    times.clear();
    vals.clear();
    times.reserve(grid_t_.size() + 2 * jumps_.size());
    vals.reserve(grid_t_.size() + 2 * jumps_.size());
    double acc = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < grid_t_.size() || j < jumps_.size()) {
        if (j < jumps_.size() && (i >= grid_t_.size() || jumps_[j].t < grid_t_[i])) {
            const double tau = jumps_[j].t;
            const double s = skeleton_at(tau)[k];
            times.push_back(tau);
            vals.push_back(s + acc);
            acc += jumps_[j].x[k];
            times.push_back(tau);
            vals.push_back(s + acc);
            ++j;
        } else {
            times.push_back(grid_t_[i]);
            vals.push_back(skeleton_[i][k] + acc);
            ++i;
        }
    }
}

double CadlagPath::supremum(int k) const {
    std::vector<double> times;
    std::vector<double> vals;
    event_values(k, times, vals);
    return kernels::max_value(vals);
}

std::pair<double, double> CadlagPath::past_future_sup(double t, int k) const {
    std::vector<double> times;
    std::vector<double> vals;
    event_values(k, times, vals);
    std::vector<double> pre(vals.size());
    std::vector<double> suf(vals.size());
    kernels::prefix_max(vals, pre);
    kernels::suffix_max(vals, suf);
    const double xt = value(t)[k];
    const auto p = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    const double s = p > 0 ? std::max(xt, pre[p - 1]) : xt;
    const double z = p < vals.size() ? std::max(xt, suf[p]) : xt;
    return {s, z};
}

CadlagPath CadlagPath::shifted(double t, const Jump& x) const {
    if (!(t >= 0.0 && t <= t0_)) throw std::out_of_range("path shift time outside [0, t0]");
    CadlagPath out = *this;
    auto it = std::upper_bound(out.jumps_.begin(), out.jumps_.end(), t,
                               [](double v, const PathJump& j) { return v < j.t; });
    out.jumps_.insert(it, PathJump{t, x});
    return out;
}

CadlagPath path_shift(const CadlagPath& w, double t, const Jump& x) { return w.shifted(t, x); }

namespace {

JumpMeasure dominating_of(const std::vector<LevyModel>& models) {
    if (models.empty()) throw std::invalid_argument("PathSimulator needs at least one model");
    JumpMeasure d = models.front().nu_star;
    for (const auto& m : models) d = d.plus(m.nu_delta.positive_part());
    return d;
}

}  // namespace

PathSimulator::PathSimulator(std::vector<LevyModel> models)
    : models_(std::move(models)),
      dominating_(dominating_of(models_)),
      sampler_(dominating_, models_.front().eps) {
    const auto& m0 = models_.front();
    const std::string star = m0.nu_star.describe();
    for (const auto& m : models_) {
        m.validate();
        if (m.dim != m0.dim || m.t0 != m0.t0 || m.eps != m0.eps || m.grid != m0.grid || m.sigma != m0.sigma ||
            m.nu_star.describe() != star)
            throw std::invalid_argument("coupled models must share ν*, Σ, t0, ε and grid");
        nus_.push_back(m.nu());
    }
    for (std::size_t i = 0; i < models_.size(); ++i) {
        const auto& m = models_[i];
        const auto& nu = nus_[i];
        // Finite variation: uncompensated form, sub-ε jumps simply dropped.
        // Otherwise the compensator of the simulated jumps in (ε, 1] enters.
        const Jump comp = nu.finite_variation() ? nu.first_moment(0.0, 1.0) : nu.first_moment(m.eps, 1.0);
        if (!finite_jump(comp, m.dim)) throw NumericalError("compensator integral is not finite");
        Jump d = m.b;
        for (int k = 0; k < m.dim; ++k) d[k] -= comp[k];
        drift_.push_back(d);
    }
    diffusion_ = m0.has_diffusion();
    if (diffusion_) chol_ = cholesky(m0.sigma, m0.dim);
}

std::vector<CadlagPath> PathSimulator::simulate_all(RngStream& rng) const {
    const auto& m0 = models_.front();
    const int d = m0.dim;
    const double t0 = m0.t0;
    std::vector<double> grid_t;
    std::vector<Jump> wiener;
    if (diffusion_) {
        const int n = m0.grid;
        grid_t.resize(static_cast<std::size_t>(n) + 1);
        wiener.assign(static_cast<std::size_t>(n) + 1, Jump{});
        std::normal_distribution<double> normal(0.0, 1.0);
        const double sdt = std::sqrt(t0 / n);
        for (int s = 1; s <= n; ++s) {
            grid_t[static_cast<std::size_t>(s)] = t0 * s / n;
            Jump z{};
            for (int k = 0; k < d; ++k) z[k] = normal(rng);
            Jump w = wiener[static_cast<std::size_t>(s) - 1];
            for (int i = 0; i < d; ++i) {
                double inc = 0.0;
                for (int k = 0; k <= i; ++k) inc += chol_[static_cast<std::size_t>(i * d + k)] * z[k];
                w[i] += inc * sdt;
            }
            wiener[static_cast<std::size_t>(s)] = w;
        }
        grid_t.back() = t0;
    } else {
        grid_t = {0.0, t0};
        wiener.assign(2, Jump{});
    }

    struct Candidate {
        double t;
        JumpSampler::Draw draw;
        double u;
    };
    std::vector<Candidate> cands;
    const double mean = t0 * sampler_.mass();
    if (mean > 0.0) {
        std::poisson_distribution<long long> pois(mean);
        const long long n = pois(rng);
        cands.reserve(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) {
            Candidate c;
            c.t = rng.uniform() * t0;
            c.draw = sampler_(rng);
            c.u = rng.uniform();
            cands.push_back(c);
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.t < b.t; });
    }
    const bool thin = models_.size() > 1 || !models_.front().nu_delta.is_positive();

    std::vector<CadlagPath> out;
    out.reserve(models_.size());
    for (std::size_t i = 0; i < models_.size(); ++i) {
        std::vector<Jump> skel(grid_t.size());
        for (std::size_t s = 0; s < grid_t.size(); ++s) {
            for (int k = 0; k < d; ++k) skel[s][k] = drift_[i][k] * grid_t[s] + wiener[s][k];
        }
        std::vector<PathJump> jumps;
        jumps.reserve(cands.size());
        for (const auto& c : cands) {
            if (thin) {
                const double dens = c.draw.atom ? nus_[i].atom_mass(c.draw.x) : nus_[i].ray_density(c.draw.x);
                const double dom = c.draw.atom ? dominating_.atom_mass(c.draw.x) : dominating_.ray_density(c.draw.x);
                const double ratio = dom > 0.0 ? dens / dom : 0.0;
                if (ratio < -1e-12) throw std::domain_error("jump density dν/dν* is negative at a sampled size");
                if (!(c.u < ratio)) continue;
            }
            jumps.push_back(PathJump{c.t, c.draw.x});
        }
        out.emplace_back(d, t0, grid_t, std::move(skel), std::move(jumps));
    }
    return out;
}

CadlagPath simulate_path(const LevyModel& model, RngStream& rng) { return PathSimulator(model).simulate(rng); }

double PathFunctional::operator()(const CadlagPath& w) const {
    const double v = eval(w);
    if (std::isnan(v)) throw NumericalError("path functional '" + name + "' returned NaN");
    return v;
}

namespace path_functionals {

PathFunctional terminal(int k) {
    return {"terminal", [k](const CadlagPath& w) { return w.terminal()[k]; }};
}

PathFunctional supremum() {
    return {"supremum", [](const CadlagPath& w) { return w.supremum(0); }};
}

PathFunctional no_jumps() {
    return {"no_jumps", [](const CadlagPath& w) {
                for (const auto& j : w.jumps()) {
                    if (jump_norm(j.x, w.dim()) != 0.0) return 0.0;
                }
                return 1.0;
            }};
}

PathFunctional value_at(double s, int k) {
    return {"value_at", [s, k](const CadlagPath& w) { return w.value(s)[k]; }};
}

PathFunctional by_id(const std::string& id) {
    if (id == "terminal") return terminal();
    if (id == "supremum") return supremum();
    if (id == "no_jumps") return no_jumps();
    throw std::invalid_argument("unknown path functional id '" + id + "'");
}

}  // namespace path_functionals

JumpPerturbation JumpPerturbation::linear(const LevyModel& model, JumpMeasure direction, double theta0, double lo,
                                          double hi) {
    if (!(lo <= theta0 && theta0 <= hi)) throw std::invalid_argument("θ0 must lie in the interval");
    JumpPerturbation p;
    p.direction = std::move(direction);
    p.theta0 = theta0;
    p.lo = lo;
    p.hi = hi;
    p.delta_at = [base = model.nu_delta, dir = p.direction, theta0](double theta) {
        return base.plus(dir.scaled(theta - theta0));
    };
    return p;
}

JumpPerturbation JumpPerturbation::gamma_scale(double theta, double beta0) {
    JumpPerturbation p;
    p.direction = JumpMeasure::gamma_scale_direction(theta, beta0);
    p.theta0 = beta0;
    p.lo = beta0 / 2.0;
    p.hi = 1.5 * beta0;
    p.delta_at = [theta](double beta) { return JumpMeasure::gamma_tail(theta, beta); };
    // Remainder and envelope as measures against Lebesgue on x > 0; they are
    // turned into densities against ν* by the checker.
    p.remainder = [theta, beta0](double beta, const Jump& x) {
        if (!(x[0] > 0.0)) return 0.0;
        return -theta * std::exp(-beta0 * x[0]) / x[0] * exp_tail_remainder(beta0 - beta, x[0]);
    };
    p.envelope = [theta, beta0](const Jump& x) {
        if (!(x[0] > 0.0)) return 0.0;
        const double c = beta0 / 2.0;
        return theta / c * std::exp(-c * x[0]) / x[0];
    };
    return p;
}

LevyModel perturbed_model(const LevyModel& model, const JumpPerturbation& p, double theta) {
    if (!(theta >= p.lo && theta <= p.hi)) throw std::domain_error("θ outside the perturbation interval");
    LevyModel m = model;
    m.nu_delta = p.delta_at(theta);
    const Jump now = m.nu_delta.first_moment(0.0, 1.0);
    const Jump base = p.delta_at(p.theta0).first_moment(0.0, 1.0);
    for (int k = 0; k < m.dim; ++k) m.b[k] += now[k] - base[k];
    if (!finite_jump(m.b, m.dim)) throw NumericalError("perturbed drift is not finite");
    m.validate();
    return m;
}

std::string check_direction(const LevyModel& model, const JumpMeasure& direction) {
    std::ostringstream err;
    if (direction.dim() != model.dim) return "direction dimension differs from the model";
    if (!std::isfinite(density_ratio_energy(model.nu_delta, model.nu_star)))
        err << "∫(1−g_ν)² dν* diverges; ";
    if (!std::isfinite(model.nu_delta.abs_integral(1.0, 0.0, 1.0)))
        err << "∫_{|x|≤1} |x||1−g_ν| dν* diverges; ";
    if (!std::isfinite(density_ratio_energy(direction, model.nu_star))) err << "∫ g² dν* diverges; ";
    if (!std::isfinite(direction.abs_integral(1.0, 0.0, 1.0) + direction.abs_integral(0.0, 1.0, kInf)))
        err << "∫ (|x|∧1)|g| dν* diverges; ";
    return err.str();
}

std::string check_perturbation(const LevyModel& model, const JumpPerturbation& p, int grid) {
    std::string err = check_direction(model, p.direction);
    if (!err.empty()) return err;
    if (!p.delta_at) return "perturbation has no family";
    const auto pts = probe_points(model.nu_star, p.direction);
    auto as_density = [&](double lebesgue_value, const Jump& x) {
        const double d = model.nu_star.ray_density(x);
        return d > 0.0 ? lebesgue_value / d : 0.0;
    };
    std::ostringstream out;
    for (int gi = 0; gi <= grid; ++gi) {
        const double theta = p.lo + (p.hi - p.lo) * gi / grid;
        const auto delta = p.delta_at(theta);
        for (const auto& x : pts) {
            const double g_theta = 1.0 + density_against(delta, model.nu_star, x);
            if (g_theta < -1e-12) {
                out << "negative density at θ=" << theta << "; ";
                return out.str();
            }
            if (!p.remainder) continue;
            const double r = as_density(p.remainder(theta, x), x);
            if (p.envelope && std::abs(r) > as_density(p.envelope(x), x) * (1.0 + 1e-9) + 1e-300) {
                out << "remainder exceeds envelope at θ=" << theta << "; ";
                return out.str();
            }
            // The family must match g_ν + (θ−θ0)(g + R_θ).
            const double g = density_against(p.direction, model.nu_star, x);
            const double pred = model.g_nu(x) + (theta - p.theta0) * (g + r);
            if (std::abs(pred - g_theta) > 1e-8 * (1.0 + std::abs(g_theta))) {
                out << "family does not match g_ν + (θ−θ0)(g + R_θ) at θ=" << theta << "; ";
                return out.str();
            }
        }
    }
    if (p.remainder) {
        const double step = 1e-6 * std::max(p.hi - p.lo, 1e-300);
        const double theta = p.theta0 + (p.theta0 + step <= p.hi ? step : -step);
        for (const auto& x : pts) {
            const double r = as_density(p.remainder(theta, x), x);
            const double env = p.envelope ? as_density(p.envelope(x), x) : 0.0;
            if (std::abs(r) > 1e-4 * (1.0 + env)) return "remainder does not vanish at θ0; ";
        }
    }
    return "";
}

Estimate levy_expectation(const PathFunctional& f, const LevyModel& model, const McPlan& plan) {
    const PathSimulator sim(model);
    return mc_mean(plan, tag_of("levy-expectation"), [&](RngStream& rng) { return f(sim.simulate(rng)); });
}

Estimate levy_derivative(const PathFunctional& f, const LevyModel& model, const JumpMeasure& direction,
                         const McPlan& plan) {
    if (const auto err = check_direction(model, direction); !err.empty())
        throw AdmissibilityError("direction fails the square-integrability conditions: " + err);
    if (direction.empty()) return Estimate{0.0, 0.0, plan.samples};
    const double mass = direction.abs_integral(0.0, 0.0, kInf);
    if (!std::isfinite(mass)) throw std::domain_error("|g|ν* has infinite mass; cannot normalize the jump proposal");
    const JumpSampler proposal(direction, 0.0);
    const PathSimulator sim(model);
    const double t0 = model.t0;
    return mc_mean(plan, tag_of("levy-derivative"), [&](RngStream& rng) {
        const auto path = sim.simulate(rng);
        const double t = rng.uniform() * t0;
        const auto d = proposal(rng);
        return t0 * mass * d.sign * (f(path.shifted(t, d.x)) - f(path));
    });
}

Estimate levy_nonlinear_derivative(const PathFunctional& f, const LevyModel& model, const JumpPerturbation& p,
                                   const McPlan& plan) {
    if (const auto err = check_perturbation(model, p); !err.empty())
        throw AdmissibilityError("perturbation hypotheses fail: " + err);
    return levy_derivative(f, model, p.direction, plan);
}

Estimate levy_coupled_fd(const PathFunctional& f, const LevyModel& model, const JumpPerturbation& p, double delta,
                         const McPlan& plan) {
    if (!(delta > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
    const PathSimulator sim({perturbed_model(model, p, p.theta0 - delta), perturbed_model(model, p, p.theta0 + delta)});
    return mc_mean(plan, tag_of("levy-coupled-fd"), [&](RngStream& rng) {
        const auto paths = sim.simulate_all(rng);
        return (f(paths[1]) - f(paths[0])) / (2.0 * delta);
    });
}

LevyModel changed_model(const LevyModel& model, const JumpMeasure& change) {
    LevyModel m = model;
    m.nu_delta = model.nu_delta.plus(change);
    m.b = drift_adjust(model.b, change, 1.0);
    m.validate();
    return m;
}

SeriesResult levy_series(const PathFunctional& f, const LevyModel& model, const JumpMeasure& change,
                         const LevySeriesOptions& opt) {
    const auto target = model.nu_delta.plus(change);
    std::ostringstream err;
    if (!std::isfinite(density_ratio_energy(model.nu_delta, model.nu_star))) err << "∫(1−g_ν)² dν* diverges; ";
    if (!std::isfinite(density_ratio_energy(target, model.nu_star))) err << "∫(1−g_ν′)² dν* diverges; ";
    if (!std::isfinite(model.nu_delta.abs_integral(1.0, 0.0, 1.0) + target.abs_integral(1.0, 0.0, 1.0)))
        err << "∫_{|x|≤1} |x||1−g| dν* diverges; ";
    if (!err.str().empty()) throw AdmissibilityError("series hypotheses fail: " + err.str());

    const PathSimulator sim(model);
    const double t0 = model.t0;
    SeriesResult r;
    if (change.empty()) {
        const auto e = levy_expectation(f, model, opt.plan);
        append_series_term(r, e.mean, std::abs(e.mean), e.se, opt.eps_abs, true);
        r.converged = true;
        r.truncation_order = 0;
        return r;
    }
    const double mass = change.abs_integral(0.0, 0.0, kInf);
    if (!std::isfinite(mass)) throw std::domain_error("|g_ν′ − g_ν| ν* has infinite mass");
    const JumpSampler proposal(change, 0.0);

    double factorial = 1.0;
    for (int n = 0; n <= opt.n_max; ++n) {
        if (n > 0) factorial *= n;
        McPlan plan = opt.plan;
        const std::uint64_t base = std::max<std::uint64_t>(plan.samples, 1);
        const std::uint64_t cap = std::max(opt.max_order_samples, base);
        plan.samples = (n >= 40 || base > (cap >> n)) ? cap : base << n;
        const double weight = std::pow(t0 * mass, n) / factorial;
        struct Part {
            RunningStats term;
            RunningStats abs_term;
        };
        const auto parts = run_chunks<Part>(
            plan, tag_of("levy-series") + static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ull,
            [&](RngStream& rng, std::uint64_t begin, std::uint64_t end, std::uint64_t) {
                Part s;
                std::vector<PathJump> shifts(static_cast<std::size_t>(n));
                for (std::uint64_t i = begin; i < end; ++i) {
                    const auto path = sim.simulate(rng);
                    int sign = 1;
                    for (auto& sh : shifts) {
                        sh.t = rng.uniform() * t0;
                        const auto d = proposal(rng);
                        sh.x = d.x;
                        sign *= d.sign;
                    }
                    // Δ^n by inclusion–exclusion over subsets of the shifts.
                    double diff = 0.0;
                    const std::uint32_t subsets = std::uint32_t{1} << n;
                    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
                        CadlagPath w = path;
                        for (int b = 0; b < n; ++b) {
                            if (mask & (1u << b)) w = w.shifted(shifts[static_cast<std::size_t>(b)].t,
                                                                shifts[static_cast<std::size_t>(b)].x);
                        }
                        const int parity = (n - std::popcount(mask)) % 2 == 0 ? 1 : -1;
                        diff += parity * f(w);
                    }
                    const double v = weight * sign * diff;
                    s.term.add(v);
                    s.abs_term.add(std::abs(v));
                }
                return s;
            });
        std::vector<RunningStats> terms;
        RunningStats abs_all;
        for (const auto& p : parts) {
            terms.push_back(p.term);
            abs_all.merge(p.abs_term);
        }
        const auto e = pooled_estimate(terms);
        if (append_series_term(r, e.mean, abs_all.mean(), e.se, opt.eps_abs, true)) break;
    }
    return r;
}

std::string QHistogram::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17) << "y_lo,y_hi,mass\n";
    os << "-inf," << lo << ',' << below << '\n';
    const double w = mass.empty() ? 0.0 : (hi - lo) / static_cast<double>(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i)
        os << lo + w * static_cast<double>(i) << ',' << lo + w * static_cast<double>(i + 1) << ',' << mass[i] << '\n';
    os << hi << ",inf," << above << '\n';
    return os.str();
}

SupremumResult supremum_derivative(const LevyModel& model, const JumpMeasure& direction, const McPlan& plan,
                                   const SupremumOptions& opt) {
    if (model.dim != 1) throw std::invalid_argument("the supremum study is one-dimensional");
    if (opt.bins < 1 || !(opt.y_hi > opt.y_lo)) throw std::invalid_argument("invalid histogram layout");
    if (!model.nu_star.upper_second_moment_finite())
        throw AdmissibilityError("∫_{x>1} x² ν*(dx) diverges; the supremum is not square-integrable");
    if (const auto err = check_direction(model, direction); !err.empty())
        throw AdmissibilityError("direction fails the square-integrability conditions: " + err);
    const double mass = direction.empty() ? 0.0 : direction.abs_integral(0.0, 0.0, kInf);
    if (!std::isfinite(mass)) throw std::domain_error("|g|ν* has infinite mass; cannot normalize the jump proposal");
    std::optional<JumpSampler> proposal;
    if (mass > 0.0) proposal.emplace(direction, 0.0);
    const PathSimulator sim(model);
    const double t0 = model.t0;
    const double width = (opt.y_hi - opt.y_lo) / opt.bins;

    struct Part {
        RunningStats est;
        double gap = 0.0;
        std::uint64_t violations = 0;
        std::uint64_t checks = 0;
        std::vector<double> counts;
        double below = 0.0;
        double above = 0.0;
    };
    const auto parts = run_chunks<Part>(
        plan, tag_of("levy-supremum"), [&](RngStream& rng, std::uint64_t begin, std::uint64_t end, std::uint64_t) {
            Part s;
            s.counts.assign(static_cast<std::size_t>(opt.bins), 0.0);
            for (std::uint64_t i = begin; i < end; ++i) {
                const auto path = sim.simulate(rng);
                const double t = rng.uniform() * t0;
                const auto [sup_past, sup_future] = path.past_future_sup(t);
                const double y = sup_past - sup_future;
                if (y < opt.y_lo) {
                    s.below += 1.0;
                } else if (y >= opt.y_hi) {
                    s.above += 1.0;
                } else {
                    const auto b = std::min(static_cast<std::size_t>((y - opt.y_lo) / width),
                                            static_cast<std::size_t>(opt.bins) - 1);
                    s.counts[b] += 1.0;
                }
                if (!proposal) {
                    s.est.add(0.0);
                    continue;
                }
                const auto d = (*proposal)(rng);
                const double x = d.x[0];
                const double kernel = std::max(x - y, 0.0) - std::max(-y, 0.0);
                const double redone = path.shifted(t, d.x).supremum() - path.supremum();
                s.gap = std::max(s.gap, std::abs(redone - kernel));
                if (std::abs(redone) > 2.0 * std::abs(x) + 1e-12) ++s.violations;
                ++s.checks;
                s.est.add(t0 * mass * d.sign * kernel);
            }
            return s;
        });
    SupremumResult out;
    std::vector<RunningStats> stats;
    out.q.lo = opt.y_lo;
    out.q.hi = opt.y_hi;
    out.q.mass.assign(static_cast<std::size_t>(opt.bins), 0.0);
    for (const auto& p : parts) {
        stats.push_back(p.est);
        out.max_kernel_gap = std::max(out.max_kernel_gap, p.gap);
        out.bound_violations += p.violations;
        out.kernel_checks += p.checks;
        for (std::size_t b = 0; b < p.counts.size(); ++b) out.q.mass[b] += p.counts[b];
        out.q.below += p.below;
        out.q.above += p.above;
    }
    const double scale = plan.samples > 0 ? t0 / static_cast<double>(plan.samples) : 0.0;
    for (auto& m : out.q.mass) m *= scale;
    out.q.below *= scale;
    out.q.above *= scale;
    out.estimate = pooled_estimate(stats);
    if (!proposal) out.estimate.se = 0.0;
    return out;
}

}  // namespace perturb
