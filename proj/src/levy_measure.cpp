#include "perturb/levy_measure.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "perturb/configuration.hpp"

namespace perturb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double open_uniform(RngStream& rng) {
    for (;;) {
        const double u = rng.uniform();
        if (u > 0.0) return u;
    }
}

// ∫_u^v r^s e^{−βr} dr by quadrature; u > 0.
double quad_power_exp(double s, double beta, double u, double v) {
    auto f = [s, beta](double r) { return std::pow(r, s) * std::exp(-beta * r); };
    double err = 0.0;
    double l1 = 0.0;
    double value = 0.0;
    if (std::isinf(v)) {
        boost::math::quadrature::exp_sinh<double> integrator;
        value = integrator.integrate(f, u, kInf, 1e-12, &err, &l1);
    } else {
        boost::math::quadrature::tanh_sinh<double> integrator;
        value = integrator.integrate(f, u, v, 1e-12, &err, &l1);
    }
    if (!std::isfinite(value) || err > 1e-8 * std::max(l1, 1e-300))
        throw NumericalError("radial quadrature did not converge");
    return value;
}

bool same_direction(const Jump& a, const Jump& b, int dim) {
    for (int k = 0; k < dim; ++k) {
        if (std::abs(a[k] - b[k]) > 1e-12) return false;
    }
    return true;
}

bool same_point(const Jump& a, const Jump& b, int dim) {
    for (int k = 0; k < dim; ++k) {
        if (std::abs(a[k] - b[k]) > 1e-12 * std::max(1.0, std::abs(a[k]))) return false;
    }
    return true;
}

}  // namespace

double jump_norm(const Jump& x, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += x[k] * x[k];
    return std::sqrt(s);
}

double RadialLaw::density(double r) const {
    if (!(r > lo && r <= hi)) return 0.0;
    return scale * std::pow(r, power) * std::exp(-rate * r);
}

double RadialLaw::integral(double q, double a, double b) const {
    const double u = std::max(a, lo);
    const double v = std::min(b, hi);
    if (!(v > u) || scale == 0.0) return 0.0;
    const double s = power + q;
    if (u == 0.0 && s <= -1.0) return kInf;
    if (std::isinf(v) && rate == 0.0 && s >= -1.0) return kInf;
    double value = 0.0;
    if (rate == 0.0) {
        if (s == -1.0) {
            value = std::log(v / u);
        } else {
            const double hi_term = std::isinf(v) ? 0.0 : std::pow(v, s + 1.0);
            const double lo_term = u == 0.0 ? 0.0 : std::pow(u, s + 1.0);
            value = (hi_term - lo_term) / (s + 1.0);
        }
    } else if (s > -1.0) {
        const double a1 = s + 1.0;
        const double front = std::exp(std::lgamma(a1) - a1 * std::log(rate));
        if (rate * u > a1) {
            const double qv = std::isinf(v) ? 0.0 : boost::math::gamma_q(a1, rate * v);
            value = front * (boost::math::gamma_q(a1, rate * u) - qv);
        } else {
            const double pv = std::isinf(v) ? 1.0 : boost::math::gamma_p(a1, rate * v);
            value = front * (pv - boost::math::gamma_p(a1, rate * u));
        }
    } else {
        value = quad_power_exp(s, rate, u, v);
    }
    return scale * value;
}

JumpMeasure::JumpMeasure(int dim) : dim_(dim) {
    if (dim < 1 || dim > 4) throw std::invalid_argument("JumpMeasure: dimension must be 1..4");
}

void JumpMeasure::add_ray(Jump direction, RadialLaw law, int sign) {
    const double n = jump_norm(direction, dim_);
    if (!(n > 0.0)) throw std::invalid_argument("ray direction must be nonzero");
    for (int k = 0; k < dim_; ++k) direction[k] /= n;
    for (int k = dim_; k < 4; ++k) direction[k] = 0.0;
    if (!(law.scale >= 0.0) || !(law.lo >= 0.0) || !(law.hi > law.lo) || !(law.rate >= 0.0) ||
        !std::isfinite(law.power))
        throw std::invalid_argument("invalid radial law");
    if (sign != 1 && sign != -1) throw std::invalid_argument("component sign must be ±1");
    if (law.scale == 0.0) return;
    rays_.push_back({direction, law, sign});
}

void JumpMeasure::add_atom(Jump x, double mass, int sign) {
    if (!(jump_norm(x, dim_) > 0.0)) throw std::invalid_argument("jump measures must not charge 0");
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw std::invalid_argument("atom mass must be finite and >= 0");
    if (sign != 1 && sign != -1) throw std::invalid_argument("component sign must be ±1");
    for (int k = dim_; k < 4; ++k) x[k] = 0.0;
    if (mass == 0.0) return;
    atoms_.push_back({x, mass, sign});
}

JumpMeasure JumpMeasure::stable(double alpha, const std::vector<std::pair<Jump, double>>& q, int dim) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("stable index must lie in (0, 2)");
    JumpMeasure m(dim);
    for (const auto& [u, w] : q) {
        if (!(w >= 0.0)) throw std::invalid_argument("spherical weights must be >= 0");
        m.add_ray(u, RadialLaw{w, -alpha - 1.0, 0.0, 0.0, kInf});
    }
    return m;
}

JumpMeasure JumpMeasure::symmetric_stable(double alpha, double c) {
    return stable(alpha, {{Jump{1.0}, c}, {Jump{-1.0}, c}}, 1);
}

JumpMeasure JumpMeasure::gamma_tail(double theta, double beta) {
    if (!(theta >= 0.0) || !(beta > 0.0)) throw std::invalid_argument("gamma_tail needs θ >= 0 and β > 0");
    JumpMeasure m(1);
    m.add_ray(Jump{1.0}, RadialLaw{theta, -1.0, beta, 0.0, kInf});
    return m;
}

JumpMeasure JumpMeasure::compound_poisson(const std::vector<std::pair<Jump, double>>& atoms, int dim) {
    JumpMeasure m(dim);
    for (const auto& [x, w] : atoms) m.add_atom(x, w);
    return m;
}

JumpMeasure JumpMeasure::compound_poisson_1d(const std::vector<std::pair<double, double>>& atoms) {
    JumpMeasure m(1);
    for (const auto& [x, w] : atoms) m.add_atom(Jump{x}, w);
    return m;
}

JumpMeasure JumpMeasure::signed_atoms_1d(const std::vector<std::pair<double, double>>& atoms) {
    JumpMeasure m(1);
    for (const auto& [x, w] : atoms) m.add_atom(Jump{x}, std::abs(w), w < 0.0 ? -1 : 1);
    return m;
}

JumpMeasure JumpMeasure::stable_direction(double alpha, double alpha_prime,
                                          const std::vector<std::pair<Jump, double>>& q, int dim) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("stable index must lie in (0, 2)");
    if (!(alpha_prime > 0.0 && alpha_prime < alpha / 2.0))
        throw std::invalid_argument("stable direction needs 0 < α′ < α/2");
    JumpMeasure m(dim);
    for (const auto& [u, w] : q) {
        if (!(w >= 0.0)) throw std::invalid_argument("spherical weights must be >= 0");
        m.add_ray(u, RadialLaw{w, -alpha_prime - 1.0, 0.0, 0.0, 1.0});
    }
    return m;
}

JumpMeasure JumpMeasure::gamma_scale_direction(double theta, double beta0) {
    if (!(theta >= 0.0) || !(beta0 > 0.0)) throw std::invalid_argument("gamma scale direction needs θ >= 0, β0 > 0");
    JumpMeasure m(1);
    m.add_ray(Jump{1.0}, RadialLaw{theta, 0.0, beta0, 0.0, kInf}, -1);
    return m;
}

bool JumpMeasure::is_positive() const {
    return std::all_of(rays_.begin(), rays_.end(), [](const auto& c) { return c.sign > 0; }) &&
           std::all_of(atoms_.begin(), atoms_.end(), [](const auto& c) { return c.sign > 0; });
}

JumpMeasure JumpMeasure::plus(const JumpMeasure& other) const {
    if (other.dim_ != dim_) throw std::invalid_argument("jump measures live in different dimensions");
    JumpMeasure out = *this;
    out.rays_.insert(out.rays_.end(), other.rays_.begin(), other.rays_.end());
    out.atoms_.insert(out.atoms_.end(), other.atoms_.begin(), other.atoms_.end());
    return out;
}

JumpMeasure JumpMeasure::scaled(double c) const {
    if (!std::isfinite(c)) throw std::invalid_argument("scale factor must be finite");
    JumpMeasure out(dim_);
    if (c == 0.0) return out;
    const int flip = c < 0.0 ? -1 : 1;
    for (auto r : rays_) {
        r.law.scale *= std::abs(c);
        r.sign *= flip;
        out.rays_.push_back(r);
    }
    for (auto a : atoms_) {
        a.mass *= std::abs(c);
        a.sign *= flip;
        out.atoms_.push_back(a);
    }
    return out;
}

JumpMeasure JumpMeasure::positive_part() const {
    JumpMeasure out(dim_);
    for (const auto& r : rays_)
        if (r.sign > 0) out.rays_.push_back(r);
    for (const auto& a : atoms_)
        if (a.sign > 0) out.atoms_.push_back(a);
    return out;
}

JumpMeasure JumpMeasure::negative_part() const {
    JumpMeasure out(dim_);
    for (auto r : rays_)
        if (r.sign < 0) {
            r.sign = 1;
            out.rays_.push_back(r);
        }
    for (auto a : atoms_)
        if (a.sign < 0) {
            a.sign = 1;
            out.atoms_.push_back(a);
        }
    return out;
}

double JumpMeasure::abs_integral(double q, double a, double b) const {
    double s = 0.0;
    for (const auto& r : rays_) s += r.law.integral(q, a, b);
    for (const auto& at : atoms_) {
        const double n = jump_norm(at.x, dim_);
        if (n > a && n <= b) s += at.mass * std::pow(n, q);
    }
    return s;
}

Jump JumpMeasure::first_moment(double a, double b) const {
    Jump m{};
    for (const auto& r : rays_) {
        const double v = r.law.integral(1.0, a, b);
        for (int k = 0; k < dim_; ++k) {
            if (r.direction[k] != 0.0) m[k] += r.sign * r.direction[k] * v;
        }
    }
    for (const auto& at : atoms_) {
        const double n = jump_norm(at.x, dim_);
        if (n > a && n <= b) {
            for (int k = 0; k < dim_; ++k) m[k] += at.sign * at.mass * at.x[k];
        }
    }
    return m;
}

double JumpMeasure::second_moment(int k, double a, double b) const {
    double s = 0.0;
    for (const auto& r : rays_) {
        const double u = r.direction[k];
        if (u != 0.0) s += r.sign * u * u * r.law.integral(2.0, a, b);
    }
    for (const auto& at : atoms_) {
        const double n = jump_norm(at.x, dim_);
        if (n > a && n <= b) s += at.sign * at.mass * at.x[k] * at.x[k];
    }
    return s;
}

double JumpMeasure::ray_density(const Jump& x) const {
    const double r = jump_norm(x, dim_);
    if (r == 0.0) return 0.0;
    Jump u{};
    for (int k = 0; k < dim_; ++k) u[k] = x[k] / r;
    double s = 0.0;
    for (const auto& c : rays_) {
        if (same_direction(c.direction, u, dim_)) s += c.sign * c.law.density(r);
    }
    return s;
}

double JumpMeasure::atom_mass(const Jump& x) const {
    double s = 0.0;
    for (const auto& a : atoms_) {
        if (same_point(a.x, x, dim_)) s += a.sign * a.mass;
    }
    return s;
}

bool JumpMeasure::levy_integrable() const {
    return is_positive() && std::isfinite(abs_integral(2.0, 0.0, 1.0) + abs_integral(0.0, 1.0, kInf));
}

bool JumpMeasure::finite_variation() const {
    return std::isfinite(abs_integral(1.0, 0.0, 1.0) + abs_integral(0.0, 1.0, kInf));
}

bool JumpMeasure::upper_second_moment_finite() const {
    for (const auto& r : rays_) {
        const double u0 = r.direction[0];
        if (u0 > 0.0 && !std::isfinite(r.law.integral(2.0, 1.0 / u0, kInf))) return false;
    }
    return true;
}

std::string JumpMeasure::describe() const {
    std::ostringstream os;
    os << "d=" << dim_;
    for (const auto& r : rays_) {
        os << " ray[" << (r.sign > 0 ? "+" : "-") << "u=(";
        for (int k = 0; k < dim_; ++k) os << (k ? "," : "") << r.direction[k];
        os << ") " << r.law.scale << " r^" << r.law.power << " e^-" << r.law.rate << "r on (" << r.law.lo << ","
           << r.law.hi << ")]";
    }
    for (const auto& a : atoms_) {
        os << " atom[" << (a.sign > 0 ? "+" : "-") << a.mass << " at (";
        for (int k = 0; k < dim_; ++k) os << (k ? "," : "") << a.x[k];
        os << ")]";
    }
    return os.str();
}

namespace {

struct Asymptote {
    double rate = kInf;
    double power = 0.0;
    bool present = false;
};

// Leading behaviour near 0 (smallest power among components starting at 0).
Asymptote near_zero(const std::vector<const RayComponent*>& comps) {
    Asymptote a;
    for (const auto* c : comps) {
        if (c->law.lo != 0.0) continue;
        if (!a.present || c->law.power < a.power) a.power = c->law.power;
        a.present = true;
        a.rate = 0.0;
    }
    return a;
}

// Leading behaviour at infinity (smallest rate, then largest power).
Asymptote near_infinity(const std::vector<const RayComponent*>& comps) {
    Asymptote a;
    for (const auto* c : comps) {
        if (!std::isinf(c->law.hi)) continue;
        if (!a.present || c->law.rate < a.rate || (c->law.rate == a.rate && c->law.power > a.power)) {
            a.rate = c->law.rate;
            a.power = c->law.power;
        }
        a.present = true;
    }
    return a;
}

}  // namespace

double density_ratio_energy(const JumpMeasure& mu, const JumpMeasure& kappa) {
    if (mu.dim() != kappa.dim()) throw std::invalid_argument("density_ratio_energy: dimension mismatch");
    const int dim = mu.dim();
    double total = 0.0;

    // Atoms: group μ's atoms by location.
    std::vector<bool> done(mu.atoms().size(), false);
    for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
        if (done[i]) continue;
        const Jump& x = mu.atoms()[i].x;
        double m = 0.0;
        for (std::size_t j = i; j < mu.atoms().size(); ++j) {
            if (same_point(mu.atoms()[j].x, x, dim)) {
                m += mu.atoms()[j].sign * mu.atoms()[j].mass;
                done[j] = true;
            }
        }
        if (m == 0.0) continue;
        const double k = kappa.atom_mass(x);
        if (!(k > 0.0)) return kInf;
        total += m * m / k;
    }

    // Rays, direction by direction.
    std::vector<bool> seen(mu.rays().size(), false);
    for (std::size_t i = 0; i < mu.rays().size(); ++i) {
        if (seen[i]) continue;
        const Jump u = mu.rays()[i].direction;
        std::vector<const RayComponent*> mc;
        std::vector<const RayComponent*> kc;
        for (std::size_t j = i; j < mu.rays().size(); ++j) {
            if (same_direction(mu.rays()[j].direction, u, dim)) {
                mc.push_back(&mu.rays()[j]);
                seen[j] = true;
            }
        }
        for (const auto& c : kappa.rays()) {
            if (same_direction(c.direction, u, dim)) kc.push_back(&c);
        }
        if (kc.empty()) return kInf;
        // Support of κ along u must cover that of μ.
        std::vector<std::pair<double, double>> cover;
        for (const auto* c : kc) cover.emplace_back(c->law.lo, c->law.hi);
        std::sort(cover.begin(), cover.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& iv : cover) {
            if (!merged.empty() && iv.first <= merged.back().second)
                merged.back().second = std::max(merged.back().second, iv.second);
            else
                merged.push_back(iv);
        }
        for (const auto* c : mc) {
            const bool covered = std::any_of(merged.begin(), merged.end(), [&](const auto& iv) {
                return iv.first <= c->law.lo && c->law.hi <= iv.second;
            });
            if (!covered) return kInf;
        }
        const auto m0 = near_zero(mc);
        const auto k0 = near_zero(kc);
        if (m0.present && 2.0 * m0.power - k0.power <= -1.0) return kInf;
        const auto mi = near_infinity(mc);
        const auto ki = near_infinity(kc);
        if (mi.present) {
            const double r = 2.0 * mi.rate - ki.rate;
            if (r < 0.0 || (r == 0.0 && 2.0 * mi.power - ki.power >= -1.0)) return kInf;
        }
        std::vector<double> cuts{1.0};
        for (const auto* c : mc) {
            cuts.push_back(c->law.lo);
            cuts.push_back(c->law.hi);
        }
        for (const auto* c : kc) {
            cuts.push_back(c->law.lo);
            cuts.push_back(c->law.hi);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        // Densities overflow near 0 for steep power laws; work relative to
        // the largest log-density.
        auto log_density = [](const RadialLaw& l, double r) {
            if (!(r > l.lo && r <= l.hi) || l.scale == 0.0) return -kInf;
            return std::log(l.scale) + l.power * std::log(r) - l.rate * r;
        };
        auto integrand = [&](double r) {
            double top = -kInf;
            for (const auto* c : mc) top = std::max(top, log_density(c->law, r));
            for (const auto* c : kc) top = std::max(top, log_density(c->law, r));
            if (top == -kInf) return 0.0;
            double num = 0.0;
            double den = 0.0;
            for (const auto* c : mc) num += c->sign * std::exp(log_density(c->law, r) - top);
            for (const auto* c : kc) den += std::exp(log_density(c->law, r) - top);
            if (!(den > 0.0) || num == 0.0) return 0.0;
            return std::exp(top + 2.0 * std::log(std::abs(num)) - std::log(den));
        };
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double c = cuts[k];
            const double d = cuts[k + 1];
            const double mid = std::isinf(d) ? c + 1.0 : 0.5 * (c + d);
            const bool active =
                std::any_of(mc.begin(), mc.end(), [&](const auto* m) { return m->law.lo < mid && mid <= m->law.hi; });
            if (!active) continue;
            if (std::isinf(d)) {
                boost::math::quadrature::exp_sinh<double> integrator;
                total += integrator.integrate(integrand, c, kInf);
            } else {
                boost::math::quadrature::tanh_sinh<double> integrator;
                total += integrator.integrate(integrand, c, d);
            }
        }
    }
    return total;
}

JumpSampler::JumpSampler(const JumpMeasure& mu, double eps) : dim_(mu.dim()) {
    if (!(eps >= 0.0)) throw std::invalid_argument("JumpSampler: threshold must be >= 0");
    for (const auto& a : mu.atoms()) {
        if (jump_norm(a.x, dim_) > eps) {
            Piece p;
            p.atom = true;
            p.direction = a.x;
            p.sign = a.sign;
            pieces_.push_back(p);
            total_ += a.mass;
            cdf_.push_back(total_);
        }
    }
    for (const auto& r : mu.rays()) {
        const double a = std::max(eps, r.law.lo);
        const double b = r.law.hi;
        if (!(b > a)) continue;
        std::vector<std::pair<double, double>> parts;
        if (a < 1.0) parts.emplace_back(a, std::min(b, 1.0));
        if (b > 1.0) parts.emplace_back(std::max(a, 1.0), b);
        for (const auto& [lo, hi] : parts) {
            const double m = r.law.integral(0.0, lo, hi);
            if (!std::isfinite(m))
                throw std::domain_error("jump measure has infinite mass above the threshold; raise ε");
            if (m == 0.0) continue;
            pieces_.push_back(Piece{false, r.direction, r.law, lo, hi, r.sign});
            total_ += m;
            cdf_.push_back(total_);
        }
    }
}

JumpSampler::Draw JumpSampler::operator()(RngStream& rng) const {
    if (pieces_.empty()) throw std::logic_error("JumpSampler: nothing to sample");
    const double u = rng.uniform() * total_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    const Piece& p = pieces_[static_cast<std::size_t>(it - cdf_.begin())];
    Draw d;
    d.sign = p.sign;
    if (p.atom) {
        d.atom = true;
        d.x = p.direction;
        return d;
    }
    const double r = sample_radius(p, rng);
    for (int k = 0; k < dim_; ++k) d.x[k] = r * p.direction[k];
    return d;
}

namespace {

// Inverse CDF of r^p on (a, b).
double power_law(double p, double a, double b, double u) {
    const double s = p + 1.0;
    if (s == 0.0) return a * std::exp(u * std::log(b / a));
    const double A = a == 0.0 ? 0.0 : std::pow(a, s);
    const double B = std::isinf(b) ? 0.0 : std::pow(b, s);
    return std::pow(A + u * (B - A), 1.0 / s);
}

// Inverse CDF of e^{−βr} on (a, b).
double truncated_exp(double beta, double a, double b, double u) {
    const double span = std::isinf(b) ? 1.0 : -std::expm1(-beta * (b - a));
    return a - std::log1p(-u * span) / beta;
}

}  // namespace

double JumpSampler::sample_radius(const Piece& p, RngStream& rng) const {
    const double pw = p.law.power;
    const double beta = p.law.rate;
    const double a = p.a;
    const double b = p.b;
    if (beta == 0.0) return power_law(pw, a, b, open_uniform(rng));
    constexpr int kMaxTries = 10'000'000;
    const bool lower = b <= 1.0;
    if (lower && !(beta * (b - a) > 20.0 && a > 0.0)) {
        for (int i = 0; i < kMaxTries; ++i) {
            const double r = power_law(pw, a, b, open_uniform(rng));
            if (rng.uniform() < std::exp(-beta * (r - a))) return r;
        }
    } else if (pw <= 0.0 && a > 0.0) {
        for (int i = 0; i < kMaxTries; ++i) {
            const double r = truncated_exp(beta, a, b, rng.uniform());
            if (rng.uniform() < std::pow(r / a, pw)) return r;
        }
    } else if (pw >= 0.0 && !std::isinf(b)) {
        for (int i = 0; i < kMaxTries; ++i) {
            const double r = truncated_exp(beta, a, b, rng.uniform());
            if (rng.uniform() < std::pow(r / b, pw)) return r;
        }
    } else {
        std::gamma_distribution<double> gamma(pw + 1.0, 1.0 / beta);
        for (int i = 0; i < kMaxTries; ++i) {
            const double r = gamma(rng);
            if (r > a && r <= b) return r;
        }
    }
    throw NumericalError("radial sampler rejected too many proposals");
}

}  // namespace perturb
