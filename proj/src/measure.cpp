#include "perturb/measure.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "perturb/kernels.hpp"

namespace perturb {

DiscreteMeasure::DiscreteMeasure(SpacePtr space, std::vector<double> masses)
    : space_(std::move(space)), masses_(std::move(masses)) {
    if (!space_ || !space_->is_discrete()) throw std::invalid_argument("DiscreteMeasure: needs a discrete space");
    if (masses_.size() != space_->atom_count()) throw std::invalid_argument("DiscreteMeasure: mass count mismatch");
    for (double m : masses_) {
        if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("DiscreteMeasure: masses must be finite and >= 0");
    }
}

DiscreteMeasure DiscreteMeasure::zero(SpacePtr space) {
    const std::size_t n = space->atom_count();
    return DiscreteMeasure(std::move(space), std::vector<double>(n, 0.0));
}

DiscreteMeasure DiscreteMeasure::from_pairs(SpacePtr space, const AtomMasses& pairs) {
    std::vector<double> m(space->atom_count(), 0.0);
    for (const auto& [name, mass] : pairs) m[space->atom_index(name)] += mass;
    return DiscreteMeasure(std::move(space), std::move(m));
}

std::vector<DiscreteMeasure> DiscreteMeasure::on_common_space(const std::vector<AtomMasses>& specs) {
    std::vector<std::string> names;
    for (const auto& s : specs) {
        for (const auto& [name, mass] : s) {
            if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
        }
    }
    auto space = GroundSpace::discrete(names);
    std::vector<DiscreteMeasure> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(from_pairs(space, s));
    return out;
}

AtomMasses DiscreteMeasure::parse_pairs(const std::string& text) {
    AtomMasses out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string name;
        if (!(ls >> name)) continue;
        double mass = 0.0;
        std::string extra;
        if (!(ls >> mass) || (ls >> extra))
            throw std::invalid_argument("measure text line " + std::to_string(lineno) + ": expected `atom-id mass`");
        out.emplace_back(name, mass);
    }
    return out;
}

std::string DiscreteMeasure::to_text() const {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < masses_.size(); ++i) os << space_->atom_name(i) << ' ' << masses_[i] << '\n';
    return os.str();
}

double DiscreteMeasure::total() const { return kernels::sum_compensated(masses_); }

double DiscreteMeasure::total(const Region& window) const {
    double s = 0.0;
    for (std::size_t i = 0; i < masses_.size(); ++i) {
        if (window.contains(Point::on_atom(static_cast<std::int32_t>(i)))) s += masses_[i];
    }
    return s;
}

DiscreteMeasure DiscreteMeasure::plus(const DiscreteMeasure& o) const {
    require_same_space(*this, o);
    std::vector<double> m(masses_);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += o.masses_[i];
    return DiscreteMeasure(space_, std::move(m));
}

DiscreteMeasure DiscreteMeasure::scaled(double c) const {
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("DiscreteMeasure: scale must be finite and >= 0");
    std::vector<double> m(masses_);
    for (double& v : m) v *= c;
    return DiscreteMeasure(space_, std::move(m));
}

DiscreteMeasure DiscreteMeasure::minus(const DiscreteMeasure& o) const {
    require_same_space(*this, o);
    std::vector<double> m(masses_);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] -= o.masses_[i];
        if (m[i] < 0.0) throw std::domain_error("DiscreteMeasure: difference is not a measure");
    }
    return DiscreteMeasure(space_, std::move(m));
}

DiscreteMeasure DiscreteMeasure::restricted(const Region& window) const {
    std::vector<double> m(masses_);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!window.contains(Point::on_atom(static_cast<std::int32_t>(i)))) m[i] = 0.0;
    }
    return DiscreteMeasure(space_, std::move(m));
}

bool DiscreteMeasure::same_space(const DiscreteMeasure& o) const {
    return space_ == o.space_ || space_->same_as(*o.space_);
}

bool DiscreteMeasure::operator==(const DiscreteMeasure& o) const {
    return same_space(o) && masses_ == o.masses_;
}

void require_same_space(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (!a.same_space(b)) throw std::invalid_argument("measures live on different ground spaces");
}

std::vector<double> discrete_density(const DiscreteMeasure& num, const DiscreteMeasure& den) {
    require_same_space(num, den);
    std::vector<double> h(num.size(), 0.0);
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (den.mass(i) > 0.0) {
            h[i] = num.mass(i) / den.mass(i);
        } else if (num.mass(i) > 0.0) {
            h[i] = std::numeric_limits<double>::infinity();
        }
    }
    return h;
}

std::shared_ptr<const ReferenceMeasure> ReferenceMeasure::lebesgue(SpacePtr box_space, double scale) {
    if (!box_space || box_space->is_discrete()) throw std::invalid_argument("lebesgue reference needs a box space");
    auto r = std::make_shared<ReferenceMeasure>();
    r->space = box_space;
    r->window = Region::box(box_space->lower(), box_space->upper());
    r->mass = scale * box_space->volume();
    r->sample = [s = box_space](RngStream& rng) {
        Point p;
        p.dim = static_cast<std::uint8_t>(s->dimension());
        for (std::size_t i = 0; i < s->dimension(); ++i)
            p.x[i] = s->lower()[i] + (s->upper()[i] - s->lower()[i]) * rng.uniform();
        return p;
    };
    return r;
}

std::shared_ptr<const ReferenceMeasure> ReferenceMeasure::discrete(const DiscreteMeasure& m) {
    auto r = std::make_shared<ReferenceMeasure>();
    r->space = m.space();
    r->window = Region::all();
    r->mass = m.total();
    std::vector<double> cdf(m.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        acc += m.mass(i);
        cdf[i] = acc;
    }
    r->sample = [cdf, total = acc](RngStream& rng) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cdf.begin());
        if (i >= cdf.size()) i = cdf.size() - 1;
        return Point::on_atom(static_cast<std::int32_t>(i));
    };
    return r;
}

double DensityMeasure::at(const Point& x) const {
    const double v = density(x);
    if (!std::isfinite(v) || v < 0.0) throw std::domain_error("density is not a finite nonnegative number");
    return v;
}

Estimate DensityMeasure::total_mass(const McPlan& plan) const {
    Estimate e = mc_mean(plan, tag_of("density-total-mass"), [&](RngStream& rng) { return at(reference->sample(rng)); });
    e.mean *= reference->mass;
    e.se *= reference->mass;
    return e;
}

SignedPerturbation SignedPerturbation::between(const DiscreteMeasure& lambda, const DiscreteMeasure& nu) {
    return against(lambda, nu, lambda.plus(nu));
}

SignedPerturbation SignedPerturbation::against(const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                                               const DiscreteMeasure& rho) {
    require_same_space(lambda, nu);
    require_same_space(lambda, rho);
    auto hl = discrete_density(lambda, rho);
    auto hn = discrete_density(nu, rho);
    for (std::size_t i = 0; i < hl.size(); ++i) {
        if (std::isinf(hl[i]) || std::isinf(hn[i]))
            throw std::invalid_argument("reference measure does not dominate both measures");
    }
    return SignedPerturbation{rho, std::move(hl), std::move(hn)};
}

std::vector<double> SignedPerturbation::signed_masses() const {
    std::vector<double> s(h_low.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = (h_high[i] - h_low[i]) * rho.mass(i);
    return s;
}

double signed_power_integral(const std::function<double(std::span<const std::int32_t>)>& g,
                             const SignedPerturbation& p, int n) {
    if (n <= 0) throw std::invalid_argument("signed_power_integral: order must be positive");
    const auto s = p.signed_masses();
    // Only atoms carrying signed mass contribute.
    std::vector<std::int32_t> support;
    std::vector<double> weight;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != 0.0) {
            support.push_back(static_cast<std::int32_t>(i));
            weight.push_back(s[i]);
        }
    }
    if (support.empty()) return 0.0;
    const double terms = std::pow(static_cast<double>(support.size()), n);
    if (terms > 5e7) throw std::invalid_argument("signed_power_integral: too many atom tuples");

    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    std::vector<std::int32_t> tuple(static_cast<std::size_t>(n), support[0]);
    std::vector<double> vals;
    std::vector<double> ws;
    for (;;) {
        double w = 1.0;
        for (int k = 0; k < n; ++k) w *= weight[idx[k]];
        vals.push_back(g(tuple));
        ws.push_back(w);
        int k = n - 1;
        while (k >= 0) {
            if (++idx[k] < support.size()) {
                tuple[k] = support[idx[k]];
                break;
            }
            idx[k] = 0;
            tuple[k] = support[0];
            --k;
        }
        if (k < 0) break;
    }
    return kernels::dot_compensated(vals, ws);
}

Estimate signed_power_integral_mc(const std::function<double(std::span<const Point>)>& g,
                                  const DensityMeasure& lambda, const DensityMeasure& nu, int n,
                                  const McPlan& plan) {
    if (n <= 0) throw std::invalid_argument("signed_power_integral: order must be positive");
    if (lambda.reference != nu.reference) throw std::invalid_argument("signed_power_integral: references differ");
    const auto& ref = *lambda.reference;
    const double scale = std::pow(ref.mass, n);
    return mc_mean(plan, tag_of("signed-power-mc") + static_cast<std::uint64_t>(n), [&](RngStream& rng) {
        std::vector<Point> xs(static_cast<std::size_t>(n));
        double w = scale;
        for (auto& x : xs) {
            x = ref.sample(rng);
            w *= nu.at(x) - lambda.at(x);
        }
        return w == 0.0 ? 0.0 : w * g(xs);
    });
}

double hellinger_measures(const DiscreteMeasure& lambda, const DiscreteMeasure& nu) {
    return hellinger_measures(lambda, nu, lambda.plus(nu));
}

double hellinger_measures(const DiscreteMeasure& lambda, const DiscreteMeasure& nu, const DiscreteMeasure& rho) {
    const auto p = SignedPerturbation::against(lambda, nu, rho);
    return 0.5 * kernels::active().sqrt_gap_sum(p.rho.masses().data(), p.h_low.data(), p.h_high.data(),
                                                p.h_low.size());
}

Estimate hellinger_measures(const DensityMeasure& lambda, const DensityMeasure& nu, const McPlan& plan) {
    if (lambda.reference != nu.reference) throw std::invalid_argument("hellinger_measures: references differ");
    const double m = lambda.reference->mass;
    Estimate e = mc_mean(plan, tag_of("hellinger-mc"), [&](RngStream& rng) {
        const Point x = lambda.reference->sample(rng);
        const double d = std::sqrt(lambda.at(x)) - std::sqrt(nu.at(x));
        return 0.5 * d * d;
    });
    e.mean *= m;
    e.se *= m;
    return e;
}

double hellinger_by_decomposition(const DiscreteMeasure& lambda, const DiscreteMeasure& nu) {
    const auto parts = lebesgue_decompose(nu, lambda);
    const auto d = discrete_density(parts.absolutely_continuous, lambda);
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double g = 1.0 - std::sqrt(d[i]);
        s += g * g * lambda.mass(i);
    }
    // Same normalization as the density form (factor ½).
    return 0.5 * (s + parts.singular.total());
}

double hellinger_poisson_from(double h_measures) {
    if (std::isinf(h_measures)) return 1.0;
    return -std::expm1(-h_measures);
}

double hellinger_poisson(const DiscreteMeasure& lambda, const DiscreteMeasure& nu) {
    return hellinger_poisson_from(hellinger_measures(lambda, nu));
}

LebesgueParts lebesgue_decompose(const DiscreteMeasure& nu, const DiscreteMeasure& lambda) {
    require_same_space(nu, lambda);
    std::vector<double> ac(nu.size(), 0.0);
    std::vector<double> sing(nu.size(), 0.0);
    for (std::size_t i = 0; i < nu.size(); ++i) {
        (lambda.mass(i) > 0.0 ? ac : sing)[i] = nu.mass(i);
    }
    return LebesgueParts{DiscreteMeasure(nu.space(), std::move(ac)), DiscreteMeasure(nu.space(), std::move(sing))};
}

namespace {

double capped(double v, double cap, bool& flag) {
    if (!(v < cap)) {
        flag = true;
        return cap;
    }
    return v;
}

double square_gap(const std::vector<double>& h, const DiscreteMeasure& rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (rho.mass(i) == 0.0) {
            if (std::isinf(h[i])) return std::numeric_limits<double>::infinity();
            continue;
        }
        const double d = 1.0 - h[i];
        s += d * d * rho.mass(i);
    }
    return s;
}

}  // namespace

AdmissibilityReport admissibility_check(const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                                        const DiscreteMeasure& rho, double cap) {
    require_same_space(lambda, nu);
    require_same_space(lambda, rho);
    AdmissibilityReport r;
    r.cap = cap;
    r.l2_gap_low = capped(square_gap(discrete_density(lambda, rho), rho), cap, r.l2_gap_low_capped);
    r.l2_gap_high = capped(square_gap(discrete_density(nu, rho), rho), cap, r.l2_gap_high_capped);
    r.hellinger = capped(hellinger_measures(lambda, nu), cap, r.hellinger_capped);
    r.hellinger_poisson = r.hellinger_capped ? 1.0 : hellinger_poisson_from(r.hellinger);
    r.verdict_l2 = !r.l2_gap_low_capped && !r.l2_gap_high_capped;

    bool nec_capped = false;
    r.necessary_sum =
        capped(2.0 * (hellinger_by_decomposition(lambda, nu) + hellinger_by_decomposition(nu, lambda)), cap, nec_capped);
    r.verdict_necessary = !nec_capped;

    r.increasing = true;
    r.decreasing = true;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (nu.mass(i) < lambda.mass(i)) r.increasing = false;
        if (nu.mass(i) > lambda.mass(i)) r.decreasing = false;
    }
    if (r.increasing) {
        const auto mu = nu.minus(lambda);
        const auto h = discrete_density(lambda, nu);
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (nu.mass(i) == 0.0) continue;
            const double d = 1.0 - h[i];
            r.monotone_square_gap += d * d * nu.mass(i);
            r.monotone_linear_gap += d * mu.mass(i);
        }
        bool f1 = false;
        bool f2 = false;
        r.monotone_square_gap = capped(r.monotone_square_gap, cap, f1);
        r.monotone_linear_gap = capped(r.monotone_linear_gap, cap, f2);
        r.verdict_monotone = !f1;
    }
    if (r.decreasing) {
        const auto mu = lambda.minus(nu);
        const auto hm = discrete_density(mu, lambda);
        double s = 0.0;
        for (std::size_t i = 0; i < hm.size(); ++i) {
            if (lambda.mass(i) > 0.0) s += hm[i] * hm[i] * lambda.mass(i);
        }
        bool f = false;
        r.thinning_square = capped(s, cap, f);
        r.verdict_monotone = r.verdict_monotone || !f;
    }
    return r;
}

AdmissibilityReport admissibility_check(const DiscreteMeasure& lambda, const DiscreteMeasure& nu, double cap) {
    return admissibility_check(lambda, nu, lambda.plus(nu), cap);
}

}  // namespace perturb
