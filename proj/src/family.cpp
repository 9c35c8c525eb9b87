#include "perturb/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace perturb {

PerturbationFamily PerturbationFamily::linear(DiscreteMeasure rho, std::vector<double> h_base,
                                              std::vector<double> direction, double theta0, double lo, double hi) {
    if (h_base.size() != rho.size() || direction.size() != rho.size())
        throw std::invalid_argument("PerturbationFamily: density size mismatch");
    if (!(lo <= theta0 && theta0 <= hi)) throw std::invalid_argument("PerturbationFamily: θ0 outside the interval");
    PerturbationFamily f{std::move(rho), std::move(h_base), std::move(direction), {}, {}, theta0, lo, hi};
    f.envelope.assign(f.rho.size(), 0.0);
    return f;
}

PerturbationFamily PerturbationFamily::scaled(const DiscreteMeasure& lambda, double theta0, double hi) {
    if (theta0 < 0.0) throw std::invalid_argument("scaled family needs θ0 >= 0");
    return linear(lambda, std::vector<double>(lambda.size(), theta0), std::vector<double>(lambda.size(), 1.0), theta0,
                  0.0, hi);
}

double PerturbationFamily::remainder_at(double theta, std::int32_t atom) const {
    if (!remainder || theta == theta0) return 0.0;
    return remainder(theta, atom);
}

double PerturbationFamily::density_at(double theta, std::int32_t atom) const {
    const auto i = static_cast<std::size_t>(atom);
    return h_base[i] + (theta - theta0) * (direction[i] + remainder_at(theta, atom));
}

DiscreteMeasure PerturbationFamily::measure_at(double theta) const {
    if (!contains(theta)) throw std::domain_error("θ outside the family's interval");
    std::vector<double> m(rho.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        double d = density_at(theta, static_cast<std::int32_t>(i));
        // Tolerate rounding noise at the interval's edge.
        if (d < 0.0 && d > -1e-14) d = 0.0;
        if (d < 0.0) throw std::domain_error("perturbed density is negative");
        m[i] = d * rho.mass(i);
    }
    return DiscreteMeasure(rho.space(), std::move(m));
}

std::vector<double> PerturbationFamily::direction_masses() const {
    std::vector<double> s(rho.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = direction[i] * rho.mass(i);
    return s;
}

std::string PerturbationFamily::check(int grid) const {
    std::ostringstream err;
    double env2 = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) env2 += envelope[i] * envelope[i] * rho.mass(i);
    if (!std::isfinite(env2)) err << "envelope is not square-integrable; ";
    const double finite_hi = std::isfinite(hi) ? hi : theta0 + 1.0;
    for (int g = 0; g <= grid; ++g) {
        const double theta = lo + (finite_hi - lo) * g / grid;
        for (std::size_t i = 0; i < rho.size(); ++i) {
            if (rho.mass(i) == 0.0) continue;
            const auto a = static_cast<std::int32_t>(i);
            if (density_at(theta, a) < -1e-14) {
                err << "negative density at θ=" << theta << " atom " << i << "; ";
                return err.str();
            }
            if (remainder && std::abs(remainder_at(theta, a)) > envelope[i] * (1.0 + 1e-12) + 1e-300) {
                err << "remainder exceeds envelope at θ=" << theta << " atom " << i << "; ";
                return err.str();
            }
        }
    }
    if (remainder) {
        const double span = std::min(theta0 - lo, finite_hi - theta0);
        for (std::size_t i = 0; i < rho.size(); ++i) {
            const auto a = static_cast<std::int32_t>(i);
            const double step = (span > 0 ? span : 1.0) * 1e-6;
            const double theta = theta0 + (theta0 + step <= finite_hi ? step : -step);
            if (std::abs(remainder_at(theta, a)) > 1e-4 * (1.0 + envelope[i])) {
                err << "remainder does not vanish at θ0 on atom " << i << "; ";
                break;
            }
        }
    }
    return err.str();
}

}  // namespace perturb
