#include "perturb/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace perturb::functionals {
namespace {

Functional make(std::string name, std::function<double(const PointConfiguration&)> eval) {
    Functional f;
    f.name = std::move(name);
    f.eval = std::move(eval);
    return f;
}

double parse_suffix(const std::string& id, const std::string& prefix) {
    const std::string rest = id.substr(prefix.size());
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(rest, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (rest.empty() || used != rest.size()) throw std::invalid_argument("bad functional parameter in '" + id + "'");
    return v;
}

}  // namespace

Functional constant(double c) {
    Functional f = make("const", [c](const PointConfiguration&) { return c; });
    f.bound = std::abs(c);
    f.window = Region::atoms({});
    f.increasing = true;
    return f;
}

Functional void_indicator(const Region& b) {
    Functional f = make("void", [b](const PointConfiguration& phi) { return phi.count_in(b) == 0 ? 1.0 : 0.0; });
    f.window = b;
    f.bound = 1.0;
    return f;
}

Functional count(const Region& b) {
    Functional f = make("count", [b](const PointConfiguration& phi) { return static_cast<double>(phi.count_in(b)); });
    f.window = b;
    f.growth = 1.0;
    f.increasing = true;
    return f;
}

Functional count_squared(const Region& b) {
    Functional f = make("count_sq", [b](const PointConfiguration& phi) {
        const double n = phi.count_in(b);
        return n * n;
    });
    f.window = b;
    f.growth = 2.0;
    f.increasing = true;
    return f;
}

Functional at_least(const Region& b, int k) {
    Functional f = make("at_least_" + std::to_string(k),
                        [b, k](const PointConfiguration& phi) { return phi.count_in(b) >= k ? 1.0 : 0.0; });
    f.window = b;
    f.bound = 1.0;
    f.increasing = true;
    return f;
}

Functional exp_count(const Region& b, double a) {
    if (a < 0.0) throw std::invalid_argument("exp_count needs a >= 0");
    Functional f = make("exp", [b, a](const PointConfiguration& phi) { return std::exp(-a * phi.count_in(b)); });
    f.window = b;
    f.bound = 1.0;
    return f;
}

Functional capped_count(const Region& b, int c) {
    Functional f = make("capped_" + std::to_string(c), [b, c](const PointConfiguration& phi) {
        return static_cast<double>(std::min(phi.count_in(b), c));
    });
    f.window = b;
    f.bound = static_cast<double>(std::max(c, 0));
    f.increasing = true;
    return f;
}

Functional by_id(const std::string& id, const Region& b) {
    if (id == "void") return void_indicator(b);
    if (id == "count") return count(b);
    if (id == "count_sq") return count_squared(b);
    if (id.rfind("at_least_", 0) == 0) return at_least(b, static_cast<int>(parse_suffix(id, "at_least_")));
    if (id.rfind("exp_", 0) == 0) return exp_count(b, parse_suffix(id, "exp_"));
    if (id.rfind("capped_", 0) == 0) return capped_count(b, static_cast<int>(parse_suffix(id, "capped_")));
    if (id.rfind("const_", 0) == 0) return constant(parse_suffix(id, "const_"));
    throw std::invalid_argument("unknown functional id '" + id + "'");
}

std::vector<std::string> registry_ids() {
    return {"void", "count", "count_sq", "at_least_<k>", "exp_<a>", "capped_<c>", "const_<c>"};
}

}  // namespace perturb::functionals
