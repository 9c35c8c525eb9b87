#pragma once

// Stock functionals of point configurations and the id registry used by
// experiment configs.

#include <string>
#include <vector>

#include "perturb/configuration.hpp"

namespace perturb::functionals {

Functional constant(double c);
/// 1{φ(B) = 0}.
Functional void_indicator(const Region& b);
/// φ(B).
Functional count(const Region& b);
/// φ(B)².
Functional count_squared(const Region& b);
/// 1{φ(B) ≥ k}; declared increasing.
Functional at_least(const Region& b, int k);
/// exp(−a φ(B)), bounded by 1.
Functional exp_count(const Region& b, double a);
/// min(φ(B), c).
Functional capped_count(const Region& b, int c);

/// Registry ids: void, count, count_sq, at_least_<k>, exp_<a>, capped_<c>,
/// const_<c>.  Throws std::invalid_argument for unknown ids.
Functional by_id(const std::string& id, const Region& b);
std::vector<std::string> registry_ids();

}  // namespace perturb::functionals
