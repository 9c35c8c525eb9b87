#pragma once

// Hand-rolled generators for the property tests.  Draws come from RngStream
// so every case is reproducible from its index.

#include <cstdint>
#include <string>
#include <vector>

#include "perturb/measure.hpp"
#include "perturb/rng.hpp"
#include "perturb/space.hpp"

namespace gen {

struct Gen {
    perturb::RngStream rng;
    explicit Gen(std::uint64_t case_index) : rng(0xC0FFEE, case_index) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(rng.uniform() * (hi - lo + 1)); }
    bool coin(double p = 0.5) { return rng.uniform() < p; }

    std::vector<double> doubles(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }
    /// Masses in [0, hi], each zero with probability p_zero.
    std::vector<double> masses(std::size_t n, double hi, double p_zero = 0.0) {
        std::vector<double> v(n);
        for (auto& x : v) x = coin(p_zero) ? 0.0 : uniform(0.0, hi);
        return v;
    }
};

inline perturb::SpacePtr atoms(int k) {
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i) names.push_back("x" + std::to_string(i));
    return perturb::GroundSpace::discrete(names);
}

}  // namespace gen
