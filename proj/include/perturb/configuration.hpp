#pragma once

// Point configurations (finite multisets of ground-space points), functionals
// on them, and the iterated difference operators.

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "perturb/space.hpp"

namespace perturb {

/// Raised when a functional or density produces NaN inside an estimator.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PointConfiguration {
public:
    using Entry = std::pair<Point, int>;

    PointConfiguration() = default;
    static PointConfiguration of(std::span<const Point> xs);
    static PointConfiguration of(std::initializer_list<Point> xs) {
        return of(std::span<const Point>(xs.begin(), xs.size()));
    }
    /// counts[i] copies of atom i.
    static PointConfiguration from_counts(std::span<const int> counts);

    void add(const Point& x, int k = 1);
    /// Removes one copy; throws std::invalid_argument if x is absent.
    void remove(const Point& x);

    int count(const Point& x) const;
    int count_atom(std::int32_t id) const { return count(Point::on_atom(id)); }
    int count_in(const Region& r) const;
    int size() const { return total_; }
    bool empty() const { return total_ == 0; }

    PointConfiguration restricted(const Region& r) const;
    /// Every point repeated by its multiplicity, in sorted order.
    std::vector<Point> expanded() const;
    const std::vector<Entry>& entries() const { return entries_; }

    friend bool operator==(const PointConfiguration& a, const PointConfiguration& b) {
        return a.total_ == b.total_ && a.entries_ == b.entries_;
    }

private:
    std::vector<Entry> entries_;  // sorted by PointLess, multiplicities >= 1
    int total_ = 0;
};

/// φ + Σ δ_x over xs.
PointConfiguration add_points(const PointConfiguration& phi, std::span<const Point> xs);
inline PointConfiguration add_points(const PointConfiguration& phi, std::initializer_list<Point> xs) {
    return add_points(phi, std::span<const Point>(xs.begin(), xs.size()));
}

/// A real functional of a configuration.  `window`, when set, promises that
/// points outside it are ignored.  `bound` is a sup-norm bound; `growth`
/// declares |f(φ)| ≤ growth_scale (1 + |φ|)^growth for unbounded functionals.
struct Functional {
    std::string name;
    std::function<double(const PointConfiguration&)> eval;
    std::optional<Region> window;
    std::optional<double> bound;
    std::optional<double> growth;
    double growth_scale = 1.0;
    /// Declared increasing (closed under adding points); used by the pivotal
    /// estimator.
    bool increasing = false;

    /// Evaluates and throws NumericalError on NaN.
    double operator()(const PointConfiguration& phi) const;
    bool has_size_control() const { return bound.has_value() || growth.has_value(); }
};

/// Σ_{J ⊆ {1..n}} (−1)^{n−|J|} f(φ + Σ_{j∈J} δ_{x_j}), walking J in Gray-code
/// order.  Throws std::invalid_argument when n exceeds `cap`.
double difference_n(const Functional& f, const PointConfiguration& phi, std::span<const Point> xs, int cap = 20);

/// D^n = D_{x_n} D^{n−1}_{x_1..x_{n−1}} by recursion; used to cross-check
/// difference_n.
double difference_n_recursive(const Functional& f, const PointConfiguration& phi, std::span<const Point> xs,
                              int cap = 20);

}  // namespace perturb
