#include "perturb/configuration.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace perturb {

PointConfiguration PointConfiguration::of(std::span<const Point> xs) {
    PointConfiguration c;
    for (const auto& x : xs) c.add(x);
    return c;
}

PointConfiguration PointConfiguration::from_counts(std::span<const int> counts) {
    PointConfiguration c;
    c.entries_.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0) throw std::invalid_argument("PointConfiguration: negative count");
        if (counts[i] > 0) {
            c.entries_.emplace_back(Point::on_atom(static_cast<std::int32_t>(i)), counts[i]);
            c.total_ += counts[i];
        }
    }
    return c;
}

void PointConfiguration::add(const Point& x, int k) {
    if (k <= 0) {
        if (k == 0) return;
        throw std::invalid_argument("PointConfiguration: multiplicity must be positive");
    }
    auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                               [](const Entry& e, const Point& p) { return point_less(e.first, p); });
    if (it != entries_.end() && it->first == x) {
        it->second += k;
    } else {
        entries_.insert(it, Entry{x, k});
    }
    total_ += k;
}

void PointConfiguration::remove(const Point& x) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                               [](const Entry& e, const Point& p) { return point_less(e.first, p); });
    if (it == entries_.end() || !(it->first == x)) throw std::invalid_argument("PointConfiguration: point not present");
    if (--it->second == 0) entries_.erase(it);
    --total_;
}

int PointConfiguration::count(const Point& x) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), x,
                               [](const Entry& e, const Point& p) { return point_less(e.first, p); });
    return (it != entries_.end() && it->first == x) ? it->second : 0;
}

int PointConfiguration::count_in(const Region& r) const {
    int n = 0;
    for (const auto& [p, k] : entries_) {
        if (r.contains(p)) n += k;
    }
    return n;
}

PointConfiguration PointConfiguration::restricted(const Region& r) const {
    PointConfiguration c;
    for (const auto& e : entries_) {
        if (r.contains(e.first)) {
            c.entries_.push_back(e);
            c.total_ += e.second;
        }
    }
    return c;
}

std::vector<Point> PointConfiguration::expanded() const {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(total_));
    for (const auto& [p, k] : entries_) out.insert(out.end(), static_cast<std::size_t>(k), p);
    return out;
}

PointConfiguration add_points(const PointConfiguration& phi, std::span<const Point> xs) {
    PointConfiguration out = phi;
    for (const auto& x : xs) out.add(x);
    return out;
}

double Functional::operator()(const PointConfiguration& phi) const {
    const double v = eval(phi);
    if (std::isnan(v)) throw NumericalError("functional '" + name + "' returned NaN");
    return v;
}

double difference_n(const Functional& f, const PointConfiguration& phi, std::span<const Point> xs, int cap) {
    const int n = static_cast<int>(xs.size());
    if (n > cap) throw std::invalid_argument("difference_n: order " + std::to_string(n) + " above cap");
    PointConfiguration cur = phi;
    // J = ∅ first; sign (−1)^n.
    double sum = (n % 2 == 0 ? 1.0 : -1.0) * f(cur);
    double comp = 0.0;
    int size = 0;
    const std::uint64_t subsets = std::uint64_t{1} << n;
    for (std::uint64_t g = 1; g < subsets; ++g) {
        // Gray code step: flip the lowest set bit position of g.
        const int bit = std::countr_zero(g);
        const std::uint64_t gray = g ^ (g >> 1);
        if (gray & (std::uint64_t{1} << bit)) {
            cur.add(xs[static_cast<std::size_t>(bit)]);
            ++size;
        } else {
            cur.remove(xs[static_cast<std::size_t>(bit)]);
            --size;
        }
        const double term = ((n - size) % 2 == 0 ? 1.0 : -1.0) * f(cur);
        // Neumaier summation keeps the result independent of cancellation.
        const double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    return sum + comp;
}

namespace {

double diff_rec(const Functional& f, const PointConfiguration& phi, std::span<const Point> xs) {
    if (xs.empty()) return f(phi);
    const auto head = xs.first(xs.size() - 1);
    PointConfiguration plus = phi;
    plus.add(xs.back());
    return diff_rec(f, plus, head) - diff_rec(f, phi, head);
}

}  // namespace

double difference_n_recursive(const Functional& f, const PointConfiguration& phi, std::span<const Point> xs,
                              int cap) {
    if (static_cast<int>(xs.size()) > cap)
        throw std::invalid_argument("difference_n_recursive: order " + std::to_string(xs.size()) + " above cap");
    return diff_rec(f, phi, xs);
}

}  // namespace perturb
