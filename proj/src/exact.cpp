#include "perturb/exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "perturb/kernels.hpp"

namespace perturb {
namespace {

// Neumaier running sum.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

double growth_of(const Functional& f) {
    if (f.bound) return 0.0;
    if (f.growth) return *f.growth;
    throw std::invalid_argument("functional '" + f.name +
                                "' has neither a sup-norm bound nor a growth degree; exact enumeration needs one");
}

}  // namespace

std::vector<double> poisson_pmf(double mean, int cap) {
    if (cap < 0) return {};
    std::vector<double> p(static_cast<std::size_t>(cap) + 1, 0.0);
    if (mean == 0.0) {
        p[0] = 1.0;
        return p;
    }
    const double lm = std::log(mean);
    for (int k = 0; k <= cap; ++k) p[static_cast<std::size_t>(k)] = std::exp(-mean + k * lm - std::lgamma(k + 1.0));
    return p;
}

int poisson_cap(double mean, double tail, double growth) {
    if (!std::isfinite(mean) || mean < 0.0) throw std::invalid_argument("poisson_cap: bad mean");
    if (mean == 0.0) return 0;
    const int hi = static_cast<int>(std::ceil(mean + 40.0 * std::sqrt(mean) + 60.0 + 4.0 * growth));
    const auto p = poisson_pmf(mean, hi);
    // Suffix sums of the growth-weighted pmf, from the far tail inwards.
    double suffix = 0.0;
    int cap = hi;
    for (int k = hi; k >= 0; --k) {
        suffix += p[static_cast<std::size_t>(k)] * std::pow(1.0 + k, growth);
        if (suffix >= tail) {
            cap = k;
            break;
        }
        cap = k - 1;
    }
    return std::max(cap, 0);
}

double enumerate_expectation(const std::function<double(std::span<const int>)>& eval, std::span<const double> means,
                             std::span<const int> caps, std::uint64_t max_states) {
    const std::size_t n = means.size();
    if (caps.size() != n) throw std::invalid_argument("enumerate_expectation: caps size mismatch");
    double states = 1.0;
    std::vector<std::vector<double>> pmf(n);
    for (std::size_t i = 0; i < n; ++i) {
        pmf[i] = poisson_pmf(means[i], caps[i]);
        states *= static_cast<double>(caps[i] + 1);
    }
    if (states > static_cast<double>(max_states))
        throw std::invalid_argument("exact enumeration needs " + std::to_string(static_cast<long long>(states)) +
                                    " states, above the configured limit");

    std::vector<int> k(n, 0);
    constexpr std::size_t kBlock = 4096;
    std::vector<double> vals;
    std::vector<double> wts;
    vals.reserve(kBlock);
    wts.reserve(kBlock);
    CompensatedSum total;
    auto flush = [&] {
        total.add(kernels::dot_compensated(vals, wts));
        vals.clear();
        wts.clear();
    };
    for (;;) {
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) w *= pmf[i][static_cast<std::size_t>(k[i])];
        const double v = eval(k);
        if (std::isnan(v)) throw NumericalError("functional returned NaN during exact enumeration");
        vals.push_back(v);
        wts.push_back(w);
        if (vals.size() == kBlock) flush();
        bool done = true;
        for (std::size_t i = n; i > 0; --i) {
            if (k[i - 1] < caps[i - 1]) {
                ++k[i - 1];
                done = false;
                break;
            }
            k[i - 1] = 0;
        }
        if (done) break;
    }
    flush();
    return total.value();
}

std::vector<int> enumeration_caps(const Functional& f, const DiscreteMeasure& m, const EnumerationPlan& plan) {
    const double p = growth_of(f);
    std::vector<int> caps(m.size(), 0);
    std::size_t active = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.mass(i) > 0.0) {
            ++active;
            caps[i] = poisson_cap(m.mass(i), plan.tail, p);
        }
    }
    if (active > plan.max_atoms)
        throw std::invalid_argument("exact enumeration supports at most " + std::to_string(plan.max_atoms) +
                                    " atoms with positive mass");
    return caps;
}

double exact_expectation(const Functional& f, const DiscreteMeasure& m, const EnumerationPlan& plan) {
    const auto caps = enumeration_caps(f, m, plan);
    return enumerate_expectation([&](std::span<const int> k) { return f(PointConfiguration::from_counts(k)); },
                                 m.masses(), caps, plan.max_states);
}

double exact_expected_difference(const Functional& f, const DiscreteMeasure& m, std::span<const Point> xs,
                                 const EnumerationPlan& plan) {
    const double p = growth_of(f);
    auto caps = enumeration_caps(f, m, plan);
    if (p > 0.0) {
        // Shifts add up to n points; tighten the tail accordingly.
        EnumerationPlan tighter = plan;
        tighter.tail = plan.tail / std::pow(1.0 + static_cast<double>(xs.size()), p);
        caps = enumeration_caps(f, m, tighter);
    }
    return enumerate_expectation(
        [&](std::span<const int> k) { return difference_n(f, PointConfiguration::from_counts(k), xs); }, m.masses(),
        caps, plan.max_states);
}

DifferenceTable::DifferenceTable(const Functional& f, const DiscreteMeasure& lambda,
                                 std::vector<std::int32_t> directions, int order, const EnumerationPlan& plan,
                                 std::uint64_t max_cells)
    : dirs_(std::move(directions)), order_(order) {
    if (order < 0) throw std::invalid_argument("DifferenceTable: negative order");
    for (std::size_t a = 0; a < dirs_.size(); ++a) {
        if (dirs_[a] < 0 || static_cast<std::size_t>(dirs_[a]) >= lambda.size())
            throw std::invalid_argument("DifferenceTable: direction is not an atom of the space");
        for (std::size_t b = 0; b < a; ++b) {
            if (dirs_[a] == dirs_[b]) throw std::invalid_argument("DifferenceTable: repeated direction atom");
        }
    }
    const double p = growth_of(f);
    EnumerationPlan tighter = plan;
    if (p > 0.0) tighter.tail = plan.tail / std::pow(1.0 + order, p);

    // Axes: directions first, then the other atoms carrying λ-mass.
    std::vector<std::int32_t> axes = dirs_;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const auto id = static_cast<std::int32_t>(i);
        if (lambda.mass(i) > 0.0 && std::find(dirs_.begin(), dirs_.end(), id) == dirs_.end()) axes.push_back(id);
    }
    if (axes.size() > plan.max_atoms)
        throw std::invalid_argument("DifferenceTable: too many atoms for exact enumeration");
    const std::size_t k = dirs_.size();
    const std::size_t naxes = axes.size();
    std::vector<int> cap(naxes);
    std::vector<std::size_t> extent(naxes);
    double cells = 1.0;
    for (std::size_t a = 0; a < naxes; ++a) {
        cap[a] = poisson_cap(lambda.mass(static_cast<std::size_t>(axes[a])), tighter.tail, p);
        extent[a] = static_cast<std::size_t>(cap[a]) + 1 + (a < k ? static_cast<std::size_t>(order) : 0);
        cells *= static_cast<double>(extent[a]);
    }
    if (cells > static_cast<double>(max_cells))
        throw std::invalid_argument("DifferenceTable: lattice of " + std::to_string(static_cast<long long>(cells)) +
                                    " cells exceeds the cost cap; lower the order");

    // G(c) = f(configuration with counts c on the axes).
    std::vector<double> grid(static_cast<std::size_t>(cells));
    {
        std::vector<int> counts(lambda.size(), 0);
        std::vector<std::size_t> c(naxes, 0);
        for (std::size_t idx = 0; idx < grid.size(); ++idx) {
            for (std::size_t a = 0; a < naxes; ++a) counts[static_cast<std::size_t>(axes[a])] = static_cast<int>(c[a]);
            grid[idx] = f(PointConfiguration::from_counts(counts));
            for (std::size_t a = naxes; a > 0; --a) {
                if (++c[a - 1] < extent[a - 1]) break;
                c[a - 1] = 0;
            }
        }
    }

    // Correlate with the pmf along each axis: out(j) = Σ_k p(k) G(k + j).
    std::vector<std::size_t> dims = extent;
    std::vector<double> line;
    for (std::size_t a = 0; a < naxes; ++a) {
        const std::size_t out_len = a < k ? static_cast<std::size_t>(order) + 1 : 1;
        const auto pmf = poisson_pmf(lambda.mass(static_cast<std::size_t>(axes[a])), cap[a]);
        std::size_t outer = 1;
        for (std::size_t b = 0; b < a; ++b) outer *= dims[b];
        std::size_t inner = 1;
        for (std::size_t b = a + 1; b < naxes; ++b) inner *= dims[b];
        const std::size_t len = dims[a];
        std::vector<double> next(outer * out_len * inner);
        line.resize(len);
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                for (std::size_t t = 0; t < len; ++t) line[t] = grid[(o * len + t) * inner + in];
                for (std::size_t j = 0; j < out_len; ++j) {
                    next[(o * out_len + j) * inner + in] =
                        kernels::dot_compensated(std::span<const double>(pmf), std::span<const double>(line).subspan(j));
                }
            }
        }
        dims[a] = out_len;
        grid.swap(next);
    }
    shifted_ = grid;

    // Forward differences at 0 along each direction axis.
    diffs_ = shifted_;
    const std::size_t n1 = static_cast<std::size_t>(order) + 1;
    std::vector<double> work(n1);
    for (std::size_t a = 0; a < k; ++a) {
        std::size_t outer = 1;
        for (std::size_t b = 0; b < a; ++b) outer *= n1;
        std::size_t inner = 1;
        for (std::size_t b = a + 1; b < k; ++b) inner *= n1;
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                for (std::size_t t = 0; t < n1; ++t) work[t] = diffs_[(o * n1 + t) * inner + in];
                for (std::size_t r = 0; r < n1; ++r) {
                    diffs_[(o * n1 + r) * inner + in] = work[0];
                    for (std::size_t t = 0; t + 1 < n1 - r; ++t) work[t] = work[t + 1] - work[t];
                }
            }
        }
    }
}

std::size_t DifferenceTable::offset(std::span<const int> m) const {
    if (m.size() != dirs_.size()) throw std::invalid_argument("DifferenceTable: index size mismatch");
    std::size_t off = 0;
    for (int v : m) {
        if (v < 0 || v > order_) throw std::out_of_range("DifferenceTable: index out of range");
        off = off * (static_cast<std::size_t>(order_) + 1) + static_cast<std::size_t>(v);
    }
    return off;
}

double DifferenceTable::at(std::span<const int> m) const { return diffs_[offset(m)]; }
double DifferenceTable::shifted(std::span<const int> j) const { return shifted_[offset(j)]; }

void DifferenceTable::for_each_of_order(int n, const std::function<void(std::span<const int>, double)>& fn) const {
    const std::size_t k = dirs_.size();
    if (k == 0) {
        if (n == 0) fn({}, diffs_[0]);
        return;
    }
    std::vector<int> m(k, 0);
    // Compositions of n into k parts bounded by order, lexicographic.
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
        if (pos + 1 == k) {
            if (left <= order_) {
                m[pos] = left;
                fn(m, diffs_[offset(m)]);
            }
            return;
        }
        for (int v = std::min(left, order_); v >= 0; --v) {
            m[pos] = v;
            rec(pos + 1, left - v);
        }
        m[pos] = 0;
    };
    rec(0, n);
}

double weighted_order_sum(const DifferenceTable& table, std::span<const double> w, int n, bool absolute) {
    const std::size_t k = table.directions().size();
    if (w.size() != k) throw std::invalid_argument("weighted_order_sum: weight size mismatch");
    if (n > table.order()) throw std::invalid_argument("weighted_order_sum: order beyond the table");
    // coef[i][r] = w_i^r / r!
    std::vector<std::vector<double>> coef(k, std::vector<double>(static_cast<std::size_t>(n) + 1));
    for (std::size_t i = 0; i < k; ++i) {
        const double wi = absolute ? std::abs(w[i]) : w[i];
        coef[i][0] = 1.0;
        for (int r = 1; r <= n; ++r) coef[i][static_cast<std::size_t>(r)] = coef[i][static_cast<std::size_t>(r) - 1] * wi / r;
    }
    CompensatedSum s;
    table.for_each_of_order(n, [&](std::span<const int> m, double d) {
        double c = absolute ? std::abs(d) : d;
        for (std::size_t i = 0; i < k; ++i) c *= coef[i][static_cast<std::size_t>(m[i])];
        s.add(c);
    });
    return s.value();
}

FockResult fock_identity_check(const Functional& f, const Functional& g, const DiscreteMeasure& m, int N,
                               const EnumerationPlan& plan) {
    Functional fg;
    fg.name = f.name + "*" + g.name;
    fg.eval = [&](const PointConfiguration& phi) { return f(phi) * g(phi); };
    if (f.bound && g.bound) {
        fg.bound = *f.bound * *g.bound;
    } else {
        fg.growth = growth_of(f) + growth_of(g);
    }
    FockResult r;
    r.lhs = exact_expectation(fg, m, plan);

    std::vector<std::int32_t> dirs;
    std::vector<double> w;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.mass(i) > 0.0) {
            dirs.push_back(static_cast<std::int32_t>(i));
            w.push_back(m.mass(i));
        }
    }
    const DifferenceTable tf(f, m, dirs, N, plan);
    const DifferenceTable tg(g, m, dirs, N, plan);
    const std::size_t k = dirs.size();
    CompensatedSum total;
    for (int n = 0; n <= N; ++n) {
        CompensatedSum term;
        tf.for_each_of_order(n, [&](std::span<const int> mi, double df) {
            double c = df * tg.at(mi);
            for (std::size_t i = 0; i < k; ++i) {
                for (int r = 1; r <= mi[i]; ++r) c *= w[i] / r;
            }
            term.add(c);
        });
        r.terms.push_back(term.value());
        total.add(term.value());
    }
    r.rhs_partial = total.value();
    r.gap = std::abs(r.lhs - r.rhs_partial);
    return r;
}

}  // namespace perturb
