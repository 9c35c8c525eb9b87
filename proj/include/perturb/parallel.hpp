#pragma once

// Deterministic chunked Monte Carlo driver.  Work is cut into fixed-size
// chunks; chunk c draws from RngStream(seed, stream(tag, c)) and partial
// results are reduced in chunk order, so estimates are bit-identical for any
// worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "perturb/rng.hpp"

namespace perturb {

/// Exact enumeration (discrete regime) or Monte Carlo.
enum class EvalMode { exact, mc };

struct McPlan {
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::uint64_t chunk = 1024;
};

/// Mean with standard error.
struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::uint64_t n = 0;

    double sigma() const { return se; }
};

/// Welford accumulator with Chan's pairwise merge.
class RunningStats {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    void merge(const RunningStats& o);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    Estimate estimate() const;

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Stream id for chunk `chunk` of the computation labelled `tag`.
std::uint64_t chunk_stream(std::uint64_t tag, std::uint64_t chunk);

/// Stable 64-bit tag from a label (FNV-1a).
std::uint64_t tag_of(const std::string& label);

/// Runs `body(rng, begin, end, chunk_index)` for every chunk of
/// [0, plan.samples), on up to plan.workers threads.  Returns the per-chunk
/// results in chunk order.
template <class R>
std::vector<R> run_chunks(const McPlan& plan, std::uint64_t tag,
                          const std::function<R(RngStream&, std::uint64_t, std::uint64_t, std::uint64_t)>& body);

/// Runs one-sample bodies and merges sample statistics in chunk order.
Estimate mc_mean(const McPlan& plan, std::uint64_t tag,
                 const std::function<double(RngStream&)>& sample);

/// Merges per-chunk statistics of i.i.d. samples in order.
Estimate pooled_estimate(const std::vector<RunningStats>& parts);

/// Combined standard error of a difference of independent estimates.
inline double combined_sigma(const Estimate& a, const Estimate& b) {
    return std::sqrt(a.se * a.se + b.se * b.se);
}

namespace detail {
void run_indexed(std::uint64_t count, unsigned workers, const std::function<void(std::uint64_t)>& job);
}

template <class R>
std::vector<R> run_chunks(const McPlan& plan, std::uint64_t tag,
                          const std::function<R(RngStream&, std::uint64_t, std::uint64_t, std::uint64_t)>& body) {
    const std::uint64_t chunk = plan.chunk == 0 ? 1 : plan.chunk;
    const std::uint64_t nchunks = (plan.samples + chunk - 1) / chunk;
    std::vector<R> out(nchunks);
    detail::run_indexed(nchunks, plan.workers, [&](std::uint64_t c) {
        RngStream rng(plan.seed, chunk_stream(tag, c));
        const std::uint64_t begin = c * chunk;
        const std::uint64_t end = std::min<std::uint64_t>(plan.samples, begin + chunk);
        out[c] = body(rng, begin, end, c);
    });
    return out;
}

}  // namespace perturb
