#include "perturb/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace perturb {

void RunningStats::merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double d = o.mean_ - mean_;
    mean_ += d * nb / n;
    m2_ += o.m2_ + d * d * na * nb / n;
    n_ += o.n_;
}

Estimate RunningStats::estimate() const {
    Estimate e;
    e.mean = mean_;
    e.n = n_;
    e.se = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    return e;
}

std::uint64_t chunk_stream(std::uint64_t tag, std::uint64_t chunk) {
    return mix64(mix64(tag) ^ (chunk * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull));
}

std::uint64_t tag_of(const std::string& label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace detail {

void run_indexed(std::uint64_t count, unsigned workers, const std::function<void(std::uint64_t)>& job) {
    const unsigned nthreads =
        static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), std::max<std::uint64_t>(1, count)));
    if (nthreads <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

Estimate mc_mean(const McPlan& plan, std::uint64_t tag, const std::function<double(RngStream&)>& sample) {
    auto parts = run_chunks<RunningStats>(
        plan, tag, [&](RngStream& rng, std::uint64_t begin, std::uint64_t end, std::uint64_t) {
            RunningStats s;
            for (std::uint64_t i = begin; i < end; ++i) s.add(sample(rng));
            return s;
        });
    return pooled_estimate(parts);
}

Estimate pooled_estimate(const std::vector<RunningStats>& parts) {
    RunningStats total;
    for (const auto& p : parts) total.merge(p);
    return total.estimate();
}

}  // namespace perturb
