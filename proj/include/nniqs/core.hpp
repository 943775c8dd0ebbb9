// Common error types, version tag and deterministic RNG helpers shared by
// every module of the library.
#ifndef NNIQS_CORE_HPP
#define NNIQS_CORE_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nniqs {

inline constexpr const char* kGeneratorVersion = "nniqs-0.1.0";

// Violated precondition or domain invariant (bad parameter, shape mismatch, ...).
class invariant_error : public std::invalid_argument {
public:
    explicit invariant_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// File/format failures (missing file, bad magic, truncated payload, ...).
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (eigensolver non-convergence, non-finite loss, ...).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace rng {

// splitmix64 step; used to derive independent streams from (master seed, tag).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic sub-stream seed: mixes the master seed with one or two indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    std::uint64_t x = splitmix64(s);
    s ^= a * 0xff51afd7ed558ccdULL;
    x ^= splitmix64(s);
    s ^= b * 0xc4ceb9fe1a85ec53ULL;
    x ^= splitmix64(s);
    return x;
}

class Stream {
public:
    explicit Stream(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, n). Unbiased rejection sampling on the raw 64-bit output
    // so the result only depends on the mt19937_64 sequence.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw invariant_error("uniform_index: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    double uniform_real(double lo, double hi) {
        // 53-bit mantissa resolution in [0,1)
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    // k distinct indices from [0, n), sorted ascending (partial Fisher-Yates).
    std::vector<std::size_t> sample_distinct_sorted(std::size_t n, std::size_t k) {
        if (k > n) throw invariant_error("sample_distinct_sorted: k > n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + uniform_index(n - i);
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::size_t> out(pool.begin(), pool.begin() + k);
        std::sort(out.begin(), out.end());
        return out;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    std::mt19937_64& generator() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace rng

// fn(i) for i in [0, n), fanned over up to n_threads workers via an atomic
// ticket. Tasks must be independent; any ordering requirements belong to the
// caller's reduction step.
template <typename F>
void parallel_for(std::size_t n, std::size_t n_threads, F&& fn) {
    if (n == 0) return;
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n); // stop handing out work
        }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(n_threads, n);
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace nniqs

#endif
