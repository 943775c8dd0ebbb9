// Quick throughput check for the GEMM kernels on the matrix shapes the
// training loop actually produces.
#include <chrono>
#include <cstdio>
#include <random>

#include "nniqs/tensor.hpp"

using nniqs::Matrix;

static double bench(std::size_t m, std::size_t k, std::size_t n, int reps) {
    Matrix a(m, k), b(k, n), c(m, n);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> d(-1, 1);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = d(gen);
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = d(gen);
    nniqs::blas::gemm(a.data(), b.data(), c.data(), m, k, n); // warm
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r)
        nniqs::blas::gemm(a.data(), b.data(), c.data(), m, k, n);
    auto t1 = std::chrono::steady_clock::now();
    double sec = std::chrono::duration<double>(t1 - t0).count();
    double flops = 2.0 * m * k * n * reps;
    return flops / sec / 1e9;
}

int main() {
    struct Shape { std::size_t m, k, n; int reps; const char* tag; };
    const Shape shapes[] = {
        {36864, 68, 256, 6, "decoder L1 (r=4 batch)"},
        {36864, 256, 256, 2, "decoder hidden (r=4 batch)"},
        {9216, 256, 256, 8, "decoder hidden (r=2 batch)"},
        {576, 576, 64, 40, "encoder conv 24x24"},
        {576, 27, 64, 400, "head conv 24x24"},
        {924, 924, 924, 2, "sector-sized square"},
    };
    for (const auto& s : shapes)
        std::printf("%-28s %5zux%-4zux%-4zu  %6.2f GFLOP/s\n", s.tag, s.m, s.k, s.n,
                    bench(s.m, s.k, s.n, s.reps));
    return 0;
}
