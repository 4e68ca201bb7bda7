// Times the serial reference kernels against the OpenMP ones on random similarity matrices.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>

#include "iap/ap_core.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

iap::SimilarityMatrix random_matrix(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<iap::FeatureVector> xs(n, iap::FeatureVector(8));
    for (auto& x : xs)
        for (double& v : x) v = u(rng);
    return iap::build_similarity_matrix(xs);
}

template <typename Resp, typename Avail>
double time_iterations(const iap::SimilarityMatrix& s, int iterations, Resp resp, Avail avail) {
    iap::MessageState m(s.size());
    const auto start = std::chrono::steady_clock::now();
    for (int it = 0; it < iterations; ++it) {
        resp(s, m, 0.9);
        avail(m, 0.9);
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    const int iterations = argc > 1 ? std::atoi(argv[1]) : 20;
#ifdef _OPENMP
    std::cout << "threads: " << omp_get_max_threads() << '\n';
#else
    std::cout << "threads: 1 (built without OpenMP)\n";
#endif
    std::cout << "n       serial(s)  parallel(s)  speedup\n";
    for (std::size_t n : {250, 500, 1000, 2000}) {
        const auto s = random_matrix(n, n);
        const double ts = time_iterations(s, iterations, iap::kernels::serial::update_responsibilities,
                                          iap::kernels::serial::update_availabilities);
        const double tp = time_iterations(s, iterations, iap::kernels::parallel::update_responsibilities,
                                          iap::kernels::parallel::update_availabilities);
        std::cout << n << "\t" << ts << "\t" << tp << "\t" << ts / tp << '\n';
    }
    return 0;
}
