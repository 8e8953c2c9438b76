#include "silt/parallel.hpp"

#include <cstdlib>
#include <string>

namespace silt::parallel {

std::size_t worker_count() {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SILT_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap > 0) return static_cast<std::size_t>(cap);
        } catch (const std::exception&) {
            // Unparseable values fall back to the core count.
        }
    }
    return hw;
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace silt::parallel
