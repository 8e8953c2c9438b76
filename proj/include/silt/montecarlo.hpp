#pragma once

// Brownian path sampling and Monte Carlo estimators of regularized
// self-intersection local times.

#include "silt/core.hpp"
#include "silt/expectations.hpp"
#include "silt/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace silt {

/// B sampled at t_i = i dt, i = 0..M. Stored coordinate-major: the M + 1
/// values of coordinate k are contiguous.
struct BrownianPath {
    int d = 1;
    int steps = 0;  // M
    double dt = 0.0;
    std::vector<double> values;

    double T() const { return steps * dt; }
    double at(int i, int k) const {
        return values[static_cast<std::size_t>(k) * static_cast<std::size_t>(steps + 1) + static_cast<std::size_t>(i)];
    }
    std::span<const double> coordinate(int k) const {
        return {values.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(steps + 1),
                static_cast<std::size_t>(steps + 1)};
    }
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

/// Sample moments of per-path values, with deterministic summation order.
struct SampleSummary {
    double mean = 0.0;
    double std_error = 0.0;
    double variance = 0.0;     // unbiased sample variance
    double variance_se = 0.0;  // standard error of `variance`
    std::size_t n = 0;

    MCEstimate estimate(std::uint64_t seed) const { return {mean, std_error, n, seed}; }
};

SampleSummary summarize(std::span<const double> xs);

/// Path `index` of the stream `seed`: standard normal increments scaled by
/// sqrt(dt), drawn from Philox keyed on the seed with counter (step pair, index).
BrownianPath sample_path(const ModelParams& params, int M, std::uint64_t seed, std::uint64_t index);

/// Steps needed for dt <= eps / 10.
int steps_for(double T, double eps);

/// Trapezoid weight (in units of dt^2) of grid pair (i, i + k) on a triangle of
/// side `size` cells.
double triangle_weight(int i, int k, int size);

/// Gap actually excised on the path's grid: Lambda rounded to a multiple of dt.
double grid_gap(const BrownianPath& path, double lambda);

/// Trapezoid-rule approximation of int int_{t2 - t1 >= Lambda} delta_eps(B(t2) - B(t1)),
/// with Lambda rounded to the grid (see grid_gap). Requires dt <= eps / 10.
double gaussian_lt(const BrownianPath& path, double eps, double lambda);

/// gaussian_lt minus its exact expectation at the grid gap. Accepts the gaussian
/// and combined regularizations.
double centered_lt(const BrownianPath& path, const RegularizationSpec& reg, const ModelParams& params);

/// 1/2 sum_x h l(x)^2 with the occupation density l estimated by a histogram of
/// bin width h. d must be 1.
double occupation_oracle_d1(const BrownianPath& path, double bin_width);

/// f(path_i) for i = 0..n_paths-1, computed in parallel; slot i always holds
/// path i, so the result does not depend on the worker count.
template <class F>
std::vector<double> per_path(const ModelParams& params, int M, std::uint64_t seed, std::size_t n_paths, F&& f) {
    return parallel::map<double>(n_paths, [&](std::size_t i) { return f(sample_path(params, M, seed, i)); });
}

/// Inputs of the Chebyshev tail estimate. Lambda = exp(-alpha (N - k)).
struct TailExperiment {
    double N = 0.0;      // threshold
    double g = 0.0;      // coupling (unused by the bound)
    double alpha = 0.0;  // 0 < alpha < 2 pi / T
    double k = 0.0;
    double K = 0.0;

    double lambda() const;
};

/// K alpha^2 / (1 - T alpha / 2 pi)^2 exp(-alpha (N - k)).
double chebyshev_tail_bound(const TailExperiment& exp, const ModelParams& params);
/// K Lambda ln^2 Lambda / (N - k - (T / 2 pi) |ln Lambda|)^2 at the experiment's Lambda.
double chebyshev_tail_intermediate(const TailExperiment& exp, const ModelParams& params);

/// Frequency of {centered_lt <= -N} with its binomial standard error. `steps`
/// of 0 picks dt = eps / 10.
MCEstimate empirical_tail(const ModelParams& params, const RegularizationSpec& reg, double N, std::size_t n_paths,
                          std::uint64_t seed, int steps = 0);

/// Mean of exp(-g L_c) (d = 2) or exp(-g L) (d = 1). Throws OverflowError when a
/// single weight exceeds 1e300.
MCEstimate partition_estimate(const ModelParams& params, double g, const RegularizationSpec& reg,
                              std::size_t n_paths, std::uint64_t seed, int steps = 0);

namespace detail {

/// exp(x) for x <= 0, written so the compiler can vectorize it (no branches).
/// Relative error below 1e-13; arguments below -700 are clamped to -700.
inline double exp_nonpositive(double x) {
    constexpr double log2e = 1.4426950408889634074;
    constexpr double ln2 = 0.6931471805599453094;
    constexpr double magic = 6755399441055744.0;  // 1.5 * 2^52
    x = x > -700.0 ? x : -700.0;
    const double t = x * log2e + magic;
    const double n = t - magic;
    const double r = (x * log2e - n) * ln2;
    double poly = 1.0 / 479001600.0;
    poly = poly * r + 1.0 / 39916800.0;
    poly = poly * r + 1.0 / 3628800.0;
    poly = poly * r + 1.0 / 362880.0;
    poly = poly * r + 1.0 / 40320.0;
    poly = poly * r + 1.0 / 5040.0;
    poly = poly * r + 1.0 / 720.0;
    poly = poly * r + 1.0 / 120.0;
    poly = poly * r + 1.0 / 24.0;
    poly = poly * r + 1.0 / 6.0;
    poly = poly * r + 0.5;
    poly = poly * r + 1.0;
    poly = poly * r + 1.0;
    const std::int64_t e = std::bit_cast<std::int64_t>(t) - std::bit_cast<std::int64_t>(magic);
    const double scale = std::bit_cast<double>((e + 1023) << 52);
    return poly * scale;
}

}  // namespace detail

}  // namespace silt
