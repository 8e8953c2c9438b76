#include "silt/montecarlo.hpp"

#include "silt/philox.hpp"

#include <algorithm>
#include <cmath>

namespace silt {

SampleSummary summarize(std::span<const double> xs) {
    SampleSummary s;
    s.n = xs.size();
    if (s.n == 0) return s;
    const double n = static_cast<double>(s.n);
    s.mean = parallel::pairwise_sum(xs) / n;
    if (s.n < 2) return s;
    std::vector<double> sq(s.n), quart(s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
        const double dev = xs[i] - s.mean;
        sq[i] = dev * dev;
        quart[i] = sq[i] * sq[i];
    }
    s.variance = parallel::pairwise_sum(sq) / (n - 1.0);
    s.std_error = std::sqrt(s.variance / n);
    const double m4 = parallel::pairwise_sum(quart) / n;
    const double var_of_var = (m4 - (n - 3.0) / (n - 1.0) * s.variance * s.variance) / n;
    s.variance_se = std::sqrt(std::max(0.0, var_of_var));
    return s;
}

BrownianPath sample_path(const ModelParams& params, int M, std::uint64_t seed, std::uint64_t index) {
    params.validate();
    require(M >= 2, "M >= 2");
    BrownianPath path;
    path.d = params.d;
    path.steps = M;
    path.dt = params.T / M;
    const auto stride = static_cast<std::size_t>(M + 1);
    path.values.assign(stride * static_cast<std::size_t>(params.d), 0.0);

    const philox::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const double scale = std::sqrt(path.dt);
    const std::size_t total = static_cast<std::size_t>(M) * static_cast<std::size_t>(params.d);
    double z[2] = {0.0, 0.0};
    for (std::size_t m = 0; m < total; ++m) {
        if (m % 2 == 0) {
            const std::uint64_t pair = m / 2;
            const philox::Counter ctr{static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32),
                                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
            const auto out = philox::philox4x32_10(ctr, key);
            const double u1 = philox::open_closed(out[0], out[1]);
            const double u2 = philox::closed_open(out[2], out[3]);
            const double r = std::sqrt(-2.0 * std::log(u1));
            z[0] = r * std::cos(2.0 * kPi * u2);
            z[1] = r * std::sin(2.0 * kPi * u2);
        }
        const std::size_t step = m / static_cast<std::size_t>(params.d);
        const std::size_t k = m % static_cast<std::size_t>(params.d);
        double* coord = path.values.data() + k * stride;
        coord[step + 1] = coord[step] + scale * z[m % 2];
    }
    return path;
}

int steps_for(double T, double eps) {
    require(eps > 0.0, "eps > 0");
    require(T > 0.0, "T > 0");
    return std::max(2, static_cast<int>(std::ceil(10.0 * T / eps - 1e-9)));
}

double triangle_weight(int i, int k, int size) {
    // Piecewise-linear interpolation on the triangulated grid: full squares off
    // the diagonal contribute 1/4 per corner, diagonal half-squares 1/6.
    if (size == 1) return 1.0 / 6.0;
    const int j = i + k;
    if (k == 0) return (i == 0 || i == size) ? 1.0 / 6.0 : 7.0 / 12.0;
    if (k == 1) return (i == 0 || j == size) ? 5.0 / 12.0 : 11.0 / 12.0;
    double w = 1.0;
    if (i == 0) w *= 0.5;
    if (j == size) w *= 0.5;
    return w;
}

double grid_gap(const BrownianPath& path, double lambda) {
    require(lambda >= 0.0, "Lambda >= 0");
    require(lambda < path.T(), "Lambda < T");
    return static_cast<double>(std::lround(lambda / path.dt)) * path.dt;
}

namespace {

// sum_{j in [lo, hi)} exp(-|B(t_j) - B(t_i)|^2 * inv2eps). The simd reduction
// has a fixed lane count per build, so the summation order is fixed too.
template <int D>
double row_sum(const BrownianPath& path, int i, int lo, int hi, double inv2eps) {
    const double* x[D];
    double xi[D];
    for (int c = 0; c < D; ++c) {
        x[c] = path.coordinate(c).data();
        xi[c] = x[c][i];
    }
    double s = 0.0;
#pragma omp simd reduction(+ : s)
    for (int j = lo; j < hi; ++j) {
        double r2 = 0.0;
        for (int c = 0; c < D; ++c) {
            const double dx = x[c][j] - xi[c];
            r2 += dx * dx;
        }
        s += detail::exp_nonpositive(-r2 * inv2eps);
    }
    return s;
}

double row_sum_any(const BrownianPath& path, int i, int lo, int hi, double inv2eps) {
    switch (path.d) {
        case 1: return row_sum<1>(path, i, lo, hi, inv2eps);
        case 2: return row_sum<2>(path, i, lo, hi, inv2eps);
        case 3: return row_sum<3>(path, i, lo, hi, inv2eps);
        default: break;
    }
    double s = 0.0;
    for (int j = lo; j < hi; ++j) {
        double r2 = 0.0;
        for (int c = 0; c < path.d; ++c) {
            const double dx = path.at(j, c) - path.at(i, c);
            r2 += dx * dx;
        }
        s += detail::exp_nonpositive(-r2 * inv2eps);
    }
    return s;
}

void check_path(const BrownianPath& path, const ModelParams& params) {
    require(path.d == params.d, "path dimension equals d");
    require(std::abs(path.T() - params.T) <= 1e-12 * params.T, "path horizon equals T");
}

}  // namespace

double gaussian_lt(const BrownianPath& path, double eps, double lambda) {
    require(eps > 0.0, "eps > 0");
    require(path.steps >= 2, "M >= 2");
    require(path.dt <= eps / 10.0 * (1.0 + 1e-9), "dt <= eps/10 (the grid must resolve delta_eps)");
    const int K = static_cast<int>(std::lround(grid_gap(path, lambda) / path.dt));
    const int size = path.steps - K;
    const double inv2eps = 0.5 / eps;

    // Pairs (i, i + K + k) with 0 <= k <= size - i: the gap domain is the
    // triangle {t2 - t1 >= Lambda} shifted by K grid steps.
    std::vector<double> rows(static_cast<std::size_t>(size + 1));
    for (int i = 0; i <= size; ++i) {
        const int kmax = size - i;
        const int base = i + K;
        double s = 0.0;
        if (kmax >= 3) s += (i == 0 ? 0.5 : 1.0) * row_sum_any(path, i, base + 2, base + kmax, inv2eps);
        const int special[3] = {0, 1, kmax};
        for (int idx = 0; idx < 3; ++idx) {
            const int k = special[idx];
            if (k > kmax || (idx == 2 && kmax < 2)) continue;
            s += triangle_weight(i, k, size) * row_sum_any(path, i, base + k, base + k + 1, inv2eps);
        }
        rows[static_cast<std::size_t>(i)] = s;
    }
    const double norm = std::pow(2.0 * kPi * eps, -0.5 * path.d);
    return norm * path.dt * path.dt * parallel::pairwise_sum(rows);
}

double centered_lt(const BrownianPath& path, const RegularizationSpec& reg, const ModelParams& params) {
    check_path(path, params);
    require(reg.variant == Regularization::gaussian || reg.variant == Regularization::combined,
            "centered_lt needs the gaussian or combined regularization (eps > 0)");
    const double lambda = reg.variant == Regularization::combined ? reg.lambda : 0.0;
    const double value = gaussian_lt(path, reg.epsilon, lambda);
    return value - expected_combined_lt(params, reg.epsilon, grid_gap(path, lambda));
}

double occupation_oracle_d1(const BrownianPath& path, double bin_width) {
    require(path.d == 1, "occupation oracle requires d = 1");
    require(bin_width > 0.0, "bin_width > 0");
    const auto x = path.coordinate(0);
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const auto first = static_cast<long>(std::floor(*lo_it / bin_width));
    const auto last = static_cast<long>(std::floor(*hi_it / bin_width));
    std::vector<double> counts(static_cast<std::size_t>(last - first + 1), 0.0);
    for (double xi : x) counts[static_cast<std::size_t>(static_cast<long>(std::floor(xi / bin_width)) - first)] += 1.0;
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += c * c;
    // 1/2 sum_bins h (dt count / h)^2
    return 0.5 * path.dt * path.dt / bin_width * sum_sq;
}

double TailExperiment::lambda() const { return std::exp(-alpha * (N - k)); }

namespace {

void check_tail(const TailExperiment& exp, const ModelParams& params) {
    params.validate();
    require(exp.alpha > 0.0, "alpha > 0");
    require(exp.alpha < 2.0 * kPi / params.T, "alpha < 2 pi / T");
    require(exp.N > exp.k, "N > k");
    require(exp.K >= 0.0 && exp.k >= 0.0, "K >= 0 and k >= 0");
}

}  // namespace

double chebyshev_tail_bound(const TailExperiment& exp, const ModelParams& params) {
    check_tail(exp, params);
    const double damp = 1.0 - params.T * exp.alpha / (2.0 * kPi);
    return exp.K * exp.alpha * exp.alpha / (damp * damp) * std::exp(-exp.alpha * (exp.N - exp.k));
}

double chebyshev_tail_intermediate(const TailExperiment& exp, const ModelParams& params) {
    check_tail(exp, params);
    const double lambda = exp.lambda();
    const double l = std::log(lambda);
    const double margin = exp.N - exp.k - params.T / (2.0 * kPi) * std::abs(l);
    return exp.K * lambda * l * l / (margin * margin);
}

MCEstimate empirical_tail(const ModelParams& params, const RegularizationSpec& reg, double N, std::size_t n_paths,
                          std::uint64_t seed, int steps) {
    params.validate();
    require(params.d == 2, "empirical_tail requires d = 2");
    require(n_paths >= 10'000, "n_paths >= 10^4");
    reg.validate(params);
    require(reg.epsilon > 0.0, "eps > 0");
    const int M = steps > 0 ? steps : steps_for(params.T, reg.epsilon);
    const auto hits = per_path(params, M, seed, n_paths,
                               [&](const BrownianPath& p) { return centered_lt(p, reg, params) <= -N ? 1.0 : 0.0; });
    return summarize(hits).estimate(seed);
}

MCEstimate partition_estimate(const ModelParams& params, double g, const RegularizationSpec& reg,
                              std::size_t n_paths, std::uint64_t seed, int steps) {
    params.validate();
    require(params.d == 1 || params.d == 2, "partition_estimate requires d in {1, 2}");
    require(g >= 0.0, "g >= 0");
    require(n_paths >= 2, "n_paths >= 2");
    reg.validate(params);
    require(reg.epsilon > 0.0, "eps > 0");
    const int M = steps > 0 ? steps : steps_for(params.T, reg.epsilon);
    const auto weights = per_path(params, M, seed, n_paths, [&](const BrownianPath& p) {
        // d = 1: L itself is nonnegative, no centering needed.
        const double lambda = reg.variant == Regularization::combined ? reg.lambda : 0.0;
        const double l = params.d == 1 ? gaussian_lt(p, reg.epsilon, lambda) : centered_lt(p, reg, params);
        return std::exp(-g * l);
    });
    for (double w : weights)
        if (!(w <= 1e300)) throw OverflowError("partition weight exp(-g L) exceeds 1e300");
    return summarize(weights).estimate(seed);
}

}  // namespace silt
