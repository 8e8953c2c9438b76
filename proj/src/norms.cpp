#include "silt/norms.hpp"

#include "silt/kernels.hpp"
#include "silt/parallel.hpp"
#include "silt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace silt {

namespace {

constexpr int kMaxOrder = 40;

double cd(int d) { return std::pow(2.0 * kPi, -0.5 * d); }

// 2n(2n-1) w^{2n-2} f^2: the density of (min, max) of 2n arguments times the
// squared kernel, formed as (w^{n-1} f)^2 so that neither factor overflows.
double weighted_square(int n, double w, double f) {
    const double g = std::pow(w, n - 1) * f;
    return 2.0 * n * (2.0 * n - 1.0) * g * g;
}

void check_series_dim(int d) {
    require(d == 1 || d == 2, "norm series are implemented for d in {1, 2} (the rho norm diverges for d >= 3)");
}

// Breakpoints on [0, len] that refine geometrically toward both ends, where the
// nearest singularity sits `offset` outside the interval.
std::vector<double> two_sided_points(double len, double offset) {
    const double half = 0.5 * len;
    auto left = quad::geometric_points(0.0, half, offset, 40);
    std::vector<double> pts = left;
    for (auto it = left.rbegin() + 1; it != left.rend(); ++it) pts.push_back(len - *it);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// Sum over n > n_max of r_n * 2n(2n-1) / ((p-1)(p-2))^2 with p = n + d/2 and
// r_n = chaos_weight(d, n) / 4^n. Explicit up to a cap, then an integral bound.
double majorant_series_tail(int d, int n_max) {
    const double h = 0.5 * d;
    // r_n = (d/2)_n / n!, built up by its ratio recursion.
    double r = 1.0;
    for (int k = 0; k < n_max + 1; ++k) r *= (h + k) / (k + 1.0);
    const int cap = n_max + 200'000;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(cap - n_max));
    for (int n = n_max + 1; n <= cap; ++n) {
        const double p = n + h;
        const double den = (p - 1.0) * (p - 2.0);
        terms.push_back(r * 2.0 * n * (2.0 * n - 1.0) / (den * den));
        r *= (h + n) / (n + 1.0);
    }
    double sum = 0.0;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) sum += *it;
    // For d <= 2, r_n <= 1 and (p-1)(p-2) >= (n-a)^2 with a = 2 - d/2, so each
    // further term is below 4x^2/(x-a)^4, a decreasing function of x.
    const double a = 2.0 - h;
    const double y0 = cap - a;
    sum += 4.0 * (1.0 / y0 + a / (y0 * y0) + a * a / (3.0 * y0 * y0 * y0));
    return sum;
}

double rho_norm_interior(int d, int n, double T, double lambda) {
    auto f = [&](double w) {
        return weighted_square(n, w, profile::rho_interior(d, n, lambda, w)) * (T - 2.0 * lambda + w);
    };
    const auto pts = quad::geometric_points(0.0, lambda, 0.0);
    return quad::integrate(f, std::span<const double>(pts), {1e-10, 0.0, 100'000}).value;
}

// Strip part with v < Lambda. The part with u > T - Lambda is its mirror image
// under (u, v) -> (T - v, T - u), which leaves rho unchanged.
double rho_norm_corner(int d, int n, double T, double lambda) {
    auto outer = [&](double w) {
        const double len = lambda - w;
        if (!(len > 0.0)) return 0.0;
        auto inner = [&](double u) { return weighted_square(n, w, profile::rho_uw(d, n, T, lambda, u, w, 1e-11)); };
        return quad::integrate(inner, 0.0, len, {1e-8, 0.0, 20'000}).value;
    };
    const auto pts = quad::geometric_points(0.0, lambda, 0.0, 40);
    return quad::integrate(outer, std::span<const double>(pts), {1e-7, 0.0, 20'000}).value;
}

double kernel_norm_sq(int n, double T, double eps, std::optional<double> lambda,
                      const std::function<double(double, double)>& kernel) {
    auto outer = [&](double w) {
        const double len = T - w;
        if (!(len > 0.0)) return 0.0;
        auto pts = two_sided_points(len, w + eps);
        if (lambda) pts = quad::merge_points(std::move(pts), {*lambda - w, T - *lambda});
        auto inner = [&](double u) { return weighted_square(n, w, kernel(u, w)); };
        return quad::integrate(inner, std::span<const double>(pts), {1e-9, 0.0, 50'000}).value;
    };
    auto pts = quad::geometric_points(0.0, T, eps, 40);
    if (lambda) pts = quad::merge_points(std::move(pts), {*lambda});
    return quad::integrate(outer, std::span<const double>(pts), {1e-8, 0.0, 50'000}).value;
}

}  // namespace

double rho_l2_norm_sq(int n, const ModelParams& params, double lambda) {
    params.validate();
    check_series_dim(params.d);
    require(n >= 1, "n >= 1");
    require(2 * n > params.d - 2, "2n > d - 2");
    require(lambda > 0.0, "Lambda > 0");
    require(lambda < 0.5 * params.T, "Lambda < T/2");
    return rho_norm_interior(params.d, n, params.T, lambda) +
           2.0 * rho_norm_corner(params.d, n, params.T, lambda);
}

double rho_majorant_term(int n, const ModelParams& params, double lambda) {
    params.validate();
    check_series_dim(params.d);
    const double p = n + 0.5 * params.d;
    require(p > 2.0, "n + d/2 > 2 for the power-law rho bound");
    require(lambda > 0.0, "Lambda > 0");
    const double c = cd(params.d);
    const double den = (p - 1.0) * (p - 2.0);
    const double weight = to_double(chaos_weight(params.d, n)) * std::pow(0.25, n);
    return c * c * weight / (den * den) * 2.0 * n * (2.0 * n - 1.0) * params.T * std::pow(lambda, 3.0 - params.d) /
           (3.0 - params.d);
}

ChaosDistance chaos_distance_sq(const ModelParams& params, double lambda, int n_max) {
    params.validate();
    check_series_dim(params.d);
    require(lambda > 0.0, "Lambda > 0");
    require(lambda < 0.5 * params.T, "Lambda < T/2");
    require(n_max >= params.N + 2, "n_max >= N + 2");
    require(n_max <= kMaxOrder, "n_max <= 40 (exact-arithmetic limit)");

    ChaosDistance out;
    out.lambda = lambda;
    out.n_min = params.N;
    out.n_max = n_max;

    const int first = std::max(1, params.N);
    const auto count = static_cast<std::size_t>(n_max - first + 1);
    const auto values = parallel::map<double>(count, [&](std::size_t i) {
        const int n = first + static_cast<int>(i);
        return to_double(chaos_weight(params.d, n)) * rho_l2_norm_sq(n, params, lambda);
    });

    if (params.N == 0) {
        // L^(0) keeps the order-0 coefficient, the expectation itself.
        const double diff = expected_combined_lt(params, 0.0, 0.0) - expected_gap_lt(params, lambda);
        out.per_order.push_back({0, diff * diff});
    }
    for (std::size_t i = 0; i < count; ++i) out.per_order.push_back({first + static_cast<int>(i), values[i]});

    std::vector<double> contributions;
    for (const auto& t : out.per_order) contributions.push_back(t.contribution);
    out.total = parallel::pairwise_sum(contributions);

    const double c = cd(params.d);
    out.truncation_bound = c * c * majorant_series_tail(params.d, n_max) * params.T *
                           std::pow(lambda, 3.0 - params.d) / (3.0 - params.d);
    return out;
}

double RateTable::max_ratio() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.ratio);
    return m;
}

double RateTable::min_ratio() const {
    double m = rows.empty() ? 0.0 : rows.front().ratio;
    for (const auto& r : rows) m = std::min(m, r.ratio);
    return m;
}

bool RateTable::bounded(double limit) const {
    const double lo = min_ratio();
    return lo > 0.0 && max_ratio() / lo <= limit;
}

RateTable rate_verification(const ModelParams& params, const std::vector<double>& lambdas, int n_max) {
    params.validate();
    require(lambdas.size() >= 5, "at least 5 Lambda values");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        require(lambdas[i] > 0.0 && lambdas[i] < 0.5 * params.T, "every Lambda in (0, T/2)");
        if (i > 0) require(lambdas[i] < lambdas[i - 1], "Lambda values strictly decreasing");
    }
    require(lambdas.front() / lambdas.back() >= 100.0, "Lambda grid spans at least two decades");

    RateTable table;
    for (double lambda : lambdas) {
        const auto dist = chaos_distance_sq(params, lambda, n_max);
        const double l = std::log(lambda);
        table.rows.push_back({lambda, dist.total, dist.total / (params.T * lambda * l * l), dist.truncation_bound});
    }
    return table;
}

ChaosSeries phi_centered_variance_series(const ModelParams& params, const RegularizationSpec& reg, int n_max) {
    params.validate();
    require(params.d == 1 || params.d == 2, "d in {1, 2} (the variance series diverges for d >= 3)");
    require(n_max >= 3, "n_max >= 3");
    require(n_max <= kMaxOrder, "n_max <= 40 (exact-arithmetic limit)");
    require(reg.variant == Regularization::gaussian || reg.variant == Regularization::gap,
            "variance series supports the gaussian and gap regularizations");
    if (params.d == 2) {
        if (reg.variant == Regularization::gaussian) require(reg.epsilon > 0.0, "eps > 0 for d = 2");
        else require(reg.lambda > 0.0, "Lambda > 0 for d = 2");
    }
    if (reg.variant == Regularization::gaussian) require(reg.epsilon >= 0.0, "eps >= 0");
    else {
        require(reg.lambda > 0.0, "Lambda > 0");
        require(reg.lambda < 0.5 * params.T, "Lambda < T/2");
    }

    const int d = params.d;
    const double T = params.T;
    const double eps = reg.mollifier();
    const auto count = static_cast<std::size_t>(n_max);
    const auto values = parallel::map<double>(count, [&](std::size_t i) {
        const int n = static_cast<int>(i) + 1;
        double norm = 0.0;
        if (reg.variant == Regularization::gap) {
            const double lambda = reg.lambda;
            norm = kernel_norm_sq(n, T, 0.0, lambda,
                                  [&](double u, double w) { return profile::gap_uw(d, n, T, lambda, u, w, 1e-11); });
        } else if (eps > 0.0) {
            norm = kernel_norm_sq(n, T, eps, {}, [&](double u, double w) { return profile::phi_eps_uw(d, n, T, eps, u, w); });
        } else {
            norm = kernel_norm_sq(n, T, 0.0, {}, [&](double u, double w) { return profile::phi_uw(d, n, T, u, w); });
        }
        return to_double(chaos_weight(d, n)) * norm;
    });

    ChaosSeries out;
    for (std::size_t i = 0; i < count; ++i) out.per_order.push_back({static_cast<int>(i) + 1, values[i]});
    out.total = parallel::pairwise_sum(values);

    // |kernel profile| <= c_d 2^{-n} (eps + w)^{2-p} / ((p-1)(p-2)) for both
    // variants, and w^{2n-2} (eps + w)^{4-2p} <= (eps + w)^{2-d}.
    const double J = d == 2 ? 0.5 * T * T : 0.5 * eps * T * T + T * T * T / 6.0;
    const double c = cd(d);
    out.truncation_bound = c * c * majorant_series_tail(d, n_max) * J;
    return out;
}

double phi_centered_variance(const ModelParams& params, const RegularizationSpec& reg, int n_max) {
    return phi_centered_variance_series(params, reg, n_max).total;
}

}  // namespace silt
