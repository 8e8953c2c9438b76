#pragma once

// Globally adaptive Gauss-Kronrod (7, 15) integration with user breakpoints,
// in the style of QUADPACK's QAGP. Cells are refined in order of decreasing
// error estimate until the absolute-or-relative tolerance is met; running out
// of budget is an error, never a silently degraded answer.

#include "silt/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace silt::quad {

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    std::size_t max_cells = 1'000'000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t cells = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kXgk[1], kXgk[3], kXgk[5] and the centre.
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Cell {
    double a, b, value, error;
    bool operator<(const Cell& o) const { return error < o.error; }
};

template <class F>
Cell gauss_kronrod_15(F& f, double a, double b) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    std::array<double, 15> fv{};
    fv[7] = static_cast<double>(f(centre));
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        fv[static_cast<std::size_t>(j)] = static_cast<double>(f(centre - dx));
        fv[static_cast<std::size_t>(14 - j)] = static_cast<double>(f(centre + dx));
    }

    double resk = kWgk[7] * fv[7];
    double resg = kWg[3] * fv[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 7; ++j) {
        const double pair = fv[static_cast<std::size_t>(j)] + fv[static_cast<std::size_t>(14 - j)];
        resk += kWgk[static_cast<std::size_t>(j)] * pair;
        resabs += kWgk[static_cast<std::size_t>(j)] *
                  (std::abs(fv[static_cast<std::size_t>(j)]) + std::abs(fv[static_cast<std::size_t>(14 - j)]));
        if (j % 2 == 1) resg += kWg[static_cast<std::size_t>(j / 2)] * pair;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fv[7] - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[static_cast<std::size_t>(j)] *
                  (std::abs(fv[static_cast<std::size_t>(j)] - mean) +
                   std::abs(fv[static_cast<std::size_t>(14 - j)] - mean));

    const double ah = std::abs(half);
    double err = std::abs((resk - resg) * half);
    resasc *= ah;
    resabs *= ah;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return Cell{a, b, resk * half, err};
}

}  // namespace detail

/// Integrates f over [points.front(), points.back()], starting from the cells
/// delimited by `points` (sorted, at least two entries).
template <class F>
Result integrate(F&& f, std::span<const double> points, const Options& opt = {}) {
    require(points.size() >= 2, "quadrature needs at least two breakpoints");
    std::priority_queue<detail::Cell> queue;
    double total = 0.0;
    double total_err = 0.0;
    double frozen_err = 0.0;
    std::vector<detail::Cell> frozen;
    std::size_t cells = 0;

    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i] <= points[i + 1])) throw PreconditionError("quadrature breakpoints must be sorted");
        if (points[i] == points[i + 1]) continue;
        auto c = detail::gauss_kronrod_15(f, points[i], points[i + 1]);
        ++cells;
        total += c.value;
        total_err += c.error;
        queue.push(c);
    }
    if (!std::isfinite(total)) throw ConvergenceError("integrand is not finite on the domain");

    auto converged = [&] { return total_err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };

    while (!converged() && !queue.empty()) {
        if (cells >= opt.max_cells)
            throw ConvergenceError("adaptive quadrature exceeded its budget of " + std::to_string(opt.max_cells) +
                                   " cells (estimated error " + std::to_string(total_err) + ")");
        const detail::Cell worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const double scale = std::max(std::abs(worst.a), std::abs(worst.b));
        if (!(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 64.0 * std::numeric_limits<double>::epsilon() * scale) {
            // Cannot be split further in double precision.
            frozen_err += worst.error;
            frozen.push_back(worst);
            continue;
        }
        auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        cells += 2;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        if (!std::isfinite(total)) throw ConvergenceError("integrand is not finite on the domain");
    }
    if (!converged())
        throw ConvergenceError("adaptive quadrature stalled on round-off (estimated error " +
                               std::to_string(total_err) + ", frozen " + std::to_string(frozen_err) + ")");

    // Re-sum the cells so the reported value does not carry update drift.
    double resum = 0.0;
    for (const auto& c : frozen) resum += c.value;
    while (!queue.empty()) {
        resum += queue.top().value;
        queue.pop();
    }
    return Result{resum, total_err, cells};
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    const std::array<double, 2> pts{a, b};
    return integrate(std::forward<F>(f), std::span<const double>(pts), opt);
}

/// Breakpoints a = x_0 < ... < x_k = b that grow geometrically away from a
/// singularity located at `a - offset` (offset >= 0). With offset == 0 the
/// grid refines toward a itself, down to a relative scale of 2^-max_levels.
inline std::vector<double> geometric_points(double a, double b, double offset, int max_levels = 60) {
    std::vector<double> pts;
    if (!(b > a)) return {a, b};
    pts.push_back(a);
    if (offset > 0.0) {
        for (double s = 2.0 * offset; a - offset + s < b; s *= 2.0) pts.push_back(a - offset + s);
    } else {
        const double len = b - a;
        for (int k = max_levels; k >= 1; --k) pts.push_back(a + len * std::ldexp(1.0, -k));
    }
    pts.push_back(b);
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/// Sorted union of `base` and the entries of `extra` that fall strictly inside it.
inline std::vector<double> merge_points(std::vector<double> base, std::initializer_list<double> extra) {
    const double lo = base.front();
    const double hi = base.back();
    for (double x : extra)
        if (x > lo && x < hi) base.push_back(x);
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());
    return base;
}

}  // namespace silt::quad
