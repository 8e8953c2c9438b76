#include "silt/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace silt;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double prefactor(int d, int n) { return std::pow(2.0 * kPi, -0.5 * d) * std::pow(-0.5, n); }

// Nested Gauss-Kronrod over t1 in (a1, b1), t2 in (v, hi(t1)), integrand
// c (eps + t2 - t1)^{-p}. Used only where t2 - t1 stays away from 0.
template <class Hi>
double boost_oracle(int d, int n, double eps, double a1, double b1, double v, Hi hi) {
    const double p = n + 0.5 * d;
    const double c = prefactor(d, n);
    auto outer = [&](double t1) {
        auto inner = [&](double t2) { return c * std::pow(eps + t2 - t1, -p); };
        const double top = hi(t1);
        return top > v ? GK::integrate(inner, v, top, 8, 1e-12) : 0.0;
    };
    return GK::integrate(outer, a1, b1, 8, 1e-12);
}

// rho for v < Lambda (strip touching t = 0), integrated by hand:
// int_0^u dt1 int_v^{t1 + Lambda} c (t2 - t1)^{-p} dt2.
double rho_corner_closed(int d, int n, double lambda, double u, double v) {
    const double p = n + 0.5 * d;
    const double a = 2.0 - p;
    const double c = prefactor(d, n);
    return c / (p - 1.0) * ((std::pow(v - u, a) - std::pow(v, a)) / (p - 2.0) - std::pow(lambda, a - 1.0) * u);
}

}  // namespace

TEST_CASE("psi_coefficient examples") {
    CHECK(psi_coefficient(MultiIndex({0, 0}), 2, 0.0, 1.0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-15));
    CHECK(psi_coefficient(MultiIndex({1, 0}), 2, 0.25, 0.75) == doctest::Approx(-0.3183098862).epsilon(1e-9));
    for (int d = 1; d <= 3; ++d)
        for (const auto& m : enumerate_multi_indices(d, 3)) {
            const double x = psi_coefficient(m, d, 0.1, 0.4);
            CHECK(x < 0.0);
            CHECK(x == doctest::Approx(prefactor(d, 3) / m.factorial_double() * std::pow(0.3, -3.0 - 0.5 * d)));
        }
    CHECK(psi_coefficient(MultiIndex({2}), 1, 0.1, 0.4) > 0.0);
    CHECK_THROWS_AS(psi_coefficient(MultiIndex({1}), 1, 0.4, 0.4), PreconditionError);
}

TEST_CASE("phi_kernel examples") {
    const auto p2 = ModelParams::make(2, 1.0);
    const double expected = -(std::log(0.5) + std::log(0.75) - std::log(0.25)) / (4.0 * kPi);
    CHECK(phi_kernel(MultiIndex({1, 0}), p2, {0.25, 0.5}) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(phi_kernel(MultiIndex({1, 0}), p2, {0.25, 0.5}) == doctest::Approx(-0.0322658881).epsilon(1e-9));
    CHECK(std::abs(phi_kernel(MultiIndex({0, 1}), p2, {1e-12, 1.0 - 1e-12})) < 1e-11);

    const auto p1 = ModelParams::make(1, 1.0);
    const double oracle = boost_oracle(1, 1, 0.0, 0.0, 0.3, 0.6, [](double) { return 1.0; });
    CHECK(rel(phi_kernel(MultiIndex({1}), p1, {0.3, 0.6}), oracle) < 1e-8);
    CHECK_THROWS_AS(phi_kernel(MultiIndex({1, 0}), p2, {0.3, 0.3}), PreconditionError);
    CHECK_THROWS_AS(phi_kernel(MultiIndex({0, 0}), p2, {0.3, 0.5}), PreconditionError);
    CHECK_THROWS_AS(phi_kernel(MultiIndex({1}), p2, {0.3, 0.5}), PreconditionError);
}

TEST_CASE("closed-form kernels agree with an independent nested quadrature") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int d = 1; d <= 3; ++d) {
        const double T = 1.0 + d * 0.25;
        const auto params = ModelParams::make(d, T);
        for (int n = 1; n <= 3; ++n) {
            if (2 * n <= d - 2) continue;
            const auto idx = MultiIndex::axis(d, n);
            for (int s = 0; s < 5; ++s) {
                const double u = T * (0.05 + 0.8 * U(rng));
                const double v = u + (T - u) * (0.1 + 0.8 * U(rng));
                auto top = [&](double) { return T; };
                const double f = idx.factorial_double();
                CHECK(rel(phi_kernel(idx, params, {u, v}), boost_oracle(d, n, 0.0, 0.0, u, v, top) / f) < 1e-9);
                CHECK(rel(phi_eps_kernel(idx, params, 0.02, {u, v}), boost_oracle(d, n, 0.02, 0.0, u, v, top) / f) < 1e-9);

                const double lambda = 0.2;
                const double w = lambda * (0.05 + 0.9 * U(rng));
                const double ui = lambda + (T - 2.0 * lambda) * U(rng);
                const double rho_oracle = boost_oracle(d, n, 0.0, ui + w - lambda, ui, ui + w,
                                                       [&](double t1) { return std::min(T, t1 + lambda); });
                CHECK(rel(rho_kernel(idx, params, lambda, {ui, ui + w}), rho_oracle / f) < 1e-9);
            }
        }
    }
}

TEST_CASE("kernel_quadrature_oracle reproduces closed forms") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int d = 1; d <= 3; ++d) {
        const auto params = ModelParams::make(d, 1.0);
        for (int n = 1; n <= 3; ++n) {
            if (2 * n <= d - 2) continue;
            for (const auto& idx : enumerate_multi_indices(d, n)) {
                const double u = 0.05 + 0.8 * U(rng);
                const double v = u + (0.99 - u) * (0.02 + 0.9 * U(rng));
                const KernelPoint p{u, v};
                CHECK(rel(phi_kernel(idx, params, p),
                          kernel_quadrature_oracle(idx, params, TimeRectangle::phi_domain(1.0, p))) < 1e-7);
                OracleOptions eo;
                eo.epsilon = 0.01;
                CHECK(rel(phi_eps_kernel(idx, params, 0.01, p),
                          kernel_quadrature_oracle(idx, params, TimeRectangle::phi_domain(1.0, p), eo)) < 1e-7);
                const KernelPoint q{0.4, 0.4 + 0.1 * (0.01 + 0.98 * U(rng))};
                CHECK(rel(rho_kernel(idx, params, 0.1, q),
                          kernel_quadrature_oracle(idx, params, TimeRectangle::rho_domain(1.0, 0.1, q))) < 1e-7);
            }
        }
    }
    // Steep integrand: small width, high order.
    const auto p3 = ModelParams::make(3, 1.0);
    const KernelPoint close{0.5, 0.5 + 1e-5};
    CHECK(rel(phi_kernel(MultiIndex({1, 1, 1}), p3, close),
              kernel_quadrature_oracle(MultiIndex({1, 1, 1}), p3, TimeRectangle::phi_domain(1.0, close))) < 1e-7);
}

TEST_CASE("oracle on an empty domain is zero") {
    const auto params = ModelParams::make(2, 1.0);
    TimeRectangle empty{0.5, 0.4, 0.6, 0.9, {}, {}};
    CHECK(empty.empty());
    CHECK(kernel_quadrature_oracle(MultiIndex({1, 0}), params, empty) == 0.0);
    // Outside the strip the rho domain is empty.
    const auto dom = TimeRectangle::rho_domain(1.0, 0.1, {0.3, 0.5});
    CHECK(dom.empty());
    CHECK(kernel_quadrature_oracle(MultiIndex({1, 0}), params, dom) == 0.0);
}

TEST_CASE("phi_eps_kernel") {
    const auto p2 = ModelParams::make(2, 1.0);
    const double expected = -(2.0 * std::log(0.51) - std::log(0.01) - std::log(1.01)) / (4.0 * kPi);
    CHECK(phi_eps_kernel(MultiIndex({0, 1}), p2, 0.01, {0.5, 0.5}) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(phi_eps_kernel(MultiIndex({0, 1}), p2, 0.0, {0.2, 0.5}), PreconditionError);
    // eps -> 0 recovers phi.
    for (int d = 1; d <= 3; ++d) {
        const auto params = ModelParams::make(d, 1.0);
        const auto idx = MultiIndex::axis(d, 2);
        CHECK(rel(phi_eps_kernel(idx, params, 1e-12, {0.3, 0.6}), phi_kernel(idx, params, {0.3, 0.6})) < 1e-9);
    }
}

TEST_CASE("|phi_eps| <= |phi| for d + 2n > 4") {
    for (int d = 1; d <= 3; ++d) {
        const auto params = ModelParams::make(d, 1.0);
        for (int n = 1; n <= 3; ++n) {
            if (d + 2 * n <= 4) continue;
            const auto idx = MultiIndex::axis(d, n);
            for (int i = 1; i < 32; ++i)
                for (int j = i + 1; j < 32; ++j) {
                    const KernelPoint p{i / 32.0, j / 32.0};
                    CHECK(std::abs(phi_eps_kernel(idx, params, 0.01, p)) <= std::abs(phi_kernel(idx, params, p)));
                }
        }
    }
}

TEST_CASE("phi_kernel sign is (-1)^n near the diagonal") {
    for (int d = 1; d <= 3; ++d) {
        const auto params = ModelParams::make(d, 1.0);
        for (int n = 1; n <= 6; ++n) {
            if (d + 2 * n <= 4) continue;
            const double x = phi_kernel(MultiIndex::axis(d, n), params, {0.4, 0.4 + 1e-6});
            CHECK((n % 2 == 0 ? x > 0.0 : x < 0.0));
        }
    }
}

TEST_CASE("rho_kernel interior values") {
    const auto p2 = ModelParams::make(2, 1.0);
    const double lambda = 0.1;
    // Direct evaluation of the logarithmic closed form at v - u = Lambda / 2.
    const double direct = (std::log(0.05) - std::log(0.1) + 0.5) / (4.0 * kPi);
    CHECK(rho_kernel(MultiIndex({1, 0}), p2, lambda, {0.5, 0.55}) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(std::abs(direct - (-0.015370164265)) < 1e-12);
    CHECK(rho_kernel(MultiIndex({1, 0}), p2, 0.125, {0.5, 0.625}) == 0.0);
    CHECK(rho_kernel(MultiIndex({1, 0}), p2, lambda, {0.2, 0.6}) == 0.0);

    const KernelPoint q{0.5, 0.55};
    CHECK(rel(rho_kernel(MultiIndex({2, 0}), p2, lambda, q),
              kernel_quadrature_oracle(MultiIndex({2, 0}), p2, TimeRectangle::rho_domain(1.0, lambda, q))) < 1e-7);
    CHECK_THROWS_AS(rho_kernel(MultiIndex({1, 0}), p2, 1.0, q), PreconditionError);
}

TEST_CASE("rho_kernel vanishes at the strip edge for every order") {
    for (int d = 1; d <= 3; ++d) {
        const auto params = ModelParams::make(d, 1.0);
        for (int n = 1; n <= 4; ++n) {
            if (2 * n <= d - 2) continue;
            const auto idx = MultiIndex::axis(d, n);
            const double scale = std::abs(rho_kernel(idx, params, 0.125, {0.5, 0.5 + 0.0625}));
            const double edge = rho_kernel(idx, params, 0.125, {0.375, 0.5});
            CHECK(std::abs(edge) <= 1e-13 * scale);
            // Just inside the edge the value is small and of the interior sign.
            CHECK(std::abs(rho_kernel(idx, params, 0.125, {0.375 + 1e-9, 0.5})) < 1e-6 * scale);
        }
    }
}

TEST_CASE("boundary rho matches a hand-integrated corner formula") {
    const double T = 1.0, lambda = 0.2;
    for (int d = 1; d <= 3; ++d) {
        const auto params = ModelParams::make(d, T);
        for (int n = 1; n <= 3; ++n) {
            if (2 * n <= d - 2) continue;
            const double p = n + 0.5 * d;
            if (p == 1.0 || p == 2.0) continue;  // logarithmic antiderivatives
            const auto idx = MultiIndex::axis(d, n);
            for (auto [u, v] : {std::pair{0.02, 0.1}, std::pair{0.05, 0.19}, std::pair{0.0, 0.15}, std::pair{0.1, 0.1001}}) {
                const double closed = rho_corner_closed(d, n, lambda, u, v) / idx.factorial_double();
                CHECK(rel(rho_kernel(idx, params, lambda, {u, v}), closed) < 1e-8);
                // Mirror image near t = T.
                CHECK(rel(rho_kernel(idx, params, lambda, {T - v, T - u}), closed) < 1e-8);
            }
        }
    }
}

TEST_CASE("rho_kernel is symmetric under (u, v) -> (T - v, T - u)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto params = ModelParams::make(2, 1.0);
    for (int s = 0; s < 200; ++s) {
        const double w = 0.1 * U(rng);
        const double u = (1.0 - w) * U(rng);
        const auto idx = MultiIndex({s % 3 + 1, 0});
        const double a = rho_kernel(idx, params, 0.1, {u, u + w});
        const double b = rho_kernel(idx, params, 0.1, {1.0 - u - w, 1.0 - u});
        CHECK(std::abs(a - b) <= 1e-8 * std::abs(a) + 1e-14);
    }
}

TEST_CASE("gap_kernel structure") {
    const auto p2 = ModelParams::make(2, 1.0);
    const double lambda = 0.1;
    const auto idx = MultiIndex({1, 0});
    CHECK(gap_kernel(idx, p2, lambda, {0.3, 0.6}) == phi_kernel(idx, p2, {0.3, 0.6}));
    CHECK(gap_kernel(idx, p2, lambda, {0.4, 0.5}) == doctest::Approx(phi_kernel(idx, p2, {0.4, 0.5})).epsilon(1e-14));
    CHECK(rel(gap_kernel(idx, p2, lambda, {0.5, 0.53}),
              phi_kernel(idx, p2, {0.5, 0.53}) - rho_kernel(idx, p2, lambda, {0.5, 0.53})) < 1e-12);

    // The ln(v - u) terms cancel.
    const double limit = -(2.0 * std::log(0.5) - std::log(0.1) + 1.0) / (4.0 * kPi);
    for (double w : {1e-3, 1e-5, 1e-7, 1e-9}) {
        const double g = gap_kernel(idx, p2, lambda, {0.5, 0.5 + w});
        CHECK(std::abs(g - limit) < 2.0 * w / lambda);
    }

    const auto p1 = ModelParams::make(1, 1.0);
    for (auto [u, v] : {std::pair{0.3, 0.32}, std::pair{0.01, 0.03}, std::pair{0.97, 0.99}, std::pair{0.3, 0.5}}) {
        const KernelPoint p{u, v};
        CHECK(rel(gap_kernel(MultiIndex({1}), p1, 0.05, p),
                  kernel_quadrature_oracle(MultiIndex({1}), p1, TimeRectangle::gap_domain(1.0, 0.05, p))) < 1e-7);
    }
    CHECK_THROWS_AS(gap_kernel(idx, p2, 0.5, {0.3, 0.6}), PreconditionError);
}

TEST_CASE("gap_kernel is continuous across the strip edge and bounded at the diagonal") {
    for (int d = 1; d <= 3; ++d) {
        const auto params = ModelParams::make(d, 1.0);
        for (int n = 1; n <= 3; ++n) {
            if (2 * n <= d - 2) continue;
            const auto idx = MultiIndex::axis(d, n);
            const double lambda = 0.1;
            for (double u : {0.2, 0.5, 0.8}) {
                const double inside = gap_kernel(idx, params, lambda, {u, u + lambda * (1.0 - 1e-12)});
                const double outside = gap_kernel(idx, params, lambda, {u, u + lambda * (1.0 + 1e-12)});
                CHECK(std::abs(inside - outside) < 1e-10);
                const double g9 = gap_kernel(idx, params, lambda, {u, u + 1e-9});
                const double g6 = gap_kernel(idx, params, lambda, {u, u + 1e-6});
                CHECK(std::isfinite(g9));
                CHECK(std::abs(g9 - g6) < 1e-3 * (1.0 + std::abs(g6)));
            }
        }
    }
}

TEST_CASE("cut_kernel") {
    const auto p2 = ModelParams::make(2, 1.0);
    const auto idx = MultiIndex({2, 0});
    CHECK(cut_kernel(idx, p2, 0.1, {0.3, 0.35}) == 0.0);
    CHECK(cut_kernel(idx, p2, 0.125, {0.25, 0.375}) == 0.0);  // Theta(0) = 0
    CHECK(cut_kernel(idx, p2, 0.1, {0.3, 0.6}) == phi_kernel(idx, p2, {0.3, 0.6}));
    CHECK(cut_kernel(idx, p2, 1e-12, {0.3, 0.30001}) == phi_kernel(idx, p2, {0.3, 0.30001}));
}

TEST_CASE("rho_bound") {
    CHECK(rho_bound(MultiIndex({1, 0}), 2, 0.1, {0.5, 0.55}) == doctest::Approx(std::abs(std::log(0.05)) / (4.0 * kPi)));
    CHECK(rho_bound(MultiIndex({1, 0}), 2, 0.1, {0.5, 0.55}) == doctest::Approx(0.2384).epsilon(1e-3));
    CHECK_THROWS_AS(rho_bound(MultiIndex({1, 0}), 2, 0.1, {0.5, 0.7}), PreconditionError);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double T = 1.0;
    int violations = 0;
    for (int s = 0; s < 3000; ++s) {
        const int d = 1 + s % 3;
        const auto params = ModelParams::make(d, T);
        const int n = std::max(1, d - 1) + static_cast<int>(U(rng) * 3);
        const auto all = enumerate_multi_indices(d, n);
        const auto& idx = all[static_cast<std::size_t>(U(rng) * all.size()) % all.size()];
        const double lambda = std::pow(10.0, -3.0 * U(rng)) * 0.4;
        const double w = lambda * std::max(1e-6, U(rng));
        // A third of the samples sit in the corner strips near t = 0 or t = T.
        double u = (T - w) * U(rng);
        if (s % 3 == 1) u = std::max(0.0, lambda - w) * U(rng);
        if (s % 3 == 2) u = T - w - std::max(0.0, lambda - w) * U(rng);
        const KernelPoint p{u, u + w};
        const double r = std::abs(rho_kernel(idx, params, lambda, p));
        const double b = rho_bound(idx, d, lambda, p);
        CHECK(b >= 0.0);
        if (r > b * (1.0 + 1e-9)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("odd raw orders vanish and kernel kinds round-trip") {
    const auto p2 = ModelParams::make(2, 1.0);
    for (auto kind : {KernelKind::phi, KernelKind::phi_eps, KernelKind::rho, KernelKind::gap, KernelKind::cut}) {
        CHECK(evaluate_kernel_raw(kind, MultiIndex({1, 2}), p2, 0.01, 0.1, {0.5, 0.55}).value == 0.0);
        CHECK(kernel_kind_from_string(to_string(kind)) == kind);
        const auto even = evaluate_kernel_raw(kind, MultiIndex({2, 0}), p2, 0.01, 0.1, {0.5, 0.55});
        CHECK(even.value == evaluate_kernel(kind, MultiIndex({1, 0}), p2, 0.01, 0.1, {0.5, 0.55}).value);
    }
    CHECK_THROWS_AS(kernel_kind_from_string("staircase"), PreconditionError);
}

TEST_CASE("multi-index normalization is 1/n!") {
    const auto p2 = ModelParams::make(2, 1.0);
    const KernelPoint p{0.2, 0.45};
    const double base = profile::phi(2, 4, 1.0, p);
    CHECK(phi_kernel(MultiIndex({4, 0}), p2, p) == doctest::Approx(base / 24.0).epsilon(1e-14));
    CHECK(phi_kernel(MultiIndex({2, 2}), p2, p) == doctest::Approx(base / 4.0).epsilon(1e-14));
    CHECK(phi_kernel(MultiIndex({1, 3}), p2, p) == doctest::Approx(base / 6.0).epsilon(1e-14));
}
