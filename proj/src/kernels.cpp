#include "silt/kernels.hpp"

#include "silt/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace silt {

std::string to_string(KernelKind k) {
    switch (k) {
        case KernelKind::psi: return "psi";
        case KernelKind::phi: return "phi";
        case KernelKind::phi_eps: return "phi_eps";
        case KernelKind::rho: return "rho";
        case KernelKind::gap: return "gap";
        case KernelKind::cut: return "cut";
    }
    return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "psi") return KernelKind::psi;
    if (name == "phi") return KernelKind::phi;
    if (name == "phi_eps") return KernelKind::phi_eps;
    if (name == "rho") return KernelKind::rho;
    if (name == "gap") return KernelKind::gap;
    if (name == "cut") return KernelKind::cut;
    throw PreconditionError("kernel kind is one of {psi, phi, phi_eps, rho, gap, cut}");
}

// --- domains ---------------------------------------------------------------

double TimeRectangle::tau_lo() const {
    double lo = std::max(0.0, t2_lo - t1_hi);
    if (min_lag) lo = std::max(lo, *min_lag);
    return lo;
}

double TimeRectangle::tau_hi() const {
    double hi = t2_hi - t1_lo;
    if (max_lag) hi = std::min(hi, *max_lag);
    return hi;
}

bool TimeRectangle::empty() const {
    if (!(t1_lo < t1_hi) || !(t2_lo < t2_hi)) return true;
    return !(tau_lo() < tau_hi());
}

TimeRectangle TimeRectangle::phi_domain(double T, KernelPoint p) { return {0.0, p.u, p.v, T, {}, {}}; }

TimeRectangle TimeRectangle::rho_domain(double T, double lambda, KernelPoint p) {
    return {std::max(0.0, p.v - lambda), p.u, p.v, T, lambda, {}};
}

TimeRectangle TimeRectangle::gap_domain(double T, double lambda, KernelPoint p) {
    return {0.0, p.u, p.v, T, {}, lambda};
}

namespace {

double half_dim(int d) { return 0.5 * d; }

// (2 pi)^{-d/2} (-1/2)^n, the psi prefactor without 1/n!.
double psi_prefactor(int d, int n) { return std::pow(2.0 * kPi, -half_dim(d)) * std::pow(-0.5, n); }

bool is_log_branch(int d, int n) { return d == 2 && n == 1; }

void check_order(int d, int n) {
    require(d >= 1, "d >= 1");
    require(n >= 1, "kernel order n >= 1 (order 0 is the expectation)");
    require(2 * n > d - 2, "2n > d - 2");
}

void check_index(const MultiIndex& idx, const ModelParams& params) {
    params.validate();
    require(idx.dim() == params.d, "multi-index length equals d");
    check_order(params.d, idx.order());
}

double integrate_psi(int d, int n, double coeff, const TimeRectangle& dom, const OracleOptions& opt) {
    require(opt.tol > 0.0, "tol > 0");
    require(opt.epsilon >= 0.0, "eps >= 0");
    if (dom.empty()) return 0.0;

    const double p = n + half_dim(d);
    const double eps = opt.epsilon;
    const double lo = dom.tau_lo();
    const double hi = dom.tau_hi();

    // Inner t1 integral at fixed tau = t2 - t1. The integrand is constant along
    // the section, so one Gauss-Kronrod cell resolves it.
    quad::Options inner_opt{opt.tol * 1e-2, 0.0, 64};
    auto inner = [&](double tau) {
        const double a = std::max(dom.t1_lo, dom.t2_lo - tau);
        const double b = std::min(dom.t1_hi, dom.t2_hi - tau);
        if (!(b > a)) return 0.0;
        const double profile = coeff * std::pow(eps + tau, -p);
        return quad::integrate([&](double) { return profile; }, a, b, inner_opt).value;
    };

    auto pts = quad::geometric_points(lo, hi, lo + eps);
    pts = quad::merge_points(std::move(pts), {dom.t2_lo - dom.t1_lo, dom.t2_hi - dom.t1_hi, dom.t2_lo - dom.t1_hi,
                                              dom.t2_hi - dom.t1_lo});
    quad::Options outer_opt{opt.tol, 0.0, opt.max_cells};
    return quad::integrate(inner, std::span<const double>(pts), outer_opt).value;
}

// psi integrated over the (t1, t2) set with t1 < u, t2 > v, kept lags, written
// in s = t2 - t1 - w. For fixed s the admissible t1 form an interval of length
// min(u, s) - max(0, s - b), with b = T - v, so only exact distances enter.
double section_integral(int d, int n, double eps, double u, double w, double b, double s_lo, double s_hi,
                        double tol) {
    s_hi = std::min(s_hi, u + b);
    if (!(s_hi > s_lo)) return 0.0;
    const double p = n + half_dim(d);
    auto f = [&](double s) {
        const double len = std::min(u, s) - std::max(0.0, s - b);
        return len > 0.0 ? std::pow(eps + w + s, -p) * len : 0.0;
    };
    auto pts = quad::geometric_points(s_lo, s_hi, s_lo + w + eps);
    pts = quad::merge_points(std::move(pts), {u, b});
    return psi_prefactor(d, n) * quad::integrate(f, std::span<const double>(pts), {tol, 0.0, 100'000}).value;
}

bool rho_is_interior(double T, double lambda, double u, double w) { return u + w >= lambda && u <= T - lambda; }

void check_uw(double T, double u, double w) {
    require(u >= 0.0, "0 <= u");
    require(w >= 0.0, "u <= v");
    require(u + w <= T * (1.0 + 1e-15), "v <= T");
}

}  // namespace

// --- profiles (n! = 1) -------------------------------------------------------

namespace profile {

double phi_uw(int d, int n, double T, double u, double w) {
    check_order(d, n);
    check_uw(T, u, w);
    const double c = psi_prefactor(d, n);
    const double v = u + w;
    if (is_log_branch(d, n)) {
        require(w > 0.0, "u < v (logarithmic singularity at u = v)");
        if (u == 0.0) return 0.0;
        return c * (std::log(v) + std::log(T - u) - std::log(w) - std::log(T));
    }
    const double q = n + half_dim(d);
    const double a = 2.0 - q;
    if (a < 0.0) require(w > 0.0, "u < v (pole at u = v for d + 2n > 4)");
    return c / ((q - 1.0) * (q - 2.0)) * (std::pow(T, a) - std::pow(v, a) - std::pow(T - u, a) + std::pow(w, a));
}

double phi_eps_uw(int d, int n, double T, double eps, double u, double w) {
    check_order(d, n);
    require(eps > 0.0, "eps > 0");
    check_uw(T, u, w);
    const double c = psi_prefactor(d, n);
    const double v = u + w;
    if (is_log_branch(d, n))
        return c * (std::log(v + eps) + std::log(T - u + eps) - std::log(w + eps) - std::log(T + eps));
    const double q = n + half_dim(d);
    const double a = 2.0 - q;
    return c / ((q - 1.0) * (q - 2.0)) *
           (std::pow(T + eps, a) - std::pow(v + eps, a) - std::pow(T - u + eps, a) + std::pow(w + eps, a));
}

double rho_interior(int d, int n, double lambda, double w) {
    check_order(d, n);
    require(lambda > 0.0, "Lambda > 0");
    require(w >= 0.0, "v - u >= 0");
    if (w >= lambda) return 0.0;
    const double c = psi_prefactor(d, n);
    if (is_log_branch(d, n)) {
        require(w > 0.0, "u < v (logarithmic singularity at u = v)");
        return c * (std::log(lambda) - std::log(w) - (lambda - w) / lambda);
    }
    const double q = n + half_dim(d);
    const double a = 2.0 - q;
    if (a < 0.0) require(w > 0.0, "u < v (pole at u = v for d + 2n > 4)");
    return c / (q - 1.0) * ((std::pow(w, a) - std::pow(lambda, a)) / (q - 2.0) + (w - lambda) * std::pow(lambda, a - 1.0));
}

double rho_uw(int d, int n, double T, double lambda, double u, double w, double tol) {
    check_order(d, n);
    require(lambda > 0.0, "Lambda > 0");
    require(lambda < T, "Lambda < T");
    check_uw(T, u, w);
    if (w >= lambda) return 0.0;
    if (rho_is_interior(T, lambda, u, w)) return rho_interior(d, n, lambda, w);
    if (n + half_dim(d) >= 2.0) require(w > 0.0, "u < v (rho is singular at u = v)");
    // Boundary strip: lags t2 - t1 in (w, Lambda).
    return section_integral(d, n, 0.0, u, w, std::max(0.0, T - u - w), 0.0, lambda - w, tol);
}

double gap_uw(int d, int n, double T, double lambda, double u, double w, double tol) {
    check_order(d, n);
    require(lambda > 0.0, "Lambda > 0");
    require(lambda < 0.5 * T, "Lambda < T/2");
    check_uw(T, u, w);
    if (w >= lambda) return phi_uw(d, n, T, u, w);
    const double c = psi_prefactor(d, n);
    const double v = u + w;
    if (rho_is_interior(T, lambda, u, w)) {
        // phi - rho with the w^{2-p} terms cancelled analytically.
        if (is_log_branch(d, n))
            return c * (std::log(v) + std::log(T - u) - std::log(T) - std::log(lambda) + (lambda - w) / lambda);
        const double q = n + half_dim(d);
        const double a = 2.0 - q;
        return c / ((q - 1.0) * (q - 2.0)) *
                   (std::pow(T, a) - std::pow(v, a) - std::pow(T - u, a) + std::pow(lambda, a)) -
               c / (q - 1.0) * (w - lambda) * std::pow(lambda, a - 1.0);
    }
    // Near t = 0 or t = T: integrate psi over the kept lags t2 - t1 >= Lambda.
    return section_integral(d, n, 0.0, u, w, std::max(0.0, T - u - w), lambda - w, T, tol);
}

double phi(int d, int n, double T, KernelPoint p) {
    p.validate(T);
    return phi_uw(d, n, T, p.u, p.width());
}

double phi_eps(int d, int n, double T, double eps, KernelPoint p) {
    p.validate(T);
    return phi_eps_uw(d, n, T, eps, p.u, p.width());
}

double rho(int d, int n, double T, double lambda, KernelPoint p, double tol) {
    p.validate(T);
    return rho_uw(d, n, T, lambda, p.u, p.width(), tol);
}

double gap(int d, int n, double T, double lambda, KernelPoint p, double tol) {
    p.validate(T);
    return gap_uw(d, n, T, lambda, p.u, p.width(), tol);
}

}  // namespace profile

// --- public kernels ------------------------------------------------------------

double psi_coefficient(const MultiIndex& n, int d, double t1, double t2) {
    require(n.dim() == d, "multi-index length equals d");
    require(t1 < t2, "t1 < t2");
    return psi_prefactor(d, n.order()) / n.factorial_double() * std::pow(t2 - t1, -(n.order() + half_dim(d)));
}

double phi_kernel(const MultiIndex& n, const ModelParams& params, KernelPoint p) {
    check_index(n, params);
    return profile::phi(params.d, n.order(), params.T, p) / n.factorial_double();
}

double phi_eps_kernel(const MultiIndex& n, const ModelParams& params, double eps, KernelPoint p) {
    check_index(n, params);
    return profile::phi_eps(params.d, n.order(), params.T, eps, p) / n.factorial_double();
}

double rho_kernel(const MultiIndex& n, const ModelParams& params, double lambda, KernelPoint p) {
    check_index(n, params);
    return profile::rho(params.d, n.order(), params.T, lambda, p, 1e-9) / n.factorial_double();
}

double gap_kernel(const MultiIndex& n, const ModelParams& params, double lambda, KernelPoint p) {
    check_index(n, params);
    return profile::gap(params.d, n.order(), params.T, lambda, p, 1e-9) / n.factorial_double();
}

double cut_kernel(const MultiIndex& n, const ModelParams& params, double lambda, KernelPoint p) {
    check_index(n, params);
    require(lambda >= 0.0, "Lambda >= 0");
    require(lambda < params.T, "Lambda < T");
    p.validate(params.T);
    if (!(p.width() > lambda)) return 0.0;
    return phi_kernel(n, params, p);
}

double rho_bound(const MultiIndex& n, int d, double lambda, KernelPoint p) {
    require(n.dim() == d, "multi-index length equals d");
    check_order(d, n.order());
    require(p.u < p.v, "u < v");
    const int order = n.order();
    const double w = p.width();
    if (is_log_branch(d, order)) {
        require(lambda > 0.0 && lambda <= 1.0, "0 < Lambda <= 1 for the logarithmic bound");
        require(w < std::min(lambda, 1.0), "v - u < min(Lambda, 1) for the logarithmic bound");
        return std::abs(std::log(w)) / (4.0 * kPi);
    }
    const double q = order + half_dim(d);
    const double scale = std::pow(2.0 * kPi, -half_dim(d)) / (std::pow(2.0, order) * n.factorial_double() * (q - 1.0));
    if (q > 2.0) return scale * std::pow(w, 2.0 - q) / (q - 2.0);
    // d + 2n < 4: the integral of (v - t1)^{1-q} over (v - Lambda, u) is bounded by
    // (Lambda^{2-q} - w^{2-q}) / (2 - q) instead.
    require(lambda > 0.0, "Lambda > 0");
    return scale * std::max(0.0, std::pow(lambda, 2.0 - q) - std::pow(w, 2.0 - q)) / (2.0 - q);
}

double kernel_quadrature_oracle(const MultiIndex& n, const ModelParams& params, const TimeRectangle& domain,
                                const OracleOptions& opt) {
    check_index(n, params);
    const double coeff = psi_prefactor(params.d, n.order()) / n.factorial_double();
    return integrate_psi(params.d, n.order(), coeff, domain, opt);
}

KernelValue evaluate_kernel(KernelKind kind, const MultiIndex& n, const ModelParams& params, double eps,
                            double lambda, KernelPoint p) {
    KernelValue out{0.0, n.order(), p};
    switch (kind) {
        case KernelKind::psi: out.value = psi_coefficient(n, params.d, p.u, p.v); break;
        case KernelKind::phi: out.value = phi_kernel(n, params, p); break;
        case KernelKind::phi_eps: out.value = phi_eps_kernel(n, params, eps, p); break;
        case KernelKind::rho: out.value = rho_kernel(n, params, lambda, p); break;
        case KernelKind::gap: out.value = gap_kernel(n, params, lambda, p); break;
        case KernelKind::cut: out.value = cut_kernel(n, params, lambda, p); break;
    }
    return out;
}

KernelValue evaluate_kernel_raw(KernelKind kind, const MultiIndex& raw, const ModelParams& params, double eps,
                                double lambda, KernelPoint p) {
    std::vector<int> half;
    for (int k : raw.entries()) {
        if (k % 2 != 0) return KernelValue{0.0, raw.order(), p};
        half.push_back(k / 2);
    }
    return evaluate_kernel(kind, MultiIndex(std::move(half)), params, eps, lambda, p);
}

}  // namespace silt
