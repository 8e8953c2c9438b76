#pragma once

// Chaos kernels of the (regularized) self-intersection local time.
//
// The order-2n kernel of delta(B(t2) - B(t1)) is
//     psi_2n(u_1..u_2n; t1, t2) = c_n (t2 - t1)^{-(n + d/2)} prod 1[t1,t2](u_k),
//     c_n = (2 pi)^{-d/2} (-1/2)^n / n!,
// and every derived kernel is an integral of psi over some set of (t1, t2).
// Because the indicator product only sees min/max of the arguments, all kernels
// are evaluated as functions of a KernelPoint (u, v).

#include "silt/core.hpp"

#include <optional>
#include <string>

namespace silt {

/// Integration domain in the (t1, t2) plane, optionally cut by a lag band.
struct TimeRectangle {
    double t1_lo = 0.0, t1_hi = 0.0;
    double t2_lo = 0.0, t2_hi = 0.0;
    std::optional<double> max_lag;  // keep t2 - t1 <= max_lag
    std::optional<double> min_lag;  // keep t2 - t1 >= min_lag

    /// Range of tau = t2 - t1 over the domain (restricted to tau >= 0).
    double tau_lo() const;
    double tau_hi() const;
    bool empty() const;

    /// (0, u) x (v, T): the full kernel of the truncated local time.
    static TimeRectangle phi_domain(double T, KernelPoint p);
    /// Dark strip region whose integral is rho: t1 in (max(0, v - Lambda), u),
    /// t2 in (v, min(T, t1 + Lambda)).
    static TimeRectangle rho_domain(double T, double lambda, KernelPoint p);
    /// Light region kept by the gap regularization: (0, u) x (v, T), t2 - t1 >= Lambda.
    static TimeRectangle gap_domain(double T, double lambda, KernelPoint p);
};

enum class KernelKind { psi, phi, phi_eps, rho, gap, cut };

std::string to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& name);

struct KernelValue {
    double value = 0.0;
    int order = 0;
    KernelPoint point;
};

double psi_coefficient(const MultiIndex& n, int d, double t1, double t2);

double phi_kernel(const MultiIndex& n, const ModelParams& params, KernelPoint p);
double phi_eps_kernel(const MultiIndex& n, const ModelParams& params, double eps, KernelPoint p);
double rho_kernel(const MultiIndex& n, const ModelParams& params, double lambda, KernelPoint p);
double gap_kernel(const MultiIndex& n, const ModelParams& params, double lambda, KernelPoint p);
double cut_kernel(const MultiIndex& n, const ModelParams& params, double lambda, KernelPoint p);

/// Right-hand side of the strip estimate |rho| <= bound. Lambda only enters for
/// the logarithmic case (where it must be <= 1) and for d + 2n < 4.
double rho_bound(const MultiIndex& n, int d, double lambda, KernelPoint p);

struct OracleOptions {
    double tol = 1e-9;
    double epsilon = 0.0;  // integrate (eps + t2 - t1)^{-(n + d/2)} instead
    std::size_t max_cells = 1'000'000;
};

/// Adaptive 2-D quadrature of psi_2n over `domain`, in the coordinates
/// (t1, tau = t2 - t1) with geometric refinement toward the tau singularity.
/// Throws ConvergenceError when the cell budget is exhausted.
double kernel_quadrature_oracle(const MultiIndex& n, const ModelParams& params, const TimeRectangle& domain,
                                const OracleOptions& opt = {});

/// Evaluates `kind` at `p`. `eps` is used by phi_eps, `lambda` by rho/gap/cut;
/// psi is evaluated at (t1, t2) = (u, v).
KernelValue evaluate_kernel(KernelKind kind, const MultiIndex& n, const ModelParams& params, double eps,
                            double lambda, KernelPoint p);

/// Same as evaluate_kernel, but `raw` indexes the kernel by its full per-coordinate
/// orders (2n_1, ..., 2n_d). Any odd entry selects a vanishing kernel.
KernelValue evaluate_kernel_raw(KernelKind kind, const MultiIndex& raw, const ModelParams& params, double eps,
                                double lambda, KernelPoint p);

// Kernels with the 1/n! factor removed: kernel(n) = profile(order(n)) / n!.
// Norm series use these together with chaos_weight. The *_uw variants take the
// width w = v - u directly, so they stay exact when w is below the resolution
// of u.
namespace profile {

double phi(int d, int n, double T, KernelPoint p);
double phi_eps(int d, int n, double T, double eps, KernelPoint p);
double rho(int d, int n, double T, double lambda, KernelPoint p, double tol = 1e-10);
/// rho for the interior configuration; depends on the width w = v - u only.
double rho_interior(int d, int n, double lambda, double width);
double gap(int d, int n, double T, double lambda, KernelPoint p, double tol = 1e-10);

double phi_uw(int d, int n, double T, double u, double w);
double phi_eps_uw(int d, int n, double T, double eps, double u, double w);
double rho_uw(int d, int n, double T, double lambda, double u, double w, double tol = 1e-10);
double gap_uw(int d, int n, double T, double lambda, double u, double w, double tol = 1e-10);

}  // namespace profile

}  // namespace silt
