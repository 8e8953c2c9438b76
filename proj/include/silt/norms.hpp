#pragma once

// L2 norms of chaos kernels and the series built from them.
//
// A kernel f of order 2n that depends only on (u, v) = (min, max) has
//     ||f||^2_{L2([0,T]^{2n})} = int_{0<u<v<T} 2n(2n-1) (v-u)^{2n-2} f(u,v)^2 du dv,
// since the remaining 2n-2 arguments range freely over (u, v). Summing
// (2n)! ||f_n||^2 over all multi-indices of order n collapses to
// chaos_weight(d, n) times the squared norm of the n!-free profile.

#include "silt/core.hpp"
#include "silt/expectations.hpp"

#include <vector>

namespace silt {

struct OrderTerm {
    int n = 0;
    double contribution = 0.0;
};

/// A truncated chaos series: per-order terms, their sum, and a certified
/// bound on everything beyond the last computed order.
struct ChaosSeries {
    std::vector<OrderTerm> per_order;
    double total = 0.0;
    double truncation_bound = 0.0;
};

/// ||L^(2N) - L^(2N)(Lambda)||^2 as a chaos series.
struct ChaosDistance : ChaosSeries {
    double lambda = 0.0;
    int n_min = 0;
    int n_max = 0;
};

/// Squared L2 norm of the n!-free rho profile of order n (multiply by
/// chaos_weight(d, n) for the per-order contribution). d must be 1 or 2.
double rho_l2_norm_sq(int n, const ModelParams& params, double lambda);

/// Term-by-term majorant of the order-n contribution obtained from the
/// pointwise rho bound; requires n + d/2 > 2.
double rho_majorant_term(int n, const ModelParams& params, double lambda);

/// Orders n_min = params.N .. n_max. For N = 0 the order-0 term is the squared
/// difference of the expectations.
ChaosDistance chaos_distance_sq(const ModelParams& params, double lambda, int n_max);

struct RateRow {
    double lambda = 0.0;
    double distance = 0.0;    // D(Lambda)
    double ratio = 0.0;       // D / (T Lambda ln^2 Lambda)
    double tail_bound = 0.0;  // truncation bound of D
};

struct RateTable {
    std::vector<RateRow> rows;

    double max_ratio() const;
    double min_ratio() const;
    /// max/min of the ratio column is at most `limit`.
    bool bounded(double limit = 3.0) const;
};

/// lambdas: strictly decreasing in (0, T/2), at least 5 points over at least
/// two decades.
RateTable rate_verification(const ModelParams& params, const std::vector<double>& lambdas, int n_max);

/// Variance of the centered regularized local time, sum_{n>=1} (2n)! ||phi_n||^2
/// with phi_eps (gaussian) or the gap kernel over the whole simplex.
ChaosSeries phi_centered_variance_series(const ModelParams& params, const RegularizationSpec& reg, int n_max);
double phi_centered_variance(const ModelParams& params, const RegularizationSpec& reg, int n_max);

}  // namespace silt
