#pragma once

// Expectations of the regularized self-intersection local time. Every variant
// reduces to (2 pi)^{-d/2} int_gap^T (T - tau) (eps + tau)^{-d/2} dtau, which is
// evaluated here in closed form.

#include "silt/core.hpp"

#include <string>

namespace silt {

enum class Regularization { gaussian, gap, cut, combined };

std::string to_string(Regularization r);
Regularization regularization_from_string(const std::string& name);

/// Which regularization is applied and with which scale. `epsilon` is the
/// variance of the Gaussian mollifier, `lambda` the width of the excised strip.
struct RegularizationSpec {
    Regularization variant = Regularization::gaussian;
    double epsilon = 0.0;
    double lambda = 0.0;

    static RegularizationSpec gaussian(double eps) { return {Regularization::gaussian, eps, 0.0}; }
    static RegularizationSpec gap(double lambda) { return {Regularization::gap, 0.0, lambda}; }
    static RegularizationSpec cut(double lambda) { return {Regularization::cut, 0.0, lambda}; }
    static RegularizationSpec combined(double eps, double lambda) { return {Regularization::combined, eps, lambda}; }

    bool uses_epsilon() const { return variant == Regularization::gaussian || variant == Regularization::combined; }
    bool uses_lambda() const { return variant != Regularization::gaussian; }
    /// Strip width actually excised (0 for the pure Gaussian variant).
    double gap_width() const { return uses_lambda() ? lambda : 0.0; }
    double mollifier() const { return uses_epsilon() ? epsilon : 0.0; }

    void validate(const ModelParams& params) const;
};

/// E(L_eps). eps == 0 is allowed only for d == 1.
double expected_gaussian_lt(const ModelParams& params, double eps);

/// E(L(Lambda)) for the gap-regularized local time, 0 < Lambda <= T.
double expected_gap_lt(const ModelParams& params, double lambda);

/// Expectation with both a mollifier eps >= 0 and an excised strip 0 <= Lambda <= T.
double expected_combined_lt(const ModelParams& params, double eps, double lambda);

/// Expectation matching a RegularizationSpec (cut has the unregularized mean).
double expected_lt(const ModelParams& params, const RegularizationSpec& reg);

/// Smallest k >= 0 with E(L(Lambda)) <= k + (T / 2 pi) |ln Lambda|; d == 2 only.
double divergence_constant_k(const ModelParams& params, double lambda);

}  // namespace silt
