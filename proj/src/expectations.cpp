#include "silt/expectations.hpp"

#include <algorithm>
#include <cmath>

namespace silt {

std::string to_string(Regularization r) {
    switch (r) {
        case Regularization::gaussian: return "gaussian";
        case Regularization::gap: return "gap";
        case Regularization::cut: return "cut";
        case Regularization::combined: return "combined";
    }
    return "unknown";
}

Regularization regularization_from_string(const std::string& name) {
    if (name == "gaussian") return Regularization::gaussian;
    if (name == "gap") return Regularization::gap;
    if (name == "cut") return Regularization::cut;
    if (name == "combined") return Regularization::combined;
    throw PreconditionError("regularization is one of {gaussian, gap, cut, combined}");
}

void RegularizationSpec::validate(const ModelParams& params) const {
    if (uses_epsilon()) require(epsilon > 0.0 || (params.d == 1 && variant == Regularization::gaussian),
                                "eps > 0 for the gaussian/combined regularization");
    if (uses_lambda()) {
        require(lambda > 0.0, "Lambda > 0 for the gap/cut/combined regularization");
        require(lambda < params.T, "Lambda < T");
    }
}

namespace {

// Antiderivative of (T + eps - s) s^{-d/2}, the integrand after s = eps + tau.
double antiderivative(int d, double top, double s) {
    const double h = 0.5 * d;
    const double first = (d == 2) ? std::log(s) : std::pow(s, 1.0 - h) / (1.0 - h);
    const double second = (d == 4) ? std::log(s) : std::pow(s, 2.0 - h) / (2.0 - h);
    return top * first - second;
}

}  // namespace

double expected_combined_lt(const ModelParams& params, double eps, double lambda) {
    params.validate();
    require(eps >= 0.0, "eps >= 0");
    require(lambda >= 0.0, "Lambda >= 0");
    require(lambda <= params.T, "Lambda <= T");
    require(eps + lambda > 0.0 || params.d == 1, "eps > 0 or Lambda > 0 for d >= 2 (divergent expectation)");
    if (lambda == params.T) return 0.0;

    const int d = params.d;
    const double T = params.T;
    const double lo = eps + lambda;
    const double hi = eps + T;
    double integral = 0.0;
    if (lo == 0.0) {
        // d == 1, no regularization: the s^{1/2} terms vanish at 0.
        integral = antiderivative(d, hi, hi);
    } else {
        integral = antiderivative(d, hi, hi) - antiderivative(d, hi, lo);
    }
    return std::pow(2.0 * kPi, -0.5 * d) * integral;
}

double expected_gaussian_lt(const ModelParams& params, double eps) {
    params.validate();
    require(eps > 0.0 || (params.d == 1 && eps == 0.0), "eps > 0 for d >= 2 (eps = 0 only for d = 1)");
    return expected_combined_lt(params, eps, 0.0);
}

double expected_gap_lt(const ModelParams& params, double lambda) {
    params.validate();
    require(lambda > 0.0, "0 < Lambda");
    require(lambda <= params.T, "Lambda <= T");
    return expected_combined_lt(params, 0.0, lambda);
}

double expected_lt(const ModelParams& params, const RegularizationSpec& reg) {
    reg.validate(params);
    switch (reg.variant) {
        case Regularization::gaussian: return expected_gaussian_lt(params, reg.epsilon);
        case Regularization::gap: return expected_gap_lt(params, reg.lambda);
        case Regularization::combined: return expected_combined_lt(params, reg.epsilon, reg.lambda);
        case Regularization::cut:
            // The cut variant only modifies chaos orders n >= 1.
            require(params.d == 1, "the unregularized expectation is finite only for d = 1");
            return expected_combined_lt(params, 0.0, 0.0);
    }
    return 0.0;
}

double divergence_constant_k(const ModelParams& params, double lambda) {
    params.validate();
    require(params.d == 2, "divergence constant k is defined for d = 2");
    require(lambda > 0.0 && lambda < 1.0, "0 < Lambda < 1");
    require(lambda < params.T, "Lambda < T");
    const double T = params.T;
    return std::max(0.0, (T * std::log(T) - T + lambda) / (2.0 * kPi));
}

}  // namespace silt
