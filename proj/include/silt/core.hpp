#pragma once

// Domain types shared by every module: model parameters, chaos multi-indices,
// kernel evaluation points, and the exact combinatorics behind the norm series.

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace silt {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr const char* kVersion = "0.1.0";

/// A violated precondition. The message names the invariant that failed.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An adaptive quadrature that exhausted its budget or stalled on round-off.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A Monte Carlo weight left the representable range.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Throws PreconditionError(message) unless `condition` holds.
inline void require(bool condition, const std::string& message) {
    if (!condition) throw PreconditionError(message);
}

/// Dimension d, horizon T and chaos truncation N of the truncated local time.
struct ModelParams {
    int d = 2;
    double T = 1.0;
    int N = 1;

    /// Smallest truncation order N with 2N > d - 2.
    static int minimal_truncation(int d) { return d / 2; }

    static ModelParams make(int d, double T) { return make(d, T, minimal_truncation(d)); }
    static ModelParams make(int d, double T, int N);

    void validate() const;
};

/// d-tuple (n_1, ..., n_d) of per-coordinate chaos orders.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries);

    /// The index (n, 0, ..., 0) of total order n in dimension d.
    static MultiIndex axis(int d, int n);

    int dim() const { return static_cast<int>(entries_.size()); }
    int order() const { return order_; }
    const std::vector<int>& entries() const { return entries_; }
    int operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }

    /// n! = prod n_i!
    BigInt factorial() const;
    /// (2n)! = prod (2 n_i)!
    BigInt factorial_2n() const;
    double factorial_double() const;

    bool operator==(const MultiIndex&) const = default;
    auto operator<=>(const MultiIndex&) const = default;

private:
    std::vector<int> entries_;
    int order_ = 0;
};

/// (u, v) = (min, max) of the 2n kernel arguments.
struct KernelPoint {
    double u = 0.0;
    double v = 0.0;

    double width() const { return v - u; }
    void validate(double T) const;
};

BigInt factorial(int n);
BigInt binomial(int n, int k);

/// All d-tuples of nonnegative integers summing to n, in lexicographic order.
std::vector<MultiIndex> enumerate_multi_indices(int d, int n);

/// sum over |n| = order of prod_i C(2 n_i, n_i); the order-th coefficient of
/// (1 - 4x)^{-d/2}. This is the multi-index sum of (2n)!/(n!)^2.
BigInt chaos_weight(int d, int order);

double to_double(const BigInt& x);

}  // namespace silt
