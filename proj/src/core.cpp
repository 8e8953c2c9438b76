#include "silt/core.hpp"

#include <algorithm>
#include <numeric>

namespace silt {

ModelParams ModelParams::make(int d, double T, int N) {
    ModelParams p{d, T, N};
    p.validate();
    return p;
}

void ModelParams::validate() const {
    require(d >= 1, "d >= 1");
    require(T > 0.0, "T > 0");
    require(N >= 0, "N >= 0");
    require(2 * N > d - 2, "2N > d - 2");
}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    require(!entries_.empty(), "multi-index length d >= 1");
    for (int n : entries_) require(n >= 0, "multi-index entries are nonnegative");
    order_ = std::accumulate(entries_.begin(), entries_.end(), 0);
}

MultiIndex MultiIndex::axis(int d, int n) {
    require(d >= 1, "d >= 1");
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    e[0] = n;
    return MultiIndex(std::move(e));
}

BigInt MultiIndex::factorial() const {
    BigInt r = 1;
    for (int n : entries_) r *= silt::factorial(n);
    return r;
}

BigInt MultiIndex::factorial_2n() const {
    BigInt r = 1;
    for (int n : entries_) r *= silt::factorial(2 * n);
    return r;
}

double MultiIndex::factorial_double() const { return to_double(factorial()); }

void KernelPoint::validate(double T) const {
    require(u >= 0.0, "0 <= u");
    require(u <= v, "u <= v");
    require(v <= T, "v <= T");
}

BigInt factorial(int n) {
    require(n >= 0, "factorial of a nonnegative integer");
    BigInt r = 1;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

BigInt binomial(int n, int k) {
    require(n >= 0, "binomial with n >= 0");
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

namespace {

void enumerate_into(int d, int remaining, std::vector<int>& prefix, std::vector<MultiIndex>& out) {
    if (static_cast<int>(prefix.size()) == d - 1) {
        prefix.push_back(remaining);
        out.emplace_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        prefix.push_back(k);
        enumerate_into(d, remaining - k, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<MultiIndex> enumerate_multi_indices(int d, int n) {
    require(d >= 1, "d >= 1");
    require(n >= 0, "n >= 0");
    std::vector<MultiIndex> out;
    std::vector<int> prefix;
    prefix.reserve(static_cast<std::size_t>(d));
    enumerate_into(d, n, prefix, out);
    return out;
}

BigInt chaos_weight(int d, int order) {
    require(d >= 1, "d >= 1");
    require(order >= 0, "n >= 0");
    // d-fold Cauchy power of the central binomial sequence, truncated at `order`.
    std::vector<BigInt> central(static_cast<std::size_t>(order) + 1);
    for (int k = 0; k <= order; ++k) central[static_cast<std::size_t>(k)] = binomial(2 * k, k);

    std::vector<BigInt> acc = central;
    for (int dim = 2; dim <= d; ++dim) {
        std::vector<BigInt> next(acc.size(), BigInt(0));
        for (std::size_t i = 0; i < acc.size(); ++i)
            for (std::size_t j = 0; i + j < acc.size(); ++j) next[i + j] += acc[i] * central[j];
        acc = std::move(next);
    }
    return acc[static_cast<std::size_t>(order)];
}

double to_double(const BigInt& x) { return x.convert_to<double>(); }

}  // namespace silt
