#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sustain/dense_matrix.hpp"

namespace sustain {

/// Integer-constrained Kruskal model: sum_r lambda(r) * A1(:,r) o ... o Ad(:,r)
/// with factor entries in {0..tau} and lambda in {1, 2, ...}.
struct IntegerFactorModel {
    std::vector<DenseMatrix> factors;
    std::vector<std::int64_t> lambda;
    int tau = 5;

    [[nodiscard]] std::size_t order() const noexcept { return factors.size(); }
    [[nodiscard]] std::size_t rank() const noexcept { return lambda.size(); }
    [[nodiscard]] std::vector<std::size_t> dims() const;
    [[nodiscard]] std::vector<double> lambda_as_real() const;

    /// Throws InvariantError naming the first violated invariant: integral
    /// entries in {0..tau}, lambda >= 1, no all-zero factor column, matching
    /// ranks.
    void check_invariants() const;
    [[nodiscard]] bool satisfies_invariants() const noexcept;

    friend bool operator==(const IntegerFactorModel&, const IntegerFactorModel&) = default;
};

/// Nonnegative real Kruskal model produced by the HALS baselines.
struct RealFactorModel {
    std::vector<DenseMatrix> factors;
    std::vector<double> lambda;

    [[nodiscard]] std::size_t order() const noexcept { return factors.size(); }
    [[nodiscard]] std::size_t rank() const noexcept { return lambda.size(); }
};

/// Dense row-major array (last index fastest) for tiny reconstructions.
struct DenseArray {
    std::vector<std::size_t> dims;
    std::vector<double> values;

    [[nodiscard]] std::size_t linear_index(const std::vector<std::size_t>& idx) const;
};

} // namespace sustain
