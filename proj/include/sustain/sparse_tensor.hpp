#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sustain {

using Index = std::uint32_t;

/// Order-d coordinate-format sparse tensor with nonnegative finite values.
///
/// Entries are kept sorted lexicographically by index tuple and every tuple
/// appears once; reductions over the nonzeros therefore have one canonical
/// order. Indices are 0-based. A matrix is an order-2 tensor.
class SparseTensor {
public:
    SparseTensor() = default;

    /// Builds a tensor from flat coordinates (nnz * order, entry-major).
    /// Duplicate tuples are summed. Throws InvariantError on out-of-range
    /// indices or negative/non-finite values, DimensionError on bad shapes.
    static SparseTensor assemble(std::vector<std::size_t> dims,
                                 std::span<const Index> coords,
                                 std::span<const double> values);

    [[nodiscard]] std::size_t order() const noexcept { return dims_.size(); }
    [[nodiscard]] const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }

    [[nodiscard]] std::span<const Index> index(std::size_t entry) const noexcept {
        return {coords_.data() + entry * dims_.size(), dims_.size()};
    }
    [[nodiscard]] double value(std::size_t entry) const noexcept { return values_[entry]; }

    [[nodiscard]] std::span<const Index> coords() const noexcept { return coords_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// Product of dims; saturates at SIZE_MAX.
    [[nodiscard]] std::size_t dense_size() const noexcept;
    [[nodiscard]] double norm_sq() const noexcept;

    friend bool operator==(const SparseTensor&, const SparseTensor&) = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<Index> coords_;
    std::vector<double> values_;
};

/// Compressed-row view of an order-2 tensor, used by the matrix solver for
/// X*V and X^T*U products. Column indices within a row keep ascending order.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<Index> col_idx;
    std::vector<double> values;

    static CsrMatrix from_tensor(const SparseTensor& t);
    [[nodiscard]] CsrMatrix transposed() const;
};

} // namespace sustain
