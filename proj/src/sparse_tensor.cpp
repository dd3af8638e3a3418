#include "sustain/sparse_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sustain/error.hpp"

namespace sustain {

SparseTensor SparseTensor::assemble(std::vector<std::size_t> dims, std::span<const Index> coords,
                                    std::span<const double> values) {
    const std::size_t d = dims.size();
    if (d < 2) throw DimensionError("SparseTensor: order must be at least 2");
    for (std::size_t n = 0; n < d; ++n) {
        if (dims[n] == 0) throw DimensionError("SparseTensor: mode " + std::to_string(n) + " is empty");
        if (dims[n] > std::numeric_limits<Index>::max()) {
            throw DimensionError("SparseTensor: mode " + std::to_string(n) + " exceeds index range");
        }
    }
    if (coords.size() != values.size() * d) {
        throw DimensionError("SparseTensor: coordinate count does not match value count");
    }

    const std::size_t count = values.size();
    for (std::size_t e = 0; e < count; ++e) {
        const double v = values[e];
        if (!std::isfinite(v)) throw InvariantError("SparseTensor: non-finite value at entry " + std::to_string(e));
        if (v < 0.0) throw InvariantError("SparseTensor: negative value at entry " + std::to_string(e));
        for (std::size_t n = 0; n < d; ++n) {
            if (coords[e * d + n] >= dims[n]) {
                throw InvariantError("SparseTensor: index out of range at entry " + std::to_string(e) +
                                     ", mode " + std::to_string(n));
            }
        }
    }

    std::vector<std::size_t> perm(count);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto tuple_less = [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(coords.begin() + a * d, coords.begin() + (a + 1) * d,
                                            coords.begin() + b * d, coords.begin() + (b + 1) * d);
    };
    std::stable_sort(perm.begin(), perm.end(), tuple_less);

    SparseTensor t;
    t.dims_ = std::move(dims);
    t.coords_.reserve(count * d);
    t.values_.reserve(count);
    for (std::size_t p = 0; p < count; ++p) {
        const std::size_t e = perm[p];
        const auto tuple = coords.subspan(e * d, d);
        const bool same = !t.values_.empty() &&
                          std::equal(tuple.begin(), tuple.end(), t.coords_.end() - static_cast<std::ptrdiff_t>(d));
        if (same) {
            t.values_.back() += values[e];
        } else {
            t.coords_.insert(t.coords_.end(), tuple.begin(), tuple.end());
            t.values_.push_back(values[e]);
        }
    }
    return t;
}

std::size_t SparseTensor::dense_size() const noexcept {
    std::size_t total = 1;
    for (std::size_t n : dims_) {
        if (n != 0 && total > std::numeric_limits<std::size_t>::max() / n) {
            return std::numeric_limits<std::size_t>::max();
        }
        total *= n;
    }
    return total;
}

double SparseTensor::norm_sq() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
}

CsrMatrix CsrMatrix::from_tensor(const SparseTensor& t) {
    if (t.order() != 2) throw DimensionError("CsrMatrix: tensor is not a matrix");
    CsrMatrix m;
    m.rows = t.dim(0);
    m.cols = t.dim(1);
    m.row_ptr.assign(m.rows + 1, 0);
    m.col_idx.reserve(t.nnz());
    m.values.reserve(t.nnz());
    // Entries are already sorted by (row, col).
    for (std::size_t e = 0; e < t.nnz(); ++e) {
        const auto idx = t.index(e);
        ++m.row_ptr[idx[0] + 1];
        m.col_idx.push_back(idx[1]);
        m.values.push_back(t.value(e));
    }
    for (std::size_t i = 0; i < m.rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

CsrMatrix CsrMatrix::transposed() const {
    CsrMatrix tr;
    tr.rows = cols;
    tr.cols = rows;
    tr.row_ptr.assign(cols + 1, 0);
    tr.col_idx.resize(col_idx.size());
    tr.values.resize(values.size());
    for (Index j : col_idx) ++tr.row_ptr[j + 1];
    for (std::size_t j = 0; j < cols; ++j) tr.row_ptr[j + 1] += tr.row_ptr[j];
    std::vector<std::size_t> next(tr.row_ptr.begin(), tr.row_ptr.end() - 1);
    // Rows are visited in ascending order, so each transposed row stays sorted.
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            const std::size_t dst = next[col_idx[p]]++;
            tr.col_idx[dst] = static_cast<Index>(i);
            tr.values[dst] = values[p];
        }
    }
    return tr;
}

} // namespace sustain
