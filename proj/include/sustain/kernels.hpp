#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "sustain/dense_matrix.hpp"
#include "sustain/model.hpp"
#include "sustain/sparse_tensor.hpp"

namespace sustain {

/// Matricized tensor times Khatri-Rao product for mode `mode`:
///   M(i, r) = sum over nonzeros x with index[mode] == i of
///             value(x) * prod_{m != mode} factors[m](index[m], r)
/// The Khatri-Rao product itself is never formed. Accumulation follows the
/// sorted nonzero order, so the result is deterministic. `factors` holds
/// one matrix per mode; factors[mode] is not read.
DenseMatrix mttkrp(const SparseTensor& t, std::span<const DenseMatrix> factors, std::size_t mode);

/// Sparse matrix times dense matrix; row order of the CSR data defines the
/// summation order.
DenseMatrix spmm(const CsrMatrix& x, const DenseMatrix& f);

/// F^T F.
DenseMatrix gram(const DenseMatrix& f);

/// Elementwise product of grams[m] for every m != mode. With two modes this
/// is a copy of the other Gram matrix.
DenseMatrix hadamard_excluding(std::span<const DenseMatrix> grams, std::size_t mode);

/// Elementwise product of gram(factors[m]) for every m != mode.
DenseMatrix gram_hadamard_excluding(std::span<const DenseMatrix> factors, std::size_t mode);

inline constexpr std::size_t kDefaultDenseCap = 10'000'000;

/// Dense reconstruction sum_r lambda(r) A1(:,r) o ... o Ad(:,r). Throws
/// CapacityError when the dense size exceeds `cap`.
DenseArray reconstruct(std::span<const DenseMatrix> factors, std::span<const double> lambda,
                       std::size_t cap = kDefaultDenseCap);
DenseArray reconstruct(const IntegerFactorModel& model, std::size_t cap = kDefaultDenseCap);

/// ||X - Xhat||_F^2 evaluated as ||X||^2 - 2<X, Xhat> + ||Xhat||^2 with the
/// inner product streamed over the nonzeros and ||Xhat||^2 taken from the
/// Hadamard product of the factor Gram matrices. Clamped at zero.
double residual_norm_sq(const SparseTensor& t, std::span<const DenseMatrix> factors,
                        std::span<const double> lambda);
double residual_norm_sq(const SparseTensor& t, const IntegerFactorModel& model);
double residual_norm_sq(const SparseTensor& t, const RealFactorModel& model);

/// 1 - ||X - Xhat||^2 / ||X||^2. Throws NumericError when ||X|| = 0.
double fit(const SparseTensor& t, std::span<const DenseMatrix> factors,
           std::span<const double> lambda);
double fit(const SparseTensor& t, const IntegerFactorModel& model);
double fit(const SparseTensor& t, const RealFactorModel& model);

/// Fit from a residual and the data norm.
double fit_from_residual(double residual_sq, double norm_x_sq);

} // namespace sustain
