#include "sustain/kernels.hpp"

#include <algorithm>
#include <string>

#include "sustain/error.hpp"

namespace sustain {

namespace {

void check_factor_shapes(const std::vector<std::size_t>& dims, std::span<const DenseMatrix> factors,
                         std::size_t rank, std::size_t skip_mode) {
    if (factors.size() != dims.size()) {
        throw DimensionError("expected " + std::to_string(dims.size()) + " factor matrices, got " +
                             std::to_string(factors.size()));
    }
    for (std::size_t m = 0; m < dims.size(); ++m) {
        if (m == skip_mode) continue;
        if (factors[m].rows() != dims[m] || factors[m].cols() != rank) {
            throw DimensionError("factor " + std::to_string(m) + " is " + std::to_string(factors[m].rows()) +
                                 "x" + std::to_string(factors[m].cols()) + ", expected " +
                                 std::to_string(dims[m]) + "x" + std::to_string(rank));
        }
    }
}

std::size_t shared_rank(std::span<const DenseMatrix> factors, std::size_t skip_mode) {
    for (std::size_t m = 0; m < factors.size(); ++m) {
        if (m != skip_mode) return factors[m].cols();
    }
    throw DimensionError("no factor matrices besides the excluded mode");
}

} // namespace

DenseMatrix mttkrp(const SparseTensor& t, std::span<const DenseMatrix> factors, std::size_t mode) {
    const std::size_t d = t.order();
    if (mode >= d) throw DimensionError("mttkrp: mode " + std::to_string(mode) + " out of range");
    if (factors.size() != d) throw DimensionError("mttkrp: factor count does not match tensor order");
    const std::size_t rank = shared_rank(factors, mode);
    check_factor_shapes(t.dims(), factors, rank, mode);

    DenseMatrix out(t.dim(mode), rank);
    std::vector<double> row(rank);
    for (std::size_t e = 0; e < t.nnz(); ++e) {
        const auto idx = t.index(e);
        std::fill(row.begin(), row.end(), t.value(e));
        for (std::size_t m = 0; m < d; ++m) {
            if (m == mode) continue;
            const auto frow = factors[m].row(idx[m]);
            for (std::size_t r = 0; r < rank; ++r) row[r] *= frow[r];
        }
        auto dst = out.row(idx[mode]);
        for (std::size_t r = 0; r < rank; ++r) dst[r] += row[r];
    }
    return out;
}

DenseMatrix spmm(const CsrMatrix& x, const DenseMatrix& f) {
    if (f.rows() != x.cols) {
        throw DimensionError("spmm: factor has " + std::to_string(f.rows()) + " rows, matrix has " +
                             std::to_string(x.cols) + " columns");
    }
    const std::size_t rank = f.cols();
    DenseMatrix out(x.rows, rank);
    for (std::size_t i = 0; i < x.rows; ++i) {
        auto dst = out.row(i);
        for (std::size_t p = x.row_ptr[i]; p < x.row_ptr[i + 1]; ++p) {
            const double v = x.values[p];
            const auto frow = f.row(x.col_idx[p]);
            for (std::size_t r = 0; r < rank; ++r) dst[r] += v * frow[r];
        }
    }
    return out;
}

DenseMatrix gram(const DenseMatrix& f) {
    const std::size_t rank = f.cols();
    DenseMatrix g(rank, rank);
    for (std::size_t i = 0; i < f.rows(); ++i) {
        const auto frow = f.row(i);
        for (std::size_t a = 0; a < rank; ++a) {
            const double fa = frow[a];
            for (std::size_t b = a; b < rank; ++b) g(a, b) += fa * frow[b];
        }
    }
    for (std::size_t a = 0; a < rank; ++a) {
        for (std::size_t b = 0; b < a; ++b) g(a, b) = g(b, a);
    }
    return g;
}

DenseMatrix hadamard_excluding(std::span<const DenseMatrix> grams, std::size_t mode) {
    if (grams.size() < 2) throw DimensionError("hadamard_excluding: need at least two modes");
    if (mode >= grams.size()) throw DimensionError("hadamard_excluding: mode out of range");
    std::size_t first = mode == 0 ? 1 : 0;
    DenseMatrix out = grams[first];
    for (std::size_t m = first + 1; m < grams.size(); ++m) {
        if (m == mode) continue;
        if (grams[m].rows() != out.rows() || grams[m].cols() != out.cols()) {
            throw DimensionError("hadamard_excluding: Gram shapes differ");
        }
        auto dst = out.values();
        const auto src = grams[m].values();
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] *= src[p];
    }
    return out;
}

DenseMatrix gram_hadamard_excluding(std::span<const DenseMatrix> factors, std::size_t mode) {
    if (factors.size() < 2) throw DimensionError("gram_hadamard_excluding: need at least two modes");
    if (mode >= factors.size()) throw DimensionError("gram_hadamard_excluding: mode out of range");
    // The excluded slot of `grams` is never read by hadamard_excluding.
    std::vector<DenseMatrix> grams(factors.size());
    for (std::size_t m = 0; m < factors.size(); ++m) {
        if (m != mode) grams[m] = gram(factors[m]);
    }
    return hadamard_excluding(grams, mode);
}

DenseArray reconstruct(std::span<const DenseMatrix> factors, std::span<const double> lambda, std::size_t cap) {
    if (factors.size() < 2) throw DimensionError("reconstruct: need at least two factors");
    const std::size_t rank = lambda.size();
    DenseArray out;
    std::size_t total = 1;
    for (const auto& f : factors) {
        if (f.cols() != rank) throw DimensionError("reconstruct: factor rank does not match lambda");
        if (f.rows() != 0 && total > cap / f.rows()) {
            throw CapacityError("reconstruct: dense size exceeds cap of " + std::to_string(cap));
        }
        total *= f.rows();
        out.dims.push_back(f.rows());
    }
    if (total > cap) throw CapacityError("reconstruct: dense size exceeds cap of " + std::to_string(cap));

    const std::size_t d = factors.size();
    out.values.assign(total, 0.0);
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> term(rank);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::copy(lambda.begin(), lambda.end(), term.begin());
        for (std::size_t n = 0; n < d; ++n) {
            const auto frow = factors[n].row(idx[n]);
            for (std::size_t r = 0; r < rank; ++r) term[r] *= frow[r];
        }
        double s = 0.0;
        for (double v : term) s += v;
        out.values[lin] = s;
        for (std::size_t n = d; n-- > 0;) {
            if (++idx[n] < out.dims[n]) break;
            idx[n] = 0;
        }
    }
    return out;
}

DenseArray reconstruct(const IntegerFactorModel& model, std::size_t cap) {
    model.check_invariants();
    const auto lambda = model.lambda_as_real();
    return reconstruct(model.factors, lambda, cap);
}

double residual_norm_sq(const SparseTensor& t, std::span<const DenseMatrix> factors,
                        std::span<const double> lambda) {
    const std::size_t d = t.order();
    const std::size_t rank = lambda.size();
    check_factor_shapes(t.dims(), factors, rank, d);

    double inner = 0.0;
    std::vector<double> term(rank);
    for (std::size_t e = 0; e < t.nnz(); ++e) {
        const auto idx = t.index(e);
        std::copy(lambda.begin(), lambda.end(), term.begin());
        for (std::size_t n = 0; n < d; ++n) {
            const auto frow = factors[n].row(idx[n]);
            for (std::size_t r = 0; r < rank; ++r) term[r] *= frow[r];
        }
        double s = 0.0;
        for (double v : term) s += v;
        inner += t.value(e) * s;
    }

    DenseMatrix grams = gram(factors[0]);
    for (std::size_t n = 1; n < d; ++n) {
        const DenseMatrix g = gram(factors[n]);
        auto dst = grams.values();
        const auto src = g.values();
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] *= src[p];
    }
    double model_sq = 0.0;
    for (std::size_t a = 0; a < rank; ++a) {
        for (std::size_t b = 0; b < rank; ++b) model_sq += lambda[a] * grams(a, b) * lambda[b];
    }
    return std::max(0.0, t.norm_sq() - 2.0 * inner + model_sq);
}

double residual_norm_sq(const SparseTensor& t, const IntegerFactorModel& model) {
    const auto lambda = model.lambda_as_real();
    return residual_norm_sq(t, model.factors, lambda);
}

double residual_norm_sq(const SparseTensor& t, const RealFactorModel& model) {
    return residual_norm_sq(t, model.factors, model.lambda);
}

double fit_from_residual(double residual_sq, double norm_x_sq) {
    if (!(norm_x_sq > 0.0)) throw NumericError("fit is undefined for an all-zero tensor");
    return 1.0 - residual_sq / norm_x_sq;
}

double fit(const SparseTensor& t, std::span<const DenseMatrix> factors, std::span<const double> lambda) {
    const double nx = t.norm_sq();
    if (!(nx > 0.0)) throw NumericError("fit is undefined for an all-zero tensor");
    return fit_from_residual(residual_norm_sq(t, factors, lambda), nx);
}

double fit(const SparseTensor& t, const IntegerFactorModel& model) {
    const auto lambda = model.lambda_as_real();
    return fit(t, model.factors, lambda);
}

double fit(const SparseTensor& t, const RealFactorModel& model) {
    return fit(t, model.factors, model.lambda);
}

} // namespace sustain
