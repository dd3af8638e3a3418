#include "sustain/model.hpp"

#include <cmath>
#include <string>

#include "sustain/error.hpp"

namespace sustain {

std::vector<std::size_t> IntegerFactorModel::dims() const {
    std::vector<std::size_t> out;
    out.reserve(factors.size());
    for (const auto& f : factors) out.push_back(f.rows());
    return out;
}

std::vector<double> IntegerFactorModel::lambda_as_real() const {
    return {lambda.begin(), lambda.end()};
}

void IntegerFactorModel::check_invariants() const {
    if (tau < 1) throw InvariantError("model: tau must be >= 1");
    if (factors.size() < 2) throw InvariantError("model: order must be >= 2");
    const std::size_t r = lambda.size();
    if (r == 0) throw InvariantError("model: rank must be >= 1");
    for (std::size_t k = 0; k < r; ++k) {
        if (lambda[k] < 1) throw InvariantError("model: lambda(" + std::to_string(k) + ") < 1");
    }
    for (std::size_t n = 0; n < factors.size(); ++n) {
        const DenseMatrix& f = factors[n];
        if (f.cols() != r) {
            throw InvariantError("model: factor " + std::to_string(n) + " has " + std::to_string(f.cols()) +
                                 " columns, rank is " + std::to_string(r));
        }
        if (f.rows() == 0) throw InvariantError("model: factor " + std::to_string(n) + " has no rows");
        for (double v : f.values()) {
            if (!(v >= 0.0 && v <= tau) || std::floor(v) != v) {
                throw InvariantError("model: factor " + std::to_string(n) + " has entry outside {0.." +
                                     std::to_string(tau) + "}");
            }
        }
        for (std::size_t k = 0; k < r; ++k) {
            bool nonzero = false;
            for (std::size_t i = 0; i < f.rows() && !nonzero; ++i) nonzero = f(i, k) != 0.0;
            if (!nonzero) {
                throw InvariantError("model: factor " + std::to_string(n) + " column " + std::to_string(k) +
                                     " is all zero");
            }
        }
    }
}

bool IntegerFactorModel::satisfies_invariants() const noexcept {
    try {
        check_invariants();
        return true;
    } catch (const InvariantError&) {
        return false;
    }
}

std::size_t DenseArray::linear_index(const std::vector<std::size_t>& idx) const {
    std::size_t lin = 0;
    for (std::size_t n = 0; n < dims.size(); ++n) lin = lin * dims[n] + idx[n];
    return lin;
}

} // namespace sustain
