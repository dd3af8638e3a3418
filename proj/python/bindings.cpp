#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>

#include "sustain/error.hpp"
#include "sustain/evaluation.hpp"
#include "sustain/io.hpp"
#include "sustain/kernels.hpp"
#include "sustain/solver.hpp"

namespace py = pybind11;
using namespace sustain;

namespace {

using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

SparseTensor tensor_from_coo(std::vector<std::size_t> dims, const IndexArray& coords, const RealArray& values) {
    const auto d = dims.size();
    if (coords.ndim() != 2 || static_cast<std::size_t>(coords.shape(1)) != d)
        throw DimensionError("coords must have shape (nnz, order)");
    if (values.ndim() != 1 || values.shape(0) != coords.shape(0))
        throw DimensionError("values must have shape (nnz,)");
    std::vector<Index> flat(static_cast<std::size_t>(coords.size()));
    const auto* src = coords.data();
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (src[i] < 0 || src[i] > std::numeric_limits<Index>::max()) throw InvariantError("coordinate out of range");
        flat[i] = static_cast<Index>(src[i]);
    }
    return SparseTensor::assemble(std::move(dims), flat,
                                  std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

py::array_t<double> matrix_to_numpy(const DenseMatrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) view(i, j) = m(i, j);
    return out;
}

DenseMatrix matrix_from_numpy(const RealArray& a) {
    if (a.ndim() != 2) throw DimensionError("factor matrices must be two-dimensional");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

InitScheme parse_init(const std::string& name) {
    static const std::map<std::string, InitScheme> schemes{{"random", InitScheme::random},
                                                           {"sampling", InitScheme::random_sampling},
                                                           {"round", InitScheme::round_seed},
                                                           {"scale-round", InitScheme::scale_round_seed},
                                                           {"explicit", InitScheme::explicit_model}};
    const auto it = schemes.find(name);
    if (it == schemes.end()) throw py::value_error("unknown init scheme: " + name);
    return it->second;
}

py::dict trace_to_dict(const SolverTrace& t) {
    py::dict d;
    d["objective"] = t.objective;
    d["fit"] = t.fit;
    d["seconds"] = t.seconds;
    d["zero_lock_repairs"] = t.zero_lock_repairs;
    d["converged"] = t.converged;
    d["warnings"] = t.warnings;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Integer-constrained sparse matrix and tensor factorization";

    py::register_exception<Error>(m, "SustainError", PyExc_RuntimeError);

    py::class_<SparseTensor>(m, "Tensor")
        .def(py::init(&tensor_from_coo), py::arg("dims"), py::arg("coords"), py::arg("values"),
             "Builds a tensor from 0-based (nnz, order) coordinates; duplicates are summed.")
        .def_property_readonly("dims", &SparseTensor::dims)
        .def_property_readonly("order", &SparseTensor::order)
        .def_property_readonly("nnz", &SparseTensor::nnz)
        .def("norm_sq", &SparseTensor::norm_sq)
        .def("coords",
             [](const SparseTensor& t) {
                 py::array_t<std::int64_t> out({t.nnz(), t.order()});
                 auto* dst = out.mutable_data();
                 for (std::size_t i = 0; i < t.coords().size(); ++i) dst[i] = t.coords()[i];
                 return out;
             })
        .def("values",
             [](const SparseTensor& t) {
                 py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(t.nnz())});
                 std::copy(t.values().begin(), t.values().end(), out.mutable_data());
                 return out;
             })
        .def("__eq__", [](const SparseTensor& a, const SparseTensor& b) { return a == b; });

    py::class_<IntegerFactorModel>(m, "Model")
        .def(py::init([](const std::vector<RealArray>& factors, std::vector<std::int64_t> lambda, int tau) {
                 IntegerFactorModel model;
                 for (const auto& f : factors) model.factors.push_back(matrix_from_numpy(f));
                 model.lambda = std::move(lambda);
                 model.tau = tau;
                 model.check_invariants();
                 return model;
             }),
             py::arg("factors"), py::arg("lambda_"), py::arg("tau") = 5)
        .def_property_readonly("factors",
                               [](const IntegerFactorModel& model) {
                                   py::list out;
                                   for (const auto& f : model.factors) out.append(matrix_to_numpy(f));
                                   return out;
                               })
        .def_readonly("lambda_", &IntegerFactorModel::lambda)
        .def_readonly("tau", &IntegerFactorModel::tau)
        .def_property_readonly("rank", &IntegerFactorModel::rank)
        .def_property_readonly("order", &IntegerFactorModel::order)
        .def("__eq__", [](const IntegerFactorModel& a, const IntegerFactorModel& b) { return a == b; });

    m.def(
        "factorize",
        [](const SparseTensor& x, std::size_t rank, int tau, double tol, std::size_t max_iters,
           const std::string& init, std::uint64_t seed, std::optional<IntegerFactorModel> initial_model) {
            SolverConfig c;
            c.rank = rank;
            c.tau = tau;
            c.tol = tol;
            c.max_iters = max_iters;
            c.init = parse_init(init);
            c.seed = seed;
            c.initial_model = std::move(initial_model);
            SolverResult res;
            {
                py::gil_scoped_release release;
                res = sustain::sustain(x, c);
            }
            return py::make_tuple(res.model, trace_to_dict(res.trace));
        },
        py::arg("tensor"), py::arg("rank"), py::arg("tau") = 5, py::arg("tol") = 1e-4, py::arg("max_iters") = 200,
        py::arg("init") = "random", py::arg("seed") = 0, py::arg("initial_model") = py::none(),
        "Fits an integer model; returns (model, trace).");

    m.def("fit", py::overload_cast<const SparseTensor&, const IntegerFactorModel&>(&sustain::fit), py::arg("tensor"),
          py::arg("model"));

    m.def(
        "generate_planted",
        [](std::vector<std::size_t> dims, std::size_t rank, int tau, double density, double noise_level,
           std::uint64_t seed) {
            PlantedSpec spec;
            spec.dims = std::move(dims);
            spec.rank = rank;
            spec.tau = tau;
            spec.density = density;
            spec.noise = noise_level > 0.0 ? NoiseKind::poisson : NoiseKind::none;
            spec.noise_level = noise_level;
            spec.seed = seed;
            auto inst = generate_planted(spec);
            return py::make_tuple(inst.tensor, inst.truth);
        },
        py::arg("dims"), py::arg("rank") = 3, py::arg("tau") = 5, py::arg("density") = 0.1,
        py::arg("noise_level") = 0.0, py::arg("seed") = 0, "Returns (tensor, planted model).");

    m.def(
        "dissimilarity",
        [](const RealArray& a, const RealArray& b) { return dissimilarity(matrix_from_numpy(a), matrix_from_numpy(b)); },
        py::arg("a"), py::arg("b"));

    m.def(
        "stability_select",
        [](const SparseTensor& x, std::vector<std::size_t> ranks, std::size_t repetitions, std::size_t mode, int tau,
           std::uint64_t seed) {
            StabilityOptions opts;
            opts.ranks = std::move(ranks);
            opts.repetitions = repetitions;
            opts.assess_mode = mode;
            SolverConfig c;
            c.tau = tau;
            c.seed = seed;
            c.init = InitScheme::round_seed;
            StabilityReport rep;
            {
                py::gil_scoped_release release;
                rep = stability_select(x, opts, c);
            }
            py::dict scores;
            for (const auto& r : rep.per_rank) scores[py::int_(r.rank)] = r.score;
            return py::make_tuple(rep.selected_rank, scores, rep.best_model);
        },
        py::arg("tensor"), py::arg("ranks"), py::arg("repetitions") = 20, py::arg("mode") = 1, py::arg("tau") = 5,
        py::arg("seed") = 0, "Returns (selected rank, {rank: score}, best model).");

    m.def("load_tensor", &io::load_tensor, py::arg("path"));
    m.def(
        "save_tensor",
        [](const std::filesystem::path& p, const SparseTensor& t, bool binary) {
            io::save_tensor(p, t, binary ? io::FileFormat::binary : io::FileFormat::text);
        },
        py::arg("path"), py::arg("tensor"), py::arg("binary") = false);
    m.def(
        "load_model", [](const std::filesystem::path& p) { return io::load_model(p).model; }, py::arg("path"));
    m.def(
        "save_model",
        [](const std::filesystem::path& dir, const IntegerFactorModel& model, bool binary) {
            io::save_model(dir, model, std::nullopt, std::nullopt,
                           binary ? io::FileFormat::binary : io::FileFormat::text);
        },
        py::arg("directory"), py::arg("model"), py::arg("binary") = false);
}
