#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ssvm/data.hpp"
#include "ssvm/eval.hpp"
#include "ssvm/isvm.hpp"
#include "ssvm/lasvm.hpp"
#include "ssvm/smo.hpp"

namespace py = pybind11;
using namespace ssvm;

namespace {

std::vector<double> to_vec(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw ShapeError("expected a 1-d array");
    const auto* p = a.data();
    return std::vector<double>(p, p + a.shape(0));
}

Dataset dataset_from_arrays(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& X,
    const py::array_t<long, py::array::c_style | py::array::forcecast>& y) {
    if (X.ndim() != 2 || y.ndim() != 1 || X.shape(0) != y.shape(0))
        throw ShapeError("expected X of shape (n, d) and y of shape (n,)");
    Dataset d;
    const auto n = X.shape(0), dim = X.shape(1);
    for (py::ssize_t i = 0; i < n; ++i) {
        std::vector<double> f(static_cast<std::size_t>(dim));
        for (py::ssize_t j = 0; j < dim; ++j) f[static_cast<std::size_t>(j)] = X.at(i, j);
        d.add(Sample(std::move(f), static_cast<int>(y.at(i))));
    }
    return d;
}

py::array_t<double> dataset_features(const Dataset& d) {
    py::array_t<double> out({static_cast<py::ssize_t>(d.size()),
                             static_cast<py::ssize_t>(d.feature_dim())});
    auto r = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.feature_dim(); ++j)
            r(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = d[i].features[j];
    return out;
}

py::array_t<long> dataset_labels(const Dataset& d) {
    py::array_t<long> out(static_cast<py::ssize_t>(d.size()));
    auto r = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < d.size(); ++i)
        r(static_cast<py::ssize_t>(i)) = d[i].label;
    return out;
}

py::dict metrics_dict(const MetricsReport& m) {
    py::dict out;
    out["accuracy"] = m.accuracy;
    out["log_loss"] = m.log_loss;
    out["roc_auc"] = m.roc_auc ? py::object(py::float_(*m.roc_auc)) : py::object(py::none());
    out["f1"] = m.f1;
    return out;
}

const char* membership_name(Membership m) {
    switch (m) {
        case Membership::support: return "support";
        case Membership::error_bound: return "error";
        case Membership::remainder: return "remainder";
    }
    return "?";
}

}  // namespace

PYBIND11_MODULE(_ssvm, m) {
    m.doc() = "streaming kernel-SVM toolkit (incremental, semi-online and batch solvers)";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_KeyError);

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init([](const std::string& text) { return KernelSpec::parse(text); }),
             py::arg("text") = "rbf?gamma=auto")
        .def("__str__", &KernelSpec::to_text)
        .def("__repr__",
             [](const KernelSpec& s) { return "KernelSpec('" + s.to_text() + "')"; });

    m.def(
        "eval_kernel",
        [](const KernelSpec& spec,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& y) {
            return eval_kernel(spec, to_vec(x), to_vec(y));
        },
        py::arg("spec"), py::arg("x"), py::arg("y"));

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&dataset_from_arrays), py::arg("X"), py::arg("y"))
        .def("__len__", &Dataset::size)
        .def_property_readonly("feature_dim", &Dataset::feature_dim)
        .def("features", &dataset_features)
        .def("labels", &dataset_labels);

    m.def(
        "load_dataset",
        [](const std::string& path, bool remap01) { return load_dataset(path, remap01); },
        py::arg("path"), py::arg("remap01") = false);
    m.def(
        "save_sparse_text",
        [](const Dataset& d, const std::string& path) { save_sparse_text(d, path); },
        py::arg("dataset"), py::arg("path"));

    py::class_<PipeScanConfig>(m, "PipeScanConfig")
        .def(py::init<>())
        .def_readwrite("n_samples", &PipeScanConfig::n_samples)
        .def_readwrite("beams_per_revolution", &PipeScanConfig::beams_per_revolution)
        .def_readwrite("nominal_radius", &PipeScanConfig::nominal_radius)
        .def_readwrite("noise_sigma", &PipeScanConfig::noise_sigma)
        .def_readwrite("defect_rate", &PipeScanConfig::defect_rate)
        .def_readwrite("defect_depth_min", &PipeScanConfig::defect_depth_min)
        .def_readwrite("defect_depth_max", &PipeScanConfig::defect_depth_max)
        .def_readwrite("defect_width_min", &PipeScanConfig::defect_width_min)
        .def_readwrite("defect_width_max", &PipeScanConfig::defect_width_max)
        .def_readwrite("seed", &PipeScanConfig::seed);
    m.def("generate_pipe_scan", &generate_pipe_scan, py::arg("config"));

    m.def(
        "split",
        [](const Dataset& d, double train_fraction, double validation_fraction,
           std::uint64_t seed) {
            Splits s = split(d, {train_fraction, validation_fraction, seed});
            return py::make_tuple(std::move(s.train), std::move(s.validation),
                                  std::move(s.test));
        },
        py::arg("dataset"), py::arg("train_fraction") = 0.3,
        py::arg("validation_fraction") = 0.2, py::arg("seed") = 0);
    m.def("shuffle_epoch", &shuffle_epoch, py::arg("n"), py::arg("epoch_index"),
          py::arg("seed"));

    py::class_<Model>(m, "Model")
        .def_property_readonly("bias", [](const Model& mm) { return mm.bias; })
        .def_property_readonly("n_support",
                               [](const Model& mm) { return mm.support_samples.size(); })
        .def("decision_value",
             [](const Model& mm,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
                 return decision_value(mm, to_vec(x));
             })
        .def("predict",
             [](const Model& mm,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
                 return predict(mm, to_vec(x));
             })
        .def("decision_values",
             [](const Model& mm,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& X) {
                 if (X.ndim() != 2) throw ShapeError("expected (n, d)");
                 py::array_t<double> out(X.shape(0));
                 auto r = out.mutable_unchecked<1>();
                 for (py::ssize_t i = 0; i < X.shape(0); ++i) {
                     std::vector<double> f(static_cast<std::size_t>(X.shape(1)));
                     for (py::ssize_t j = 0; j < X.shape(1); ++j)
                         f[static_cast<std::size_t>(j)] = X.at(i, j);
                     r(i) = decision_value(mm, f);
                 }
                 return out;
             });

    m.def(
        "evaluate",
        [](const Model& model, const Dataset& data) { return metrics_dict(evaluate(model, data)); },
        py::arg("model"), py::arg("dataset"));

    py::class_<IsvmTrainer>(m, "IsvmTrainer")
        .def(py::init([](double C, const KernelSpec& kernel, std::size_t cache_bytes) {
                 return IsvmTrainer(C, kernel, cache_bytes);
             }),
             py::arg("C") = 100.0, py::arg("kernel") = KernelSpec{},
             py::arg("cache_bytes") = std::size_t{256} << 20)
        .def(
            "learn",
            [](IsvmTrainer& t,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
               int label) { return t.learn(Sample(to_vec(x), label)); },
            py::arg("x"), py::arg("label"))
        .def(
            "learn_dataset",
            [](IsvmTrainer& t, const Dataset& d) {
                py::gil_scoped_release release;
                for (const Sample& s : d.samples()) t.learn(s);
            },
            py::arg("dataset"))
        .def("unlearn", &IsvmTrainer::unlearn, py::arg("id"))
        .def("alpha", &IsvmTrainer::alpha, py::arg("id"))
        .def("margin_gradient", &IsvmTrainer::margin_gradient, py::arg("id"))
        .def("membership",
             [](const IsvmTrainer& t, int id) { return membership_name(t.membership(id)); })
        .def("dual_objective", &IsvmTrainer::dual_objective)
        .def_property_readonly("bias", &IsvmTrainer::bias)
        .def("__len__", &IsvmTrainer::size)
        .def("export_model", &IsvmTrainer::export_model);

    py::class_<EpochSchedule>(m, "EpochSchedule")
        .def(py::init([](int epoch_size, int epochs_before_finish, std::uint64_t seed) {
                 return EpochSchedule{epoch_size, epochs_before_finish, seed};
             }),
             py::arg("epoch_size") = 200, py::arg("epochs_before_finish") = 5,
             py::arg("shuffle_seed") = 0);

    py::class_<LasvmTrainer>(m, "LasvmTrainer")
        .def(py::init<double, double, KernelSpec>(), py::arg("C") = 100.0,
             py::arg("tau") = 0.01, py::arg("kernel") = KernelSpec{})
        .def(
            "process",
            [](LasvmTrainer& t,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
               int label) { t.process(Sample(to_vec(x), label)); },
            py::arg("x"), py::arg("label"))
        .def("reprocess",
             [](LasvmTrainer& t) {
                 const ReprocessResult r = t.reprocess();
                 return py::make_tuple(r.removed, r.stepped);
             })
        .def("finish", py::overload_cast<>(&LasvmTrainer::finish))
        .def("finish", py::overload_cast<double>(&LasvmTrainer::finish), py::arg("tau"))
        .def(
            "train_online",
            [](LasvmTrainer& t, const Dataset& stream, const EpochSchedule& schedule) {
                TrainLog log;
                {
                    py::gil_scoped_release release;
                    log = t.train_online(stream, schedule);
                }
                py::dict out;
                out["finishes"] = log.finishes;
                out["online_seconds"] = log.online_seconds;
                out["finish_seconds"] = log.finish_seconds;
                return out;
            },
            py::arg("stream"), py::arg("schedule") = EpochSchedule{})
        .def_property_readonly("bias", &LasvmTrainer::bias)
        .def_property_readonly("delta", &LasvmTrainer::delta)
        .def_property_readonly("support_size", &LasvmTrainer::support_size)
        .def("dual_objective", &LasvmTrainer::dual_objective)
        .def("export_model", &LasvmTrainer::export_model);

    m.def(
        "smo_solve",
        [](const Dataset& d, double C, const KernelSpec& kernel, double tolerance,
           int max_passes) {
            SmoResult r;
            {
                py::gil_scoped_release release;
                r = smo_solve(d, {C, kernel, tolerance, max_passes});
            }
            py::dict out;
            out["model"] = r.model;
            out["converged"] = r.converged;
            out["iterations"] = r.iterations;
            out["dual_objective"] = r.dual_objective;
            return out;
        },
        py::arg("dataset"), py::arg("C") = 100.0, py::arg("kernel") = KernelSpec{},
        py::arg("tolerance") = 1e-3, py::arg("max_passes") = 1000);
}
