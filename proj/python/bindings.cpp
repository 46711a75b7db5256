#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "almgp/active_learning.hpp"
#include "almgp/benchmarks.hpp"
#include "almgp/designs.hpp"
#include "almgp/harness.hpp"
#include "almgp/mgp_model.hpp"

namespace py = pybind11;
using namespace almgp;

namespace {

MlpArch arch_of(const std::vector<std::size_t>& layers) {
    MlpArch a{layers};
    a.validate();
    return a;
}

DesignSpec box_spec(std::size_t n, std::size_t dims, double lower, double upper, DesignKind kind,
                    std::uint64_t seed) {
    DesignSpec spec{n, dims, cube_bounds(dims, {lower, upper}), kind, seed};
    spec.validate();
    return spec;
}

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["run_id"] = s.run_id;
    d["repetition"] = s.repetition;
    d["strategy"] = std::string(to_string(s.strategy));
    d["seed"] = s.seed;
    d["initial_test_rmse"] = s.initial_test_rmse;
    d["final_test_rmse"] = s.final_test_rmse;
    d["rounds"] = s.rounds;
    d["stopped_early"] = s.stopped_early;
    d["failure"] = s.failure;
    return d;
}

} // namespace

PYBIND11_MODULE(_almgp, m) {
    m.doc() = "Manifold Gaussian process regression with active learning";

    static py::exception<Error> error(m, "AlmgpError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    // designs
    m.def("lhd", [](std::size_t n, std::size_t dims, double lower, double upper, std::uint64_t seed) {
        return lhd_sample(box_spec(n, dims, lower, upper, DesignKind::lhd, seed));
    }, py::arg("n"), py::arg("dims"), py::arg("lower") = 0.0, py::arg("upper") = 1.0, py::arg("seed") = 0);
    m.def("uniform_grid", [](std::size_t per_axis, std::size_t dims, double lower, double upper) {
        return uniform_grid(box_spec(per_axis, dims, lower, upper, DesignKind::uniform_grid, 0));
    }, py::arg("per_axis"), py::arg("dims"), py::arg("lower") = 0.0, py::arg("upper") = 1.0);

    // test functions
    m.def("trig1d", &eval_trig1d, py::arg("x"));
    m.def("synthetic2d", &eval_synthetic2d, py::arg("x1"), py::arg("x2"));
    m.def("sphere3d", [](double v, double alpha) {
        const SpherePoint p = eval_sphere3d(v, alpha);
        return py::make_tuple(p.x, p.y, p.z, p.value);
    }, py::arg("v"), py::arg("alpha"), "Point (x, y, z) on the unit sphere and the response there.");
    m.def("borehole", [](const Eigen::VectorXd& u) { return eval_borehole(u); }, py::arg("u"),
          "Flow rate at physical inputs r_w, r, T_u, H_u, T_l, H_l, L, K_w.");
    m.def("borehole_from_unit", [](const Eigen::VectorXd& u) { return borehole_from_unit(u); }, py::arg("unit"));

    m.def("problem_data", [](const std::string& name, std::uint64_t seed) {
        const ProblemData d = make_problem_data(make_problem(parse_problem(name)), seed);
        py::dict out;
        out["train_X"] = d.train_X;
        out["train_y"] = d.train_y;
        out["test_X"] = d.test_X;
        out["test_y"] = d.test_y;
        out["cand_X"] = d.cand_X;
        out["ref_X"] = d.ref_X;
        return out;
    }, py::arg("problem"), py::arg("seed") = 0);

    // model
    py::class_<MgpParams>(m, "MgpParams")
        .def_static("initial", [](const std::vector<std::size_t>& layers, std::uint64_t seed, double rho_raw_init) {
            return MgpParams::initial(arch_of(layers), seed, rho_raw_init);
        }, py::arg("layers"), py::arg("seed") = 0, py::arg("rho_raw_init") = 0.1)
        .def_static("unflatten", [](const std::vector<std::size_t>& layers, const Eigen::VectorXd& v) {
            return MgpParams::unflatten(arch_of(layers), v);
        }, py::arg("layers"), py::arg("flat"))
        .def("flatten", &MgpParams::flatten)
        .def_readwrite("kernel_raw", &MgpParams::kernel_raw)
        .def_readwrite("tau2_raw", &MgpParams::tau2_raw)
        .def_readwrite("rho_raw", &MgpParams::rho_raw)
        .def_property_readonly("lengthscales", [](const MgpParams& p) { return p.kernel().lengthscales; })
        .def_property_readonly("tau2", &MgpParams::tau2)
        .def_property_readonly("rho", &MgpParams::rho);

    py::class_<FittedMgp>(m, "FittedMgp")
        .def(py::init([](const std::vector<std::size_t>& layers, const MgpParams& p, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y) { return FittedMgp(arch_of(layers), p, X, y); }),
             py::arg("layers"), py::arg("params"), py::arg("X"), py::arg("y"))
        .def_property_readonly("params", &FittedMgp::params)
        .def_property_readonly("layers", [](const FittedMgp& f) { return f.arch().layer_sizes; })
        .def("latent", [](const FittedMgp& f, const Eigen::MatrixXd& X) { return f.latent(X); }, py::arg("X"))
        .def("predict", [](const FittedMgp& f, const Eigen::MatrixXd& X) {
            const MgpPredictions p = predict_mgp(f, X);
            return py::make_tuple(p.means, p.vars);
        }, py::arg("X"), "Predictive means and variances of the noise-free response.");

    m.def("joint_nlml", [](const std::vector<std::size_t>& layers, const MgpParams& p, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y) { return joint_nlml(arch_of(layers), p, X, y); },
          py::arg("layers"), py::arg("params"), py::arg("X"), py::arg("y"));
    m.def("joint_grad", [](const std::vector<std::size_t>& layers, const MgpParams& p, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& y) {
        const JointGradient g = joint_grad(arch_of(layers), p, X, y);
        return py::make_tuple(g.value, g.grad);
    }, py::arg("layers"), py::arg("params"), py::arg("X"), py::arg("y"));

    m.def("fit", [](const std::vector<std::size_t>& layers, const MgpParams& init, const Eigen::MatrixXd& X,
                    const Eigen::VectorXd& y, std::size_t max_iters, double early_stop_tol) {
        OptimConfig opt;
        opt.max_total_iters = max_iters;
        opt.early_stop_tol = early_stop_tol;
        FitResult r = [&] {
            py::gil_scoped_release release;
            return fit(arch_of(layers), init, X, y, opt);
        }();
        return py::make_tuple(std::move(r.model), r.optimizer.iterations, r.optimizer.f);
    }, py::arg("layers"), py::arg("init"), py::arg("X"), py::arg("y"), py::arg("max_iters") = 1000,
       py::arg("early_stop_tol") = 0.0, "Returns (model, iterations, final NLML).");

    m.def("alc_score", [](const FittedMgp& f, const Eigen::VectorXd& x, const Eigen::MatrixXd& ref) {
        return alc_score(f, x, ref);
    }, py::arg("model"), py::arg("x"), py::arg("reference"));

    // experiments
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_static("defaults", [](const std::string& name) { return ExperimentConfig::defaults(parse_problem(name)); },
                    py::arg("problem"))
        .def_static("from_json", [](const std::string& text) { return ExperimentConfig::from_json(text); },
                    py::arg("text"))
        .def_static("load", [](const std::filesystem::path& p) { return load_experiment_config(p); },
                    py::arg("path"))
        .def("to_json", &ExperimentConfig::to_json)
        .def("override", [](const ExperimentConfig& c, const std::string& assignment) {
            return ExperimentConfig::from_json(apply_override(c.to_json(), assignment));
        }, py::arg("assignment"), "Copy with one section.key=value override applied.")
        .def("validate", &ExperimentConfig::validate)
        .def_readwrite("repetitions", &ExperimentConfig::repetitions)
        .def_readwrite("base_seed", &ExperimentConfig::base_seed)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def_readwrite("record_timing", &ExperimentConfig::record_timing)
        .def_readwrite("threads", &ExperimentConfig::threads);

    m.def("run_experiment", [](const ExperimentConfig& cfg) {
        ExperimentResult r = [&] {
            py::gil_scoped_release release;
            return run_experiment(cfg);
        }();
        py::dict out;
        out["output_dir"] = r.output_dir;
        out["wall_seconds"] = r.wall_seconds;
        py::list runs;
        for (const auto& s : r.runs) runs.append(summary_dict(s));
        out["runs"] = runs;
        py::dict finals;
        for (Strategy s : cfg.strategies) finals[py::str(std::string(to_string(s)))] = r.mean_final_rmse(s);
        out["mean_final_test_rmse"] = finals;
        return out;
    }, py::arg("config"), "Runs the experiment, writes its output files and returns a summary.");
}
