#include <optional>
#include <string>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "distobs/scenario.hpp"

namespace py = pybind11;
using namespace distobs;

namespace {

// Scenarios and banks cross the boundary as JSON text; the Python wrapper
// turns them into dicts.
Scenario scenario_of(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("scenario: ") + e.what());
    }
    return parse_scenario(j);
}

ObserverBank bank_of(const std::string& text) {
    try {
        return bank_from_json(Json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("bank: ") + e.what());
    }
}

std::string check_json(const std::string& scenario) {
    const Scenario s = scenario_of(scenario);
    return report_to_json(analyze(s.plant, s.graph, s.options.tol)).dump();
}

std::string design_json(const std::string& scenario, const std::optional<std::string>& scheme) {
    Scenario s = scenario_of(scenario);
    if (scheme) s.scheme = parse_scheme(*scheme);
    return bank_to_json(design(s.plant, s.graph, s.scheme, s.options)).dump();
}

py::dict simulate_py(const std::string& scenario, const std::string& bank, std::optional<std::uint64_t> seed) {
    const Scenario s = scenario_of(scenario);
    const SimulationTrace tr = run_scenario(s, bank_of(bank), seed);
    const int K = static_cast<int>(tr.records.size()) - 1;
    const int n = s.plant.n(), N = tr.n_nodes();
    Matrix x(K + 1, n), err(K + 1, N), relerr(K + 1, N);
    py::list xhat;
    std::vector<Matrix> per_node(N, Matrix(K + 1, n));
    Eigen::VectorXi mode(K + 1);
    for (int k = 0; k <= K; ++k) {
        const auto& r = tr.records[k];
        x.row(k) = r.x.transpose();
        mode(k) = r.mode;
        for (int i = 0; i < N; ++i) {
            per_node[i].row(k) = r.xhat[i].transpose();
            err(k, i) = r.err[i];
            relerr(k, i) = r.relerr[i];
        }
    }
    for (const auto& m : per_node) xhat.append(m);
    py::dict out;
    out["x"] = x;
    out["xhat"] = xhat;
    out["err"] = err;
    out["relerr"] = relerr;
    out["mode"] = mode;
    out["summary"] = summary_to_json(tr).dump();
    return out;
}

py::dict decompose_py(const Matrix& A, const std::vector<Matrix>& C, const std::vector<NodeId>& order, double rank_tol) {
    Plant p{A, C};
    for (auto& Ci : p.C)
        if (Ci.size() == 0) Ci.resize(0, A.cols());
    ToleranceConfig tol;
    tol.rank_tol = rank_tol;
    std::vector<NodeId> ord = order;
    if (ord.empty())
        for (NodeId i = 1; i <= p.n_nodes(); ++i) ord.push_back(i);
    const auto d = multisensor_decompose(p, ord, tol);
    py::dict out;
    out["T"] = d.T;
    out["Abar"] = d.Abar;
    out["Cbar"] = d.Cbar;
    out["dims"] = d.dims;
    out["u_dim"] = d.u_dim;
    out["order"] = d.order;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "distributed observer design for linear systems over digraphs";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<Infeasible>(m, "Infeasible", m.attr("Error").ptr());
    py::register_exception<NotSpanning>(m, "NotSpanning", m.attr("Error").ptr());
    py::register_exception<SchemaError>(m, "SchemaError", m.attr("Error").ptr());
    py::register_exception<ShapeError>(m, "ShapeError", m.attr("Error").ptr());
    py::register_exception<InvalidMatrix>(m, "InvalidMatrix", m.attr("Error").ptr());
    py::register_exception<InvalidWeights>(m, "InvalidWeights", m.attr("Error").ptr());
    py::register_exception<InvalidSignal>(m, "InvalidSignal", m.attr("Error").ptr());
    py::register_exception<NotObservable>(m, "NotObservable", m.attr("Error").ptr());
    py::register_exception<NumericalError>(m, "NumericalError", m.attr("Error").ptr());
    py::register_exception<InvalidTransform>(m, "InvalidTransform", m.attr("Error").ptr());
    py::register_exception<IllConditionedJordan>(m, "IllConditionedJordan", m.attr("Error").ptr());

    m.attr("FORMAT_VERSION") = kFormatVersion;

    m.def("rank", [](const Matrix& M, double tol) { return rank_tol(M, ToleranceConfig{tol}); }, py::arg("M"),
          py::arg("tol") = 1e-9);
    m.def(
        "pbh_detectable",
        [](const Matrix& A, const Matrix& C, Complex lambda) { return pbh_detectable(A, C, lambda); }, py::arg("A"),
        py::arg("C"), py::arg("lam"));
    m.def(
        "observable_split",
        [](const Matrix& A, const Matrix& C) {
            const ObservableSplit s = obs_canon_decomp(A, C);
            return py::make_tuple(s.T, s.n_obs);
        },
        py::arg("A"), py::arg("C"), "orthogonal T and the observable dimension");
    m.def(
        "eigen_classes",
        [](const Matrix& A) {
            py::list out;
            for (const auto& c : eigen_info(A).classes) {
                py::dict d;
                d["value"] = c.value;
                d["algebraic"] = c.algebraic;
                d["geometric"] = c.geometric;
                d["conjugate_pair"] = c.conjugate_pair;
                out.append(d);
            }
            return out;
        },
        py::arg("A"));
    m.def(
        "place_observer_gain",
        [](const Matrix& A, const Matrix& C, const std::vector<Complex>& poles) {
            return place_observer_gain(A, C, poles);
        },
        py::arg("A"), py::arg("C"), py::arg("poles") = std::vector<Complex>{});
    m.def(
        "spectral_radius", [](const Matrix& M) { return structured_spectral_radius(M); }, py::arg("M"),
        "spectral radius that reports 0 for numerically nilpotent matrices");
    m.def("decompose", &decompose_py, py::arg("A"), py::arg("C"), py::arg("order") = std::vector<NodeId>{},
          py::arg("rank_tol") = 1e-9);

    m.def("_check", &check_json, py::arg("scenario"));
    m.def("_design", &design_json, py::arg("scenario"), py::arg("scheme") = py::none());
    m.def("_simulate", &simulate_py, py::arg("scenario"), py::arg("bank"), py::arg("seed") = py::none());
}
