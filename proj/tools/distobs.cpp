#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "distobs/scenario.hpp"

using namespace distobs;

namespace {

enum Exit { kOk = 0, kInfeasible = 2, kSchema = 3, kNumerical = 4 };

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("distobs");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* lvl = std::getenv("DISTOBS_LOG");
    spdlog::set_level(lvl ? spdlog::level::from_str(lvl) : spdlog::level::warn);
}

struct Overrides {
    std::optional<double> tol_rank, tol_eig;
    std::string scheme;
    std::vector<NodeId> order;
};

void apply(const Overrides& o, Scenario& s) {
    if (o.tol_rank) s.options.tol.rank_tol = *o.tol_rank;
    if (o.tol_eig) s.options.tol.eig_cluster_tol = *o.tol_eig;
    s.options.tol.validate();
    if (!o.scheme.empty()) s.scheme = parse_scheme(o.scheme);
    if (!o.order.empty()) s.options.order = o.order;
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write " + path);
    out << j.dump(2) << '\n';
}

int cmd_check(const std::string& path, const Overrides& ov, const std::string& out) {
    Scenario s = load_scenario(path);
    apply(ov, s);
    spdlog::info("checking {} ({} states, {} nodes)", s.name, s.plant.n(), s.plant.n_nodes());
    const FeasibilityReport r = analyze(s.plant, s.graph, s.options.tol);
    std::cout << report_to_text(r);
    if (!out.empty()) write_json(out, report_to_json(r));
    return kOk;
}

int cmd_design(const std::string& path, const Overrides& ov, const std::string& out) {
    Scenario s = load_scenario(path);
    apply(ov, s);
    const FeasibilityReport r = analyze(s.plant, s.graph, s.options.tol);
    spdlog::info("condition 1 {}, condition 2 {}", r.cond1 ? "holds" : "fails", r.cond2 ? "holds" : "fails");
    const ObserverBank bank = design(s.plant, s.graph, s.scheme, s.options);
    Json j = bank_to_json(bank);
    j["feasibility"] = report_to_json(r);
    const bool ok = certified(bank);
    // stdout carries the bank itself when there is no --out
    (out.empty() ? std::cerr : std::cout) << "scheme " << j["scheme"].get<std::string>() << ", "
                                          << (ok ? "certified" : "NOT certified") << '\n';
    if (!out.empty())
        write_json(out, j);
    else
        std::cout << j.dump(2) << '\n';
    return ok ? kOk : kNumerical;
}

int cmd_simulate(const std::string& path, const std::string& bank_path, const Overrides& ov, const std::string& out,
                 const std::string& summary, std::optional<std::uint64_t> seed) {
    Scenario s = load_scenario(path);
    apply(ov, s);
    std::ifstream in(bank_path);
    if (!in) throw SchemaError("cannot open " + bank_path);
    Json bj;
    try {
        in >> bj;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(bank_path + ": " + e.what());
    }
    const ObserverBank bank = bank_from_json(bj);
    const SimulationTrace tr = run_scenario(s, bank, seed);
    if (!out.empty()) {
        std::ofstream os(out);
        if (!os) throw SchemaError("cannot write " + out);
        write_trace_csv(os, tr);
    } else {
        write_trace_csv(std::cout, tr);
    }
    const Json sj = summary_to_json(tr);
    if (!summary.empty()) write_json(summary, sj);
    for (const auto& n : sj["nodes"])
        spdlog::info("node {}: final relative error {:.3e}", n["node"].get<int>(), n["final_rel_error"].get<double>());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"distributed observer design and simulation"};
    app.require_subcommand(1);
    Overrides ov;
    std::string scenario, bank, out, summary;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scenario", scenario, "scenario JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--tol-rank", ov.tol_rank, "relative singular-value cutoff");
        sub->add_option("--tol-eig", ov.tol_eig, "eigenvalue clustering distance");
        sub->add_option("--order", ov.order, "sensor order for the decomposition")->delimiter(',');
    };
    auto* check = app.add_subcommand("check", "report Condition 1 / Condition 2 feasibility");
    add_common(check);
    check->add_option("--out", out, "write the report as JSON");
    auto* des = app.add_subcommand("design", "synthesize an observer bank");
    add_common(des);
    des->add_option("--scheme", ov.scheme, "auto, c1 or c2")->check(CLI::IsMember({"auto", "c1", "c2"}));
    des->add_option("--out", out, "bank JSON (stdout if omitted)");
    auto* sim = app.add_subcommand("simulate", "run a bank against the scenario's plant");
    add_common(sim);
    sim->add_option("bank", bank, "bank JSON from `design`")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "trace CSV (stdout if omitted)");
    sim->add_option("--summary", summary, "convergence summary JSON");
    sim->add_option("--seed", seed, "seed for the random link-failure signal");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kSchema;
    }

    try {
        if (*check) return cmd_check(scenario, ov, out);
        if (*des) return cmd_design(scenario, ov, out);
        return cmd_simulate(scenario, bank, ov, out, summary, seed);
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const NotSpanning& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kSchema;
    } catch (const InvalidWeights& e) {
        std::cerr << "invalid weights: " << e.what() << '\n';
        return kSchema;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << '\n';
        return kSchema;
    } catch (const InvalidMatrix& e) {
        std::cerr << "invalid matrix: " << e.what() << '\n';
        return kSchema;
    } catch (const InvalidSignal& e) {
        std::cerr << "invalid signal: " << e.what() << '\n';
        return kSchema;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    }
}
