#include "imdp/bench.hpp"
#include "imdp/encode.hpp"
#include "imdp/errors.hpp"
#include "imdp/model_io.hpp"
#include "imdp/robust_vi.hpp"
#include "imdp/solve.hpp"
#include "imdp/synth.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace imdp;

enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kViolated = 3,
    kInfeasible = 10,
};

struct UsageError : Error {
    using Error::Error;
};

// "nav3" (ε = 0.1) or "nav3:<eps>" select the built-in fixture; anything else is a file.
ImdpModel load_model(const std::string& arg) {
    if (arg == "nav3") return gen_nav3(0.1).model;
    if (arg.rfind("nav3:", 0) == 0) return gen_nav3(std::stod(arg.substr(5))).model;
    return load_model_file(arg);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_range(const std::string& text) {
    const auto parts = split(text, ':');
    try {
        if (parts.size() == 1) return {std::stod(parts[0])};
        if (parts.size() == 3) {
            const double from = std::stod(parts[0]), to = std::stod(parts[1]), step = std::stod(parts[2]);
            if (step <= 0.0 || to < from) throw UsageError("bad range '" + text + "'");
            return epsilon_grid(from, to, step);
        }
    } catch (const std::logic_error&) {
    }
    throw UsageError("expected <eps> or <from>:<to>:<step>, got '" + text + "'");
}

struct BackendArgs {
    std::string backend = "builtin";
    std::string command;
    double time_cap = 3600.0;
    std::size_t node_cap = 1'000'000;

    SolverConfig config() const {
        SolverConfig c;
        if (backend == "external") {
            c.backend = Backend::External;
            c.command_template = command;
        } else if (backend != "builtin") {
            throw UsageError("unknown backend '" + backend + "' (expected builtin or external)");
        }
        c.time_cap_seconds = time_cap;
        c.node_cap = node_cap;
        return c;
    }

    void attach(CLI::App* app) {
        app->add_option("--backend", backend, "builtin or external");
        app->add_option("--command", command, "external solver command with {lp_file} and {sol_file}");
        app->add_option("--time-cap", time_cap, "solver time cap in seconds");
        app->add_option("--node-cap", node_cap, "branch-and-bound node cap");
    }
};

int cmd_synth(const std::string& model_arg, const std::string& spec_text, const std::string& encoding,
              const BackendArgs& backend, const std::string& out, const std::string& json_out,
              const std::string& strategy_out, bool maximality) {
    const ImdpModel model = load_model(model_arg);
    const Spec spec = parse_spec(spec_text, model);
    SynthesisConfig config;
    config.encoding = parse_encoding_kind(encoding);
    config.solver = backend.config();
    config.check_maximality = maximality;
    const SynthesisReport report = synthesize(model, spec, config);
    const std::string text = format_report(model, spec, report);
    std::cout << text;
    if (!out.empty()) write_text_file(out, text);
    if (!json_out.empty()) write_text_file(json_out, report_json(model, spec, report));
    if (report.status == SynthesisStatus::Infeasible) return kInfeasible;
    if (!strategy_out.empty()) write_text_file(strategy_out, write_strategy(model, report.theta));
    return kOk;
}

int cmd_verify(const std::string& model_arg, const std::string& spec_text, const std::string& strategy_path) {
    const ImdpModel model = load_model(model_arg);
    const Spec spec = parse_spec(spec_text, model);
    const MultiStrategy theta = parse_strategy(read_text_file(strategy_path), model);
    const SatisfactionVerdict v = check_robust_satisfaction(model, theta, spec);
    std::cout << (v.satisfied ? "satisfied" : "violated") << ": robust value " << format_double(v.witness)
              << " at " << model.state_name(model.initial) << ", spec " << write_spec(spec) << '\n';
    if (!v.reason.empty()) std::cout << v.reason << '\n';
    return v.satisfied ? kOk : kViolated;
}

int cmd_sweep(const std::string& model_arg, const std::string& eps, const std::string& actions,
              const std::string& label, const std::string& out) {
    if (model_arg != "nav3") throw UsageError("sweep supports the nav3 template only");
    const auto rows = sweep_epsilon([](double e) { return gen_nav3(e).model; }, label, split(actions, ','),
                                    parse_range(eps));
    const std::string csv = sweep_csv(rows);
    if (out.empty())
        std::cout << csv;
    else
        write_text_file(out, csv);
    return kOk;
}

BenchParams bench_params(int grid, int steps, int branch, int segment, double eps, std::uint64_t seed) {
    BenchParams p;
    p.grid = grid;
    p.steps = steps;
    p.branch = branch;
    p.segment_steps = segment;
    p.epsilon = eps;
    p.seed = seed;
    return p;
}

int cmd_bench(const std::vector<std::string>& domains, const BenchParams& params, const std::string& encodings,
              const BackendArgs& backend, bool maximality, const std::string& csv_out, bool table) {
    std::vector<BenchmarkInstance> instances;
    for (const std::string& d : domains) {
        if (d == "small" || d == "reference") {
            for (auto& inst : d == "small" ? small_suite() : reference_suite()) instances.push_back(std::move(inst));
        } else {
            instances.push_back(make_instance(d, params));
        }
    }
    std::vector<EncodingKind> kinds;
    for (const std::string& e : split(encodings, ',')) kinds.push_back(parse_encoding_kind(e));
    SynthesisConfig config;
    config.solver = backend.config();
    config.check_maximality = maximality;
    const auto rows = run_suite(instances, kinds, config);
    const std::string csv = suite_csv(rows);
    if (!csv_out.empty()) write_text_file(csv_out, csv);
    std::cout << (table ? suite_table(rows) : csv);
    for (const SuiteRow& r : rows)
        if (r.status == "error") return kInternal;
    return kOk;
}

int cmd_export_lp(const std::string& model_arg, const std::string& spec_text, const std::string& encoding,
                  const std::string& out) {
    const ImdpModel model = load_model(model_arg);
    const Spec spec = parse_spec(spec_text, model);
    const MilpProblem problem = build_encoding(parse_encoding_kind(encoding), model, spec);
    const std::string lp = emit_lp(problem);
    if (out.empty())
        std::cout << lp;
    else
        write_text_file(out, lp);
    const EncodingStats stats = encoding_stats(problem);
    std::cerr << stats.binaries << " binary, " << stats.continuous << " continuous, " << stats.constraints
              << " constraints\n";
    return kOk;
}

// Solves an LP file with the built-in backend and writes a solution file in
// the format the external adapter reads, so it can stand in as an external solver.
int cmd_solve_lp(const std::string& lp_path, const std::string& sol_path, const BackendArgs& backend) {
    const MilpProblem problem = read_lp(read_text_file(lp_path));
    SolverConfig config = backend.config();
    config.backend = Backend::Builtin;
    const SolveResult r = solve(problem, config);
    switch (r.status) {
    case SolveStatus::Optimal:
        write_text_file(sol_path, write_solution(problem, r.assignment));
        std::cout << "optimal " << format_double(r.objective) << '\n';
        return kOk;
    case SolveStatus::Infeasible:
        write_text_file(sol_path, "# infeasible\n");
        std::cout << "infeasible\n";
        return kInfeasible;
    case SolveStatus::Unbounded:
        std::cout << "unbounded\n";
        return kInternal;
    case SolveStatus::CapExceeded:
        std::cout << "cap exceeded\n";
        return kInternal;
    }
    return kInternal;
}

int cmd_generate(const std::string& domain, const BenchParams& params, const std::string& out) {
    const BenchmarkInstance inst = make_instance(domain, params);
    const std::string text = write_model(inst.model);
    if (out.empty())
        std::cout << text;
    else
        write_text_file(out, text);
    std::cerr << inst.domain << ' ' << inst.params << ": " << inst.model.num_states() << " states, spec "
              << write_spec(inst.spec) << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust permissive controller synthesis for interval MDPs"};
    app.require_subcommand(1);

    std::string model, spec, encoding = "vertex", out, json_out, strategy_out, strategy;
    bool no_maximality = false;
    BackendArgs backend;

    auto* synth = app.add_subcommand("synth", "synthesize a maximally permissive robust multi-strategy");
    synth->add_option("--model", model, "model file, or nav3 / nav3:<eps>")->required();
    synth->add_option("--spec", spec, "e.g. 'P>=0.65 [F \"goal\"]'")->required();
    synth->add_option("--encoding", encoding, "vertex or dual");
    synth->add_option("--out", out, "text report");
    synth->add_option("--json", json_out, "JSON report");
    synth->add_option("--strategy-out", strategy_out, "strategy file");
    synth->add_flag("--no-maximality", no_maximality, "skip the maximality checks");
    backend.attach(synth);

    auto* verify = app.add_subcommand("verify", "check a multi-strategy against a spec");
    verify->add_option("--model", model)->required();
    verify->add_option("--spec", spec)->required();
    verify->add_option("--strategy", strategy, "lines '<state>: <action> ...'")->required();

    std::string eps = "0:0.2:0.01", actions = "f,m", label = "goal";
    auto* sweep = app.add_subcommand("sweep", "reachability bounds per initial action over an epsilon grid");
    sweep->add_option("--model", model, "template (nav3)")->required();
    sweep->add_option("--eps", eps, "<from>:<to>:<step>");
    sweep->add_option("--actions", actions, "comma-separated initial actions");
    sweep->add_option("--label", label, "target label");
    sweep->add_option("--out", out, "CSV file (default stdout)");

    std::vector<std::string> domains;
    int grid = 3, steps = 2, branch = 2, segment = 5;
    double epsilon = 0.05;
    std::uint64_t seed = 1;
    std::string encodings = "vertex,dual";
    bool table = false;
    auto add_params = [&](CLI::App* sub) {
        sub->add_option("--grid", grid);
        sub->add_option("--steps", steps);
        sub->add_option("--branch", branch);
        sub->add_option("--segment", segment);
        sub->add_option("--eps", epsilon);
        sub->add_option("--seed", seed);
    };
    auto* bench = app.add_subcommand("bench", "run generated instances through every encoding");
    bench->add_option("--domain", domains, "nav3, obs, sav, aca, wh, small or reference")->required();
    add_params(bench);
    bench->add_option("--encodings", encodings);
    bench->add_option("--csv", out, "CSV file");
    bench->add_flag("--table", table, "aligned table instead of CSV on stdout");
    bench->add_flag("--no-maximality", no_maximality);
    backend.attach(bench);

    auto* export_lp = app.add_subcommand("export-lp", "write the MILP of an encoding as an LP file");
    export_lp->add_option("--model", model)->required();
    export_lp->add_option("--spec", spec)->required();
    export_lp->add_option("--encoding", encoding);
    export_lp->add_option("--out", out, "LP file (default stdout)");

    std::string lp_file, sol_file;
    auto* solve_lp = app.add_subcommand("solve-lp", "solve an LP file with the built-in backend");
    solve_lp->add_option("lp", lp_file)->required();
    solve_lp->add_option("sol", sol_file)->required();
    solve_lp->add_option("--time-cap", backend.time_cap);
    solve_lp->add_option("--node-cap", backend.node_cap);

    std::string domain;
    auto* generate = app.add_subcommand("generate", "write a generated benchmark model");
    generate->add_option("--domain", domain)->required();
    add_params(generate);
    generate->add_option("--out", out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kOk : kUsage;
    }

    try {
        const BenchParams params = bench_params(grid, steps, branch, segment, epsilon, seed);
        if (*synth)
            return cmd_synth(model, spec, encoding, backend, out, json_out, strategy_out, !no_maximality);
        if (*verify) return cmd_verify(model, spec, strategy);
        if (*sweep) return cmd_sweep(model, eps, actions, label, out);
        if (*bench) return cmd_bench(domains, params, encodings, backend, !no_maximality, out, table);
        if (*export_lp) return cmd_export_lp(model, spec, encoding, out);
        if (*solve_lp) return cmd_solve_lp(lp_file, sol_file, backend);
        if (*generate) return cmd_generate(domain, params, out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kUsage;
    } catch (const VerificationFailure& e) {
        std::cerr << "verification failure: " << e.what() << '\n';
        return kInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
