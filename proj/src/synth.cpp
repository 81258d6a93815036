#include "imdp/synth.hpp"

#include "imdp/errors.hpp"
#include "imdp/model_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <sstream>

namespace imdp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<ActionId> explicit_actions(const ImdpModel& model, StateId s) {
    std::vector<ActionId> out;
    for (const Choice& c : model.choices[s])
        if (!c.implicit()) out.push_back(c.action);
    return out;
}

} // namespace

std::size_t decision_permissiveness(const ImdpModel& model, const MultiStrategy& theta, const Spec& spec) {
    const StateSet target = spec.target_set(model.num_states());
    std::size_t beta = 0;
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (target.contains(s)) continue;
        for (ActionId a : theta.admitted.at(s))
            if (a != kSelfLoop) ++beta;
    }
    return beta;
}

MultiStrategy extract_strategy(const MilpProblem& problem, const Assignment& assignment, const ImdpModel& model,
                               const Spec& spec, double tolerance) {
    MultiStrategy theta;
    theta.admitted.resize(model.num_states());
    std::vector<bool> decided(model.num_states(), false);
    for (std::size_t j = 0; j < problem.variables().size(); ++j) {
        const Variable& v = problem.variables()[j];
        if (v.role != VarRole::Admit || !v.state || !v.action) continue;
        decided.at(*v.state) = true;
        if (assignment.at(j) > 1.0 - tolerance) theta.admitted[*v.state].push_back(*v.action);
    }
    const StateSet target = spec.target_set(model.num_states());
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (!decided[s] || target.contains(s)) {
            theta.admitted[s] = model.enabled(s);
            continue;
        }
        if (theta.admitted[s].empty()) throw Error("no admitted action at state " + model.state_name(s));
        std::sort(theta.admitted[s].begin(), theta.admitted[s].end());
    }
    return theta;
}

MaximalityVerdict check_maximality(const ImdpModel& model, const Spec& spec, const MultiStrategy& theta,
                                   std::size_t budget, const ViOptions& vi) {
    MaximalityVerdict verdict;
    const StateSet target = spec.target_set(model.num_states());
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (target.contains(s)) continue;
        for (ActionId a : explicit_actions(model, s)) {
            if (theta.admits(s, a)) continue;
            MultiStrategy wider = theta;
            auto& set = wider.admitted[s];
            set.insert(std::upper_bound(set.begin(), set.end(), a), a);
            if (check_robust_satisfaction(model, wider, spec, vi).satisfied) {
                verdict.augmentation_ok = false;
                verdict.satisfying_augmentations.emplace_back(s, a);
            }
        }
    }

    if (model.enabled_pairs() > budget) {
        verdict.skipped_reason = std::to_string(model.enabled_pairs()) + " enabled pairs exceed the budget of " +
                                 std::to_string(budget);
        return verdict;
    }
    verdict.exhaustive_checked = true;
    const std::size_t beta = decision_permissiveness(model, theta, spec);
    // Odometer over nonempty action subsets of every decision state.
    std::vector<StateId> states;
    std::vector<std::vector<ActionId>> options;
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (target.contains(s)) continue;
        std::vector<ActionId> acts = explicit_actions(model, s);
        if (acts.empty()) continue;
        states.push_back(s);
        options.push_back(std::move(acts));
    }
    std::vector<std::size_t> mask(states.size(), 1);
    MultiStrategy candidate = MultiStrategy::full(model);
    for (;;) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            auto& set = candidate.admitted[states[i]];
            set.clear();
            for (std::size_t b = 0; b < options[i].size(); ++b)
                if (mask[i] >> b & 1U) set.push_back(options[i][b]);
            count += set.size();
        }
        if (count > beta) {
            ++verdict.exhaustive_candidates;
            if (check_robust_satisfaction(model, candidate, spec, vi).satisfied) verdict.exhaustive_ok = false;
        }
        std::size_t i = states.size();
        bool done = true;
        while (i-- > 0) {
            if (++mask[i] < (std::size_t{1} << options[i].size())) {
                done = false;
                break;
            }
            mask[i] = 1;
        }
        if (done) break;
    }
    return verdict;
}

SynthesisReport synthesize(const ImdpModel& model, const Spec& spec, const SynthesisConfig& config) {
    require_valid(model, spec);
    SynthesisReport report;
    report.encoding = config.encoding;

    auto start = Clock::now();
    EncodingOptions options = config.encoding_options;
    report.big_m = options.big_m ? *options.big_m : compute_big_m(model, spec);
    options.big_m = report.big_m;
    const MilpProblem problem = build_encoding(config.encoding, model, spec, options);
    report.stats = encoding_stats(problem);
    report.build_seconds = seconds_since(start);

    start = Clock::now();
    const SolveResult result = solve(problem, config.solver);
    report.solve_seconds = seconds_since(start);
    report.solver_status = result.status;
    report.solver_nodes = result.nodes;
    switch (result.status) {
    case SolveStatus::Infeasible: report.status = SynthesisStatus::Infeasible; return report;
    case SolveStatus::CapExceeded: throw CapExceeded("solver stopped at its node or time cap");
    case SolveStatus::Unbounded: throw SolverError("unbounded MILP");
    case SolveStatus::Optimal: break;
    }

    report.status = SynthesisStatus::Synthesized;
    report.objective = result.objective;
    report.theta = extract_strategy(problem, result.assignment, model, spec, config.solver.integrality_tolerance);
    report.beta = decision_permissiveness(model, report.theta, spec);
    report.admitted_pairs = permissiveness(model, report.theta);
    report.normalized_permissiveness = normalized_permissiveness(model, report.theta);
    report.choice_state_permissiveness = choice_state_permissiveness(model, report.theta, spec);

    report.verification = check_robust_satisfaction(model, report.theta, spec, config.vi);
    if (!report.verification.satisfied)
        throw VerificationFailure("synthesized multi-strategy fails verification: " + report.verification.reason);
    if (std::abs(report.objective - static_cast<double>(report.beta)) > 1e-6)
        throw VerificationFailure("objective " + format_double(report.objective) +
                                  " differs from the admitted decision pairs " + std::to_string(report.beta));
    if (config.check_maximality)
        report.maximality = check_maximality(model, spec, report.theta, config.maximality_budget, config.vi);
    return report;
}

std::vector<double> epsilon_grid(double from, double to, double step) {
    if (!(step > 0.0) || to < from) throw Error("epsilon grid needs step > 0 and from <= to");
    const auto count = static_cast<std::size_t>(std::llround((to - from) / step));
    std::vector<double> grid;
    for (std::size_t i = 0; i <= count; ++i) grid.push_back(from + static_cast<double>(i) * step);
    return grid;
}

std::vector<SweepRow> sweep_epsilon(const std::function<ImdpModel(double)>& model_at, const std::string& target_label,
                                    const std::vector<std::string>& actions, const std::vector<double>& grid) {
    std::vector<SweepRow> rows;
    for (double eps : grid) {
        const ImdpModel model = model_at(eps);
        require_valid(model);
        const auto label = model.labels.find(target_label);
        if (label == model.labels.end() || label->second.empty())
            throw Error("model has no states labelled \"" + target_label + "\"");
        const StateSet target(model.num_states(), label->second);
        for (const std::string& name : actions) {
            const auto it = std::find(model.actions.begin(), model.actions.end(), name);
            if (it == model.actions.end()) throw Error("unknown action '" + name + "'");
            const auto a = static_cast<ActionId>(it - model.actions.begin());
            if (!model.find_choice(model.initial, a))
                throw Error("action '" + name + "' is not enabled in the initial state");
            MultiStrategy theta = MultiStrategy::full(model);
            theta.admitted[model.initial] = {a};
            SweepRow row;
            row.epsilon = eps;
            row.action = name;
            row.min_value =
                robust_value(model, theta, target, Objective::Reach, Direction::Min, Direction::Min)[model.initial];
            row.max_value =
                robust_value(model, theta, target, Objective::Reach, Direction::Max, Direction::Max)[model.initial];
            rows.push_back(row);
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "epsilon,action,min_value,max_value\n";
    for (const SweepRow& r : rows)
        out << format_double(r.epsilon) << ',' << r.action << ',' << format_double(r.min_value) << ','
            << format_double(r.max_value) << '\n';
    return out.str();
}

namespace {

std::string strategy_lines(const ImdpModel& model, const MultiStrategy& theta) {
    std::ostringstream out;
    for (StateId s = 0; s < model.num_states(); ++s) {
        out << "  " << model.state_name(s) << ':';
        for (ActionId a : theta.admitted[s]) out << ' ' << model.action_name(a);
        out << '\n';
    }
    return out.str();
}

} // namespace

std::string format_report(const ImdpModel& model, const Spec& spec, const SynthesisReport& report) {
    std::ostringstream out;
    out << "spec: " << write_spec(spec) << '\n';
    out << "encoding: " << to_string(report.encoding) << '\n';
    out << "variables: " << report.stats.binaries << " binary, " << report.stats.continuous << " continuous\n";
    out << "constraints: " << report.stats.constraints << '\n';
    out << "big-M: " << format_double(report.big_m) << '\n';
    out << "solver: " << to_string(report.solver_status) << ", " << report.solver_nodes << " nodes\n";
    if (report.status == SynthesisStatus::Infeasible) {
        out << "result: no robust multi-strategy exists\n";
        return out.str();
    }
    out << "result: synthesized\n";
    out << "objective: " << format_double(report.objective) << '\n';
    out << "admitted decision pairs: " << report.beta << '\n';
    out << "normalized permissiveness: " << format_double(report.normalized_permissiveness) << " ("
        << report.admitted_pairs << " of " << model.enabled_pairs() << " pairs)\n";
    out << "choice-state permissiveness: "
        << (report.choice_state_permissiveness ? format_double(*report.choice_state_permissiveness) : "undefined")
        << '\n';
    out << "verification: " << (report.verification.satisfied ? "satisfied" : "violated")
        << " (robust value " << format_double(report.verification.witness) << ")\n";
    if (report.maximality) {
        const MaximalityVerdict& m = *report.maximality;
        out << "maximality: single augmentation " << (m.augmentation_ok ? "ok" : "FAILED") << "; exhaustive ";
        if (m.exhaustive_checked)
            out << (m.exhaustive_ok ? "ok" : "FAILED") << " (" << m.exhaustive_candidates << " candidates)";
        else
            out << "skipped: " << m.skipped_reason;
        out << '\n';
    }
    out << "strategy:\n" << strategy_lines(model, report.theta);
    return out.str();
}

std::string report_json(const ImdpModel& model, const Spec& spec, const SynthesisReport& report) {
    nlohmann::ordered_json j;
    j["spec"] = write_spec(spec);
    j["encoding"] = to_string(report.encoding);
    j["status"] = report.status == SynthesisStatus::Synthesized ? "synthesized" : "infeasible";
    j["binaries"] = report.stats.binaries;
    j["continuous"] = report.stats.continuous;
    j["constraints"] = report.stats.constraints;
    j["big_m"] = report.big_m;
    j["solver_status"] = to_string(report.solver_status);
    j["solver_nodes"] = report.solver_nodes;
    j["build_seconds"] = report.build_seconds;
    j["solve_seconds"] = report.solve_seconds;
    if (report.status == SynthesisStatus::Synthesized) {
        j["objective"] = report.objective;
        j["beta"] = report.beta;
        j["admitted_pairs"] = report.admitted_pairs;
        j["normalized_permissiveness"] = report.normalized_permissiveness;
        if (report.choice_state_permissiveness)
            j["choice_state_permissiveness"] = *report.choice_state_permissiveness;
        else
            j["choice_state_permissiveness"] = nullptr;
        j["robust_value"] = report.verification.witness;
        j["verified"] = report.verification.satisfied;
        if (report.maximality) {
            j["maximality"]["single_augmentation"] = report.maximality->augmentation_ok;
            j["maximality"]["exhaustive"] =
                report.maximality->exhaustive_checked ? nlohmann::ordered_json(report.maximality->exhaustive_ok)
                                                      : nlohmann::ordered_json("skipped");
        }
        nlohmann::ordered_json strategy;
        for (StateId s = 0; s < model.num_states(); ++s) {
            std::vector<std::string> names;
            for (ActionId a : report.theta.admitted[s]) names.push_back(model.action_name(a));
            strategy[model.state_name(s)] = names;
        }
        j["strategy"] = strategy;
    }
    return j.dump(2) + "\n";
}

} // namespace imdp
