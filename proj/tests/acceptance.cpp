// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.

#include "corpus.hpp"
#include "oracles.hpp"

#include "imdp/bench.hpp"
#include "imdp/encode.hpp"
#include "imdp/errors.hpp"
#include "imdp/model_io.hpp"
#include "imdp/robust_vi.hpp"
#include "imdp/solve.hpp"
#include "imdp/synth.hpp"
#include "imdp/uncertainty.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace imdp;

namespace {

constexpr double kGreedyTol = 1e-12;
constexpr double kDualTol = 1e-9;
constexpr double kValueTol = 1e-9;
constexpr double kObjectiveTol = 1e-6; // objectives are integer counts carried in doubles
constexpr double kNav3Seconds = 1.0;
constexpr double kLargeBuildSeconds = 60.0;
constexpr std::size_t kLargeStates = 50'000;
constexpr double kNormPermFloor = 0.95;
constexpr std::size_t kCorpusSize = 60;
constexpr std::uint64_t kCorpusSeed = 4242;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failures;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (failures.size() < 5) failures.push_back(what);
        }
    }
};

SynthesisConfig config_for(EncodingKind kind, bool external, bool maximality) {
    SynthesisConfig c;
    c.encoding = kind;
    c.check_maximality = maximality;
    if (external) {
        c.solver.backend = Backend::External;
        c.solver.command_template = std::string(IMDPSYNTH_BIN) + " solve-lp {lp_file} {sol_file} > /dev/null";
    }
    return c;
}

ImdpModel fan_model(const IntervalRow& row) {
    ImdpModel m;
    const std::size_t n = row.size() + 1;
    m.actions = {"a"};
    m.choices.resize(n);
    m.state_names.resize(n);
    Choice c;
    c.action = 0;
    for (const Successor& t : row) c.row.push_back({t.state + 1, t.lower, t.upper});
    m.choices[0].push_back(c);
    for (StateId s = 1; s < n; ++s) m.choices[s].push_back({kSelfLoop, {{s, 1.0, 1.0}}, 0.0});
    m.labels["goal"] = {1};
    return m;
}

IntervalRow uniform_row(std::size_t k) {
    IntervalRow row;
    for (std::size_t i = 0; i < k; ++i) row.push_back({static_cast<StateId>(i), 0.5 / k, 1.5 / k});
    return row;
}

IntervalRow random_row(std::mt19937_64& rng, std::size_t k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (double& x : w) total += x = u(rng) + 0.01;
    const double radius = u(rng) * 0.4;
    IntervalRow row;
    for (std::size_t i = 0; i < k; ++i) {
        const double p = w[i] / total;
        row.push_back({static_cast<StateId>(i), std::max(0.0, p - radius * u(rng)), std::min(1.0, p + radius * u(rng))});
    }
    return row;
}

ActionId action_named(const ImdpModel& m, const std::string& name) {
    return static_cast<ActionId>(std::find(m.actions.begin(), m.actions.end(), name) - m.actions.begin());
}

std::size_t compliant_count(const ImdpModel& m, const MultiStrategy& theta) {
    std::size_t n = 1;
    for (const auto& set : theta.admitted) {
        n *= set.size();
        if (n > 1'000'000) break;
    }
    (void)m;
    return n;
}

// Corpus cases shared by criteria 2, 4 and 5.
struct Synthesized {
    const corpus::Case* c;
    SynthesisReport vertex;
    SynthesisReport dual;
};

std::vector<corpus::Case>& the_corpus() {
    static std::vector<corpus::Case> cases = corpus::random_corpus(kCorpusSize, kCorpusSeed);
    return cases;
}

std::vector<Synthesized>& corpus_results() {
    static std::vector<Synthesized> out = [] {
        std::vector<Synthesized> r;
        for (const auto& c : the_corpus())
            r.push_back({&c, synthesize(c.model, c.spec, config_for(EncodingKind::Vertex, false, true)),
                         synthesize(c.model, c.spec, config_for(EncodingKind::Dual, false, true))});
        return r;
    }();
    return out;
}

std::vector<Synthesized>& suite_results() {
    static std::vector<BenchmarkInstance> suite = small_suite();
    static std::vector<corpus::Case> as_cases = [] {
        std::vector<corpus::Case> out;
        for (auto& inst : suite) out.push_back({inst.model, inst.spec, inst.domain + " " + inst.params});
        return out;
    }();
    static std::vector<Synthesized> out = [] {
        std::vector<Synthesized> r;
        for (const auto& c : as_cases)
            r.push_back({&c, synthesize(c.model, c.spec, config_for(EncodingKind::Vertex, false, true)),
                         synthesize(c.model, c.spec, config_for(EncodingKind::Dual, false, true))});
        return r;
    }();
    return out;
}

void criterion1(Outcome& o) {
    struct Row {
        double eps, p;
        std::size_t beta;
        bool medium;
    };
    double slowest = 0.0;
    for (const Row& row : {Row{0.1, 0.65, 2, false}, Row{0.1, 0.6, 3, true}, Row{0.05, 0.65, 3, true}}) {
        const auto inst = gen_nav3(row.eps, row.p);
        const ActionId f = action_named(inst.model, "f"), m = action_named(inst.model, "m");
        for (EncodingKind kind : {EncodingKind::Vertex, EncodingKind::Dual})
            for (bool external : {false, true}) {
                const auto t = Clock::now();
                const SynthesisReport r = synthesize(inst.model, inst.spec, config_for(kind, external, false));
                const double s = since(t);
                slowest = std::max(slowest, s);
                std::ostringstream tag;
                tag << "eps=" << row.eps << " p=" << row.p << ' ' << to_string(kind) << (external ? " external" : " builtin");
                o.require(r.status == SynthesisStatus::Synthesized, tag.str() + ": not synthesized");
                o.require(r.beta == row.beta, tag.str() + ": beta " + std::to_string(r.beta));
                o.require(r.theta.admits(0, f) && r.theta.admits(0, m) == row.medium, tag.str() + ": theta(s0)");
                o.require(s < kNav3Seconds, tag.str() + ": " + std::to_string(s) + " s");
            }
    }
    o.detail << "3 rows x 2 encodings x 2 backends, slowest " << slowest << " s";
}

void criterion2(Outcome& o) {
    std::size_t synthesized = 0, infeasible = 0, checked = 0;
    for (auto* results : {&corpus_results(), &suite_results()}) {
        for (const Synthesized& s : *results) {
            ++checked;
            const std::string tag = s.c->text.substr(0, 40);
            o.require(s.vertex.status == s.dual.status, "status differs: " + tag);
            if (s.vertex.status != SynthesisStatus::Synthesized) {
                ++infeasible;
                continue;
            }
            ++synthesized;
            o.require(s.vertex.beta == s.dual.beta, "beta differs: " + tag);
            o.require(std::abs(s.vertex.objective - s.dual.objective) <= kObjectiveTol, "objective differs: " + tag);
            for (const SynthesisReport* r : {&s.vertex, &s.dual}) {
                const auto v = check_robust_satisfaction(s.c->model, r->theta, s.c->spec);
                o.require(v.satisfied, "verifier rejects theta: " + tag);
            }
        }
    }
    o.require(the_corpus().size() >= 50, "corpus too small");
    o.detail << checked << " instances (" << the_corpus().size() << " random + " << suite_results().size()
             << " benchmark), " << synthesized << " synthesized, " << infeasible << " infeasible";
}

void criterion3(Outcome& o) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_greedy = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 1 + trial % 6;
        const IntervalRow row = random_row(rng, k);
        std::vector<double> values(k);
        for (double& v : values) v = trial % 3 == 0 ? std::floor(u(rng) * 3) : u(rng) * 10;
        for (Direction d : {Direction::Min, Direction::Max}) {
            const double greedy = worst_case_expectation(row, values, d).value;
            const double ref = oracle::vertex_extremum(row, values, d == Direction::Min);
            worst_greedy = std::max(worst_greedy, std::abs(greedy - ref));
        }
    }
    o.require(worst_greedy <= kGreedyTol, "greedy deviates by " + std::to_string(worst_greedy));

    double worst_dual = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + trial % 5;
        const IntervalRow row = random_row(rng, k);
        const ImdpModel m = fan_model(row);
        const bool ge = trial % 2 == 0;
        const Spec spec = parse_spec(ge ? "P>=0 [F \"goal\"]" : "P<=1 [F \"goal\"]", m);
        EncodingOptions opts;
        opts.tighten_value_bounds = false;
        const MilpProblem full = build_dual_encoding(m, spec, opts);
        MilpProblem lp;
        for (Variable v : full.variables()) {
            if (v.role == VarRole::Admit) v.lower = 1.0;
            v.kind = VarKind::Continuous;
            lp.add_variable(v);
        }
        std::vector<double> values(k);
        for (std::size_t i = 0; i < k; ++i) {
            values[i] = std::floor(u(rng) * 4) / 3.0;
            auto& x = lp.variables()[*lp.find("x_" + std::to_string(i + 1))];
            x.lower = x.upper = values[i];
        }
        for (const Constraint& c : full.constraints())
            if (c.state == 0u && c.action == 0u &&
                (c.role == ConstraintRole::DualFeasibility || c.role == ConstraintRole::DualRobust ||
                 c.role == ConstraintRole::EtaBound || c.role == ConstraintRole::EtaLink))
                lp.add_constraint(c);
        const std::size_t x0 = *lp.find("x_0");
        lp.set_objective({{ge ? 1.0 : -1.0, x0}});
        const SolveResult r = lp_relax(lp);
        if (r.status != SolveStatus::Optimal) {
            o.require(false, "dual block LP not optimal at trial " + std::to_string(trial));
            continue;
        }
        worst_dual = std::max(worst_dual, std::abs(r.assignment[x0] - oracle::vertex_extremum(row, values, ge)));
    }
    o.require(worst_dual <= kDualTol, "dual block deviates by " + std::to_string(worst_dual));
    o.detail << "1000 rows: max |greedy - vertex| = " << worst_greedy << "; 100 dual blocks: max deviation "
             << worst_dual;
}

void criterion4(Outcome& o) {
    double worst = 0.0;
    std::size_t comparisons = 0;
    for (const auto& c : the_corpus()) {
        const MultiStrategy full = MultiStrategy::full(c.model);
        const StateSet target = c.spec.target_set(c.model.num_states());
        const StateSet sure = almost_sure_reach_set(c.model, full, target);
        for (SpecKind kind : {SpecKind::ProbGe, SpecKind::ProbLe, SpecKind::RewGe, SpecKind::RewLe}) {
            Spec spec = c.spec;
            spec.kind = kind;
            const ValueVector vi =
                robust_value(c.model, full, target, objective_of(kind), direction_of(kind), direction_of(kind));
            const ValueVector bf = brute_force_robust_value(c.model, full, spec);
            for (StateId s = 0; s < c.model.num_states(); ++s) {
                if (spec.reward() && !sure.contains(s)) {
                    o.require(std::isinf(vi[s]), "reward value finite off the almost-sure set");
                    continue;
                }
                ++comparisons;
                const double d = std::abs(vi[s] - bf[s]);
                worst = std::max(worst, std::isnan(d) ? 0.0 : d);
                o.require(d <= kValueTol || vi[s] == bf[s], "VI vs brute force at state " + std::to_string(s));
            }
        }
    }
    std::size_t exhaustive = 0;
    for (auto* results : {&corpus_results(), &suite_results()})
        for (const Synthesized& s : *results)
            for (const SynthesisReport* r : {&s.vertex, &s.dual}) {
                if (r->status != SynthesisStatus::Synthesized || compliant_count(s.c->model, r->theta) > 10) continue;
                ++exhaustive;
                o.require(oracle::satisfies_exhaustively(s.c->model, r->theta, s.c->spec),
                          "a compliant strategy violates the spec: " + s.c->text.substr(0, 40));
            }
    o.require(exhaustive > 0, "no strategy small enough for the exhaustive check");
    o.detail << comparisons << " state values, max deviation " << worst << "; " << exhaustive
             << " strategies checked exhaustively";
}

void criterion5(Outcome& o) {
    std::size_t total = 0, augmented = 0, exhaustive = 0, small = 0;
    for (auto* results : {&corpus_results(), &suite_results()})
        for (const Synthesized& s : *results)
            for (const SynthesisReport* r : {&s.vertex, &s.dual}) {
                if (r->status != SynthesisStatus::Synthesized) continue;
                ++total;
                const MaximalityVerdict& v = *r->maximality;
                augmented += v.augmentation_ok;
                o.require(v.augmentation_ok, "augmentation succeeds: " + s.c->text.substr(0, 40));
                if (s.c->model.enabled_pairs() <= 14) {
                    ++small;
                    o.require(v.exhaustive_checked && v.exhaustive_ok, "exhaustive maximality fails");
                    exhaustive += v.exhaustive_checked && v.exhaustive_ok;
                }
            }
    o.detail << "augmentation " << augmented << "/" << total << "; exhaustive " << exhaustive << "/" << small
             << " with sum |A(s)| <= 14";
}

void criterion6(Outcome& o) {
    for (std::size_t k : {6u, 8u, 10u}) {
        const ImdpModel m = fan_model(uniform_row(k));
        const Spec spec = parse_spec("P>=0.1 [F \"goal\"]", m);
        const std::size_t vertex = encoding_stats(build_vertex_encoding(m, spec)).robust_per_pair.at({0, 0});
        const MilpProblem dual = build_dual_encoding(m, spec);
        std::size_t per_pair = 0;
        for (const Constraint& c : dual.constraints())
            if (c.state == 0u && c.action == 0u) ++per_pair;
        const std::size_t floor = std::size_t{1} << (k - 2);
        o.require(vertex >= floor,
                  "k=" + std::to_string(k) + ": " + std::to_string(vertex) + " vertex constraints < 2^(k-2) = " +
                      std::to_string(floor));
        o.require(per_pair == k + 5, "k=" + std::to_string(k) + ": dual per pair " + std::to_string(per_pair));
        o.detail << "k=" << k << ": vertex " << vertex << " (floor " << floor << "), dual " << per_pair << "; ";
    }
    const auto t = Clock::now();
    const auto inst = gen_obs(5, 760, 0.05, 1, 0.9, 0.5);
    const MilpProblem p = build_dual_encoding(inst.model, inst.spec);
    const auto path = std::filesystem::temp_directory_path() / "imdp_acceptance_obs.lp";
    write_text_file(path.string(), emit_lp(p));
    const double s = since(t);
    const auto bytes = std::filesystem::file_size(path);
    std::filesystem::remove(path);
    o.require(inst.model.num_states() >= kLargeStates, "OBS instance too small");
    o.require(s < kLargeBuildSeconds, "OBS dual build and export took " + std::to_string(s) + " s");
    o.detail << "OBS " << inst.model.num_states() << " states: dual built and exported (" << bytes / 1024 << " KiB) in "
             << s << " s";
}

void criterion7(Outcome& o) {
    SynthesisConfig config;
    config.check_maximality = false;
    const auto instances = reference_suite();
    const auto rows = run_suite(instances, {EncodingKind::Vertex, EncodingKind::Dual}, config);
    o.require(rows.size() == 2 * instances.size(), "missing rows");
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
        const SuiteRow& v = rows[i];
        const SuiteRow& d = rows[i + 1];
        const BenchmarkInstance& inst = instances[i / 2];
        const std::string tag = v.domain + " " + v.params;
        o.require(v.status == "synthesized" && d.status == "synthesized", tag + ": " + v.status + "/" + d.status);
        o.require(v.beta == d.beta, tag + ": beta differs");
        if (v.domain == "obs" || v.domain == "wh")
            o.require(v.norm_perm && *v.norm_perm >= kNormPermFloor, tag + ": normalized permissiveness below floor");
        // Constraint ordering: the encodings differ only in their robust blocks,
        // |V(s,a)| rows per decision pair against k+5.
        const MilpProblem vp = build_vertex_encoding(inst.model, inst.spec);
        const auto vs = encoding_stats(vp);
        long long expected = 0;
        for (const auto& [pair, count] : vs.robust_per_pair) {
            const Choice* c = inst.model.find_choice(pair.first, pair.second);
            expected += static_cast<long long>(count) - static_cast<long long>(c->row.size() + 5);
        }
        const long long measured = static_cast<long long>(v.constraints) - static_cast<long long>(d.constraints);
        o.require(measured == expected, tag + ": constraint difference " + std::to_string(measured) + " vs " +
                                            std::to_string(expected));
        o.require(d.continuous > v.continuous, tag + ": dual has no more continuous variables");
        o.detail << v.domain << " " << v.states << " states beta " << v.beta << " norm "
                 << (v.norm_perm ? *v.norm_perm : -1.0) << " (" << v.solve_seconds << "s/" << d.solve_seconds << "s); ";
    }
}

void criterion8(Outcome& o) {
    const auto rows = sweep_epsilon([](double e) { return gen_nav3(e).model; }, "goal", {"f", "m"},
                                    epsilon_grid(0.0, 0.2, 0.01));
    o.require(rows.size() == 21 * 2, "expected 42 rows");
    std::map<std::string, std::pair<double, double>> last;
    for (const SweepRow& r : rows) {
        if (auto it = last.find(r.action); it != last.end()) {
            o.require(r.min_value <= it->second.first, r.action + ": min increases");
            o.require(r.max_value >= it->second.second, r.action + ": max decreases");
        }
        last[r.action] = {r.min_value, r.max_value};
        if (r.action == "f" && r.epsilon == 0.0)
            o.require(r.min_value == 0.78 && r.max_value == 0.78, "fast at eps=0 is not (0.78, 0.78)");
    }
    o.detail << rows.size() << " rows; fast at eps=0.2: (" << last["f"].first << ", " << last["f"].second << ")";
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"1 nav3 admission table", criterion1},
        {"2 encoding equivalence", criterion2},
        {"3 greedy and duality", criterion3},
        {"4 oracle equivalence", criterion4},
        {"5 maximality", criterion5},
        {"6 scaling law", criterion6},
        {"7 benchmark suite", criterion7},
        {"8 epsilon sweep", criterion8},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        const auto t = Clock::now();
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.failures.push_back(std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << name << " [" << since(t) << " s] "
                  << o.detail.str() << '\n';
        for (const std::string& f : o.failures) std::cout << "     " << f << '\n';
        std::cout.flush();
        failed += !o.pass;
    }
    std::cout << (8 - failed) << "/8 criteria pass\n";
    return failed == 0 ? 0 : 1;
}
