#include "imdp/bench.hpp"

#include "imdp/errors.hpp"
#include "imdp/model_io.hpp"
#include "imdp/robust_vi.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <deque>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

namespace imdp {

namespace {

Successor interval(StateId t, double p, double eps) {
    return {t, std::max(0.0, p - eps), std::min(1.0, p + eps)};
}

class ModelBuilder {
public:
    StateId state(const std::string& name) {
        auto [it, fresh] = ids_.emplace(name, static_cast<StateId>(names_.size()));
        if (fresh) {
            names_.push_back(name);
            choices_.emplace_back();
        }
        return it->second;
    }

    bool known(const std::string& name) const { return ids_.count(name) != 0; }

    ActionId action(const std::string& name) {
        auto [it, fresh] = actions_.emplace(name, static_cast<ActionId>(action_names_.size()));
        if (fresh) action_names_.push_back(name);
        return it->second;
    }

    /// Successors landing on the same state are merged by adding their bounds.
    void add(StateId s, ActionId a, const std::vector<Successor>& successors, double reward = 0.0) {
        std::map<StateId, std::pair<double, double>> merged;
        for (const Successor& t : successors) {
            if (t.upper <= 0.0) continue;
            auto& [lo, hi] = merged[t.state];
            lo += t.lower;
            hi += t.upper;
        }
        Choice c;
        c.action = a;
        c.reward = reward;
        for (const auto& [t, b] : merged) c.row.push_back({t, std::min(1.0, b.first), std::min(1.0, b.second)});
        choices_.at(s).push_back(std::move(c));
    }

    void label(const std::string& name, StateId s) { labels_[name].push_back(s); }

    ImdpModel finish(StateId initial) {
        ImdpModel m;
        m.state_names = names_;
        m.initial = initial;
        m.actions = action_names_;
        m.choices = choices_;
        for (StateId s = 0; s < m.choices.size(); ++s) {
            auto& cs = m.choices[s];
            std::sort(cs.begin(), cs.end(), [](const Choice& a, const Choice& b) { return a.action < b.action; });
            if (cs.empty()) cs.push_back(Choice{kSelfLoop, {{s, 1.0, 1.0}}, 0.0});
        }
        for (auto& [name, members] : labels_) {
            std::sort(members.begin(), members.end());
            members.erase(std::unique(members.begin(), members.end()), members.end());
        }
        m.labels = labels_;
        require_valid(m);
        return m;
    }

private:
    std::map<std::string, StateId> ids_;
    std::vector<std::string> names_;
    std::vector<std::vector<Choice>> choices_;
    std::map<std::string, ActionId> actions_;
    std::vector<std::string> action_names_;
    std::map<std::string, std::vector<StateId>> labels_;
};

Spec reach_spec(const ImdpModel& model, SpecKind kind, double threshold, const std::string& label) {
    Spec spec;
    spec.kind = kind;
    spec.threshold = threshold;
    spec.label = label;
    spec.target = model.labels.at(label);
    return spec;
}

/// Best value the controller can guarantee against the adversary.
double guaranteed_value(const ImdpModel& model, const std::string& label) {
    const StateSet target(model.num_states(), model.labels.at(label));
    return robust_value(model, MultiStrategy::full(model), target, Objective::Reach, Direction::Max,
                        Direction::Min)[model.initial];
}

std::string join_params(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        if (!out.empty()) out += ' ';
        out += k + "=" + v;
    }
    return out;
}

std::string num(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

double unit(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

constexpr std::array<const char*, 4> kDirections{"north", "east", "south", "west"};
constexpr std::array<int, 4> kDr{-1, 0, 1, 0};
constexpr std::array<int, 4> kDc{0, 1, 0, -1};

std::string cell_name(int r, int c) {
    return "c" + std::to_string(r) + "_" + std::to_string(c);
}

std::vector<std::vector<bool>> place_traps(int grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<std::vector<bool>> trap(grid, std::vector<bool>(grid, false));
        for (int r = 0; r < grid; ++r)
            for (int c = 0; c < grid; ++c) {
                const bool endpoint = (r == 0 && c == 0) || (r == grid - 1 && c == grid - 1);
                const double draw = unit(rng);
                if (!endpoint && draw < 0.1) trap[r][c] = true;
            }
        std::vector<std::vector<bool>> seen(grid, std::vector<bool>(grid, false));
        std::deque<std::pair<int, int>> queue{{0, 0}};
        seen[0][0] = true;
        while (!queue.empty()) {
            auto [r, c] = queue.front();
            queue.pop_front();
            for (int d = 0; d < 4; ++d) {
                const int nr = r + kDr[d], nc = c + kDc[d];
                if (nr < 0 || nc < 0 || nr >= grid || nc >= grid || seen[nr][nc] || trap[nr][nc]) continue;
                seen[nr][nc] = true;
                queue.emplace_back(nr, nc);
            }
        }
        if (seen[grid - 1][grid - 1]) return trap;
    }
    throw Error("no trap placement connects start and goal after 100 attempts");
}

ImdpModel obs_model(int grid, int steps, double eps, const std::vector<std::vector<bool>>& trap) {
    ModelBuilder b;
    std::array<ActionId, 4> act{};
    for (int d = 0; d < 4; ++d) act[d] = b.action(kDirections[d]);
    const StateId start = b.state(cell_name(0, 0));
    std::deque<std::pair<int, int>> queue{{0, 0}};
    while (!queue.empty()) {
        auto [r, c] = queue.front();
        queue.pop_front();
        const StateId s = b.state(cell_name(r, c));
        if (r == grid - 1 && c == grid - 1) {
            b.label("goal", s);
            continue;
        }
        if (trap[r][c]) {
            b.label("trap", s);
            continue;
        }
        // Entry point of the move in direction d': the neighbour itself, its
        // first micro-state, or the current cell at a wall.
        auto entry = [&](int d) -> StateId {
            const int nr = r + kDr[d], nc = c + kDc[d];
            if (nr < 0 || nc < 0 || nr >= grid || nc >= grid) return s;
            if (!b.known(cell_name(nr, nc))) queue.emplace_back(nr, nc);
            const StateId target = b.state(cell_name(nr, nc));
            if (steps == 1) return target;
            StateId next = target;
            for (int k = steps - 1; k >= 1; --k) {
                const StateId micro = b.state(cell_name(r, c) + "_" + kDirections[d] + "_" + std::to_string(k));
                b.add(micro, act[d], {{next, 1.0, 1.0}});
                next = micro;
            }
            return next;
        };
        std::array<StateId, 4> entries{};
        for (int d = 0; d < 4; ++d) entries[d] = entry(d);
        for (int d = 0; d < 4; ++d)
            b.add(s, act[d],
                  {interval(entries[d], 0.8, eps), interval(entries[(d + 3) % 4], 0.1, eps),
                   interval(entries[(d + 1) % 4], 0.1, eps)});
    }
    return b.finish(start);
}

} // namespace

BenchmarkInstance gen_nav3(double epsilon, double p) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("epsilon must lie in [0,1]");
    ModelBuilder b;
    const StateId s0 = b.state("s0"), s1 = b.state("s1"), s2 = b.state("s2"), s3 = b.state("s3");
    const ActionId f = b.action("f"), m = b.action("m");
    b.add(s0, f, {interval(s2, 0.22, epsilon), interval(s3, 0.78, epsilon)});
    b.add(s0, m, {interval(s1, 0.9, epsilon), interval(s2, 0.1, epsilon)});
    b.add(s1, m, {interval(s2, 0.1, epsilon), interval(s3, 0.9, epsilon)});
    b.label("goal", s3);
    b.label("trap", s2);
    BenchmarkInstance inst;
    inst.domain = "nav3";
    inst.params = join_params({{"eps", num(epsilon)}, {"p", num(p)}});
    inst.model = b.finish(s0);
    inst.spec = reach_spec(inst.model, SpecKind::ProbGe, p, "goal");
    inst.expected_solvable = guaranteed_value(inst.model, "goal") >= p - kThresholdTolerance;
    return inst;
}

BenchmarkInstance gen_obs(int grid, int steps, double epsilon, std::uint64_t seed, double fraction,
                          std::optional<double> threshold) {
    if (grid < 2 || steps < 1) throw Error("obs needs grid >= 2 and steps >= 1");
    const auto trap = place_traps(grid, seed);
    BenchmarkInstance inst;
    inst.domain = "obs";
    inst.params = join_params(
        {{"grid", std::to_string(grid)}, {"steps", std::to_string(steps)}, {"eps", num(epsilon)}, {"seed", std::to_string(seed)}});
    inst.model = obs_model(grid, steps, epsilon, trap);
    // Micro-state chains are deterministic, so the one-step model has the same value.
    const double value = threshold ? *threshold
                                   : fraction * guaranteed_value(steps == 1 ? inst.model
                                                                            : obs_model(grid, 1, epsilon, trap),
                                                                 "goal");
    inst.spec = reach_spec(inst.model, SpecKind::ProbGe, value, "goal");
    return inst;
}

BenchmarkInstance gen_sav(int grid, double epsilon, std::uint64_t seed, double loss_scale, double fraction) {
    if (grid < 3) throw Error("sav needs grid >= 3");
    const int range = grid / 2;
    std::mt19937_64 rng(seed);
    std::array<std::pair<int, int>, 2> relays{};
    for (auto& relay : relays) {
        relay.first = static_cast<int>(rng() % static_cast<std::uint64_t>(grid));
        relay.second = static_cast<int>(rng() % static_cast<std::uint64_t>(grid));
    }
    auto loss = [&](int r, int c, double base) {
        int dist = 2 * grid;
        for (const auto& [rr, rc] : relays) dist = std::min(dist, std::abs(rr - r) + std::abs(rc - c));
        const double factor = 0.75 + 0.5 * dist / (2.0 * (grid - 1));
        return std::clamp(base * factor * loss_scale, 0.0, 0.9);
    };

    ModelBuilder b;
    std::array<ActionId, 4> move{};
    for (int d = 0; d < 4; ++d) move[d] = b.action(kDirections[d]);
    const std::array<ActionId, 2> channel{b.action("ch1"), b.action("ch2")};
    const StateId goal = b.state("goal");
    const StateId fail = b.state("fail");
    b.label("goal", goal);
    b.label("fail", fail);

    auto name = [](int r, int c, int d) {
        return "v" + std::to_string(r) + "_" + std::to_string(c) + "_d" + std::to_string(d);
    };
    using Key = std::array<int, 3>;
    std::deque<Key> queue;
    auto visit = [&](const Key& key) {
        if (key[0] == grid - 1 && key[1] == grid - 1) return goal;
        if (key[2] > range) return fail;
        const std::string n = name(key[0], key[1], key[2]);
        if (!b.known(n)) queue.push_back(key);
        return b.state(n);
    };
    const StateId start = visit({0, 0, 0});
    while (!queue.empty()) {
        const auto [r, c, d] = queue.front();
        queue.pop_front();
        const StateId s = b.state(name(r, c, d));
        for (int dir = 0; dir < 4; ++dir) {
            const int nr = r + kDr[dir], nc = c + kDc[dir];
            if (nr < 0 || nc < 0 || nr >= grid || nc >= grid) continue;
            b.add(s, move[dir], {{visit({nr, nc, d + 1}), 1.0, 1.0}});
        }
        if (d == 0) continue;
        for (int i = 0; i < 2; ++i) {
            const double l = loss(r, c, i == 0 ? 0.2 : 0.4);
            b.add(s, channel[i], {interval(visit({r, c, 0}), 1.0 - l, epsilon), interval(visit({r, c, d + 1}), l, epsilon)});
        }
    }
    BenchmarkInstance inst;
    inst.domain = "sav";
    inst.params = join_params({{"grid", std::to_string(grid)}, {"eps", num(epsilon)}, {"seed", std::to_string(seed)}});
    if (loss_scale != 1.0) inst.params += " loss=" + num(loss_scale);
    inst.model = b.finish(start);
    inst.spec = reach_spec(inst.model, SpecKind::ProbGe, fraction * guaranteed_value(inst.model, "goal"), "goal");
    return inst;
}

BenchmarkInstance gen_aca(int branch, double epsilon, std::uint64_t seed, double fraction) {
    if (branch < 2) throw Error("aca needs branch >= 2");
    constexpr int kHorizon = 3;
    const int levels = branch + 1;
    std::mt19937_64 rng(seed);
    // Intruder kernel: the `branch` nearest levels (ties toward lower levels) with seeded weights.
    std::vector<std::vector<std::pair<int, double>>> kernel(levels);
    for (int from = 0; from < levels; ++from) {
        std::vector<int> order(levels);
        for (int l = 0; l < levels; ++l) order[l] = l;
        std::stable_sort(order.begin(), order.end(),
                         [&](int x, int y) { return std::abs(x - from) < std::abs(y - from); });
        order.resize(branch);
        double total = 0.0;
        for (int l : order) {
            const double w = (0.5 + unit(rng)) / (1.0 + std::abs(l - from));
            kernel[from].emplace_back(l, w);
            total += w;
        }
        for (auto& [l, w] : kernel[from]) w /= total;
    }

    ModelBuilder b;
    const ActionId climb = b.action("climb"), hold = b.action("hold"), descend = b.action("descend");
    const StateId exit = b.state("exit");
    const StateId collision = b.state("collision");
    b.label("exit", exit);
    b.label("collision", collision);
    auto name = [](int t, int own, int intruder) {
        return "t" + std::to_string(t) + "_a" + std::to_string(own) + "_b" + std::to_string(intruder);
    };
    using Key = std::array<int, 3>;
    std::deque<Key> queue;
    auto visit = [&](int t, int own, int intruder) {
        if (own == intruder) return collision;
        if (t == kHorizon) return exit;
        const std::string n = name(t, own, intruder);
        if (!b.known(n)) queue.push_back({t, own, intruder});
        return b.state(n);
    };
    const StateId start = visit(0, 0, levels - 1);
    while (!queue.empty()) {
        const auto [t, own, intruder] = queue.front();
        queue.pop_front();
        const StateId s = b.state(name(t, own, intruder));
        for (const auto& [a, delta] : {std::pair{climb, 1}, std::pair{hold, 0}, std::pair{descend, -1}}) {
            const int next = own + delta;
            if (next < 0 || next >= levels) continue;
            std::vector<Successor> row;
            for (const auto& [l, w] : kernel[intruder]) row.push_back(interval(visit(t + 1, next, l), w, epsilon));
            b.add(s, a, row);
        }
    }
    BenchmarkInstance inst;
    inst.domain = "aca";
    inst.params = join_params({{"branch", std::to_string(branch)}, {"eps", num(epsilon)}, {"seed", std::to_string(seed)}});
    inst.model = b.finish(start);
    inst.spec = reach_spec(inst.model, SpecKind::ProbGe, fraction * guaranteed_value(inst.model, "exit"), "exit");
    return inst;
}

BenchmarkInstance gen_wh(int segment_steps, double epsilon, double success) {
    if (segment_steps < 1) throw Error("wh needs segment_steps >= 1");
    if (!(success > 0.0 && success <= 1.0)) throw Error("wh success must lie in (0,1]");
    ModelBuilder b;
    const StateId start = b.state("start");
    const StateId zone_a = b.state("zone_a");
    const StateId zone_b = b.state("zone_b");
    const StateId target = b.state("target");
    b.label("target", target);
    // A segment of `length` steps from `from` to `to` started by `action`.
    auto segment = [&](StateId from, const std::string& action, int length, StateId to, const std::string& tag) {
        const ActionId a = b.action(action);
        const ActionId advance = b.action("advance");
        StateId next = to;
        for (int k = length - 1; k >= 1; --k) {
            const StateId micro = b.state(tag + "_" + std::to_string(k));
            b.add(micro, advance, {interval(next, success, epsilon), interval(micro, 1.0 - success, epsilon)}, 1.0);
            next = micro;
        }
        b.add(from, a, {interval(next, success, epsilon), interval(from, 1.0 - success, epsilon)}, 1.0);
    };
    segment(start, "to_a", segment_steps, zone_a, "start_a");
    segment(start, "to_b", segment_steps, zone_b, "start_b");
    segment(zone_a, "to_target", segment_steps, target, "a_target");
    segment(zone_b, "to_target", 2 * segment_steps, target, "b_target");
    BenchmarkInstance inst;
    inst.domain = "wh";
    inst.params = join_params({{"segment", std::to_string(segment_steps)}, {"eps", num(epsilon)}});
    if (success != 0.95) inst.params += " success=" + num(success);
    inst.model = b.finish(start);
    inst.spec = reach_spec(inst.model, SpecKind::RewLe, 1.2 * 2.0 * segment_steps / success, "target");
    return inst;
}

BenchmarkInstance make_instance(const std::string& domain, const BenchParams& p) {
    if (domain == "nav3") return gen_nav3(p.epsilon);
    if (domain == "obs") return gen_obs(p.grid, p.steps, p.epsilon, p.seed);
    if (domain == "sav") return gen_sav(p.grid, p.epsilon, p.seed);
    if (domain == "aca") return gen_aca(p.branch, p.epsilon, p.seed);
    if (domain == "wh") return gen_wh(p.segment_steps, p.epsilon);
    throw Error("unknown domain '" + domain + "' (expected nav3, obs, sav, aca or wh)");
}

std::vector<BenchmarkInstance> small_suite() {
    return {gen_nav3(0.1, 0.65), gen_nav3(0.1, 0.6), gen_nav3(0.05, 0.65),
            gen_obs(2, 1, 0.05, 1), gen_obs(3, 1, 0.05, 7),
            gen_sav(3, 0.05, 1), gen_aca(2, 0.05, 1), gen_wh(2, 0.05)};
}

std::vector<BenchmarkInstance> reference_suite() {
    return {gen_nav3(0.1, 0.65), gen_obs(3, 24, 0.05, 5), gen_sav(3, 0.05, 1), gen_aca(4, 0.05, 1),
            gen_wh(30, 0.05)};
}

std::size_t transition_count(const ImdpModel& model) {
    std::size_t total = 0;
    for (const auto& cs : model.choices)
        for (const Choice& c : cs) total += c.row.size();
    return total;
}

std::vector<SuiteRow> run_suite(const std::vector<BenchmarkInstance>& instances,
                                const std::vector<EncodingKind>& encodings, const SynthesisConfig& config) {
    std::vector<SuiteRow> rows;
    for (const BenchmarkInstance& inst : instances) {
        for (EncodingKind kind : encodings) {
            SuiteRow row;
            row.domain = inst.domain;
            row.params = inst.params;
            row.states = inst.model.num_states();
            row.transitions = transition_count(inst.model);
            row.encoding = kind;
            SynthesisConfig cfg = config;
            cfg.encoding = kind;
            const auto start = std::chrono::steady_clock::now();
            try {
                SynthesisReport report = synthesize(inst.model, inst.spec, cfg);
                row.binaries = report.stats.binaries;
                row.continuous = report.stats.continuous;
                row.constraints = report.stats.constraints;
                row.solve_seconds = report.solve_seconds;
                if (report.status == SynthesisStatus::Synthesized) {
                    row.status = "synthesized";
                    row.beta = report.beta;
                    row.norm_perm = report.normalized_permissiveness;
                    row.choice_perm = report.choice_state_permissiveness;
                } else {
                    row.status = "infeasible";
                }
                row.report = std::move(report);
            } catch (const std::exception& e) {
                row.status = "error";
                row.error = e.what();
                row.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

std::string optional_number(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream out;
    out << std::setprecision(6) << *v;
    return out.str();
}

} // namespace

std::string suite_csv(const std::vector<SuiteRow>& rows) {
    std::ostringstream out;
    out << "domain,params,states,transitions,encoding,binaries,continuous,constraints,solve_seconds,status,beta,"
           "norm_perm,choice_perm\n";
    for (const SuiteRow& r : rows)
        out << r.domain << ',' << r.params << ',' << r.states << ',' << r.transitions << ',' << to_string(r.encoding)
            << ',' << r.binaries << ',' << r.continuous << ',' << r.constraints << ',' << std::setprecision(6)
            << r.solve_seconds << ',' << r.status << ',' << r.beta << ',' << optional_number(r.norm_perm) << ','
            << optional_number(r.choice_perm) << '\n';
    return out.str();
}

std::string suite_table(const std::vector<SuiteRow>& rows) {
    const std::vector<std::string> header{"domain", "params", "states", "trans", "enc", "bin", "cont", "cons",
                                          "seconds", "status", "beta", "norm", "choice"};
    std::vector<std::vector<std::string>> cells{header};
    for (const SuiteRow& r : rows) {
        std::ostringstream sec;
        sec << std::fixed << std::setprecision(3) << r.solve_seconds;
        cells.push_back({r.domain, r.params, std::to_string(r.states), std::to_string(r.transitions),
                         to_string(r.encoding), std::to_string(r.binaries), std::to_string(r.continuous),
                         std::to_string(r.constraints), sec.str(), r.status, std::to_string(r.beta),
                         optional_number(r.norm_perm), optional_number(r.choice_perm)});
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells)
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    std::ostringstream out;
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            out << std::left << std::setw(static_cast<int>(width[i])) << line[i];
            if (i + 1 < line.size()) out << "  ";
        }
        out << '\n';
    }
    for (const SuiteRow& r : rows)
        if (!r.error.empty()) out << r.domain << " [" << r.params << "] " << to_string(r.encoding) << ": " << r.error << '\n';
    return out.str();
}

} // namespace imdp
