#include "imdp/encode.hpp"

#include "imdp/errors.hpp"
#include "imdp/robust_vi.hpp"
#include "imdp/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace imdp {

std::string to_string(EncodingKind kind) { return kind == EncodingKind::Vertex ? "vertex" : "dual"; }

EncodingKind parse_encoding_kind(const std::string& text) {
    if (text == "vertex") return EncodingKind::Vertex;
    if (text == "dual") return EncodingKind::Dual;
    throw Error("unknown encoding '" + text + "' (expected vertex or dual)");
}

namespace {

/// Margin below 1 required of the mass that may escape a set for the
/// encoding to treat a row as forced into it; larger than the solver's
/// feasibility tolerance so rounded solutions stay sound.
constexpr double kForcedMargin = 1e-5;
constexpr double kValueBoundSlack = 1e-6;

StateSet complement_of(const StateSet& set) {
    StateSet out(set.universe());
    for (StateId s = 0; s < set.universe(); ++s)
        if (!set.contains(s)) out.insert(s);
    return out;
}

std::vector<std::string> action_tokens(const ImdpModel& model) {
    std::vector<std::string> tokens;
    std::map<std::string, int> uses;
    for (const std::string& a : model.actions) ++uses[sanitize_name(a)];
    for (ActionId a = 0; a < model.actions.size(); ++a) {
        std::string t = sanitize_name(model.actions[a]);
        if (uses[t] > 1) t += "_" + std::to_string(a);
        tokens.push_back(t);
    }
    return tokens;
}

struct Builder {
    const ImdpModel& original;
    const Spec& spec;
    ImdpModel m;
    StateSet target;
    double big_m = 0.0;
    bool reward = false;
    bool ge = false;
    std::vector<std::string> act;
    MilpProblem p;

    std::vector<std::size_t> x;
    std::vector<std::vector<std::pair<ActionId, std::size_t>>> y; // decision pairs per state
    std::vector<std::optional<std::size_t>> reach;                // reward side condition
    std::vector<std::optional<std::size_t>> in_w;                 // qualitative membership
    bool tighten = true;

    Builder(const ImdpModel& model, const Spec& s, const EncodingOptions& options)
        : original(model), spec(s), m(with_absorbing_targets(model, s.target)),
          target(s.target_set(model.num_states())), reward(s.reward()), ge(s.lower_bound()),
          act(action_tokens(model)), tighten(options.tighten_value_bounds) {
        big_m = options.big_m ? *options.big_m : compute_big_m(model, s);
        if (!(big_m > 0.0) || !std::isfinite(big_m)) throw Error("big-M must be positive and finite");
        build_shared();
    }

    std::string pair_suffix(StateId s, ActionId a) const { return std::to_string(s) + "_" + act.at(a); }

    const Choice& choice(StateId s, ActionId a) const { return *m.find_choice(s, a); }

    void build_shared() {
        const std::size_t n = m.num_states();
        x.resize(n);
        y.resize(n);
        reach.assign(n, std::nullopt);
        in_w.assign(n, std::nullopt);
        for (StateId s = 0; s < n; ++s) {
            Variable v;
            v.name = "x_" + std::to_string(s);
            v.lower = 0.0;
            v.upper = reward ? big_m : 1.0;
            v.role = VarRole::Value;
            v.state = s;
            x[s] = p.add_variable(std::move(v));
        }
        std::vector<Term> objective;
        for (StateId s = 0; s < n; ++s) {
            if (target.contains(s)) continue;
            for (const Choice& c : m.choices[s]) {
                if (c.implicit()) continue;
                Variable v;
                v.name = "y_" + pair_suffix(s, c.action);
                v.kind = VarKind::Binary;
                v.upper = 1.0;
                v.role = VarRole::Admit;
                v.state = s;
                v.action = c.action;
                const std::size_t idx = p.add_variable(std::move(v));
                y[s].emplace_back(c.action, idx);
                objective.push_back({1.0, idx});
            }
        }
        p.set_objective(std::move(objective));

        for (StateId s = 0; s < n; ++s) {
            if (y[s].empty()) continue;
            Constraint c;
            c.name = "admit_" + std::to_string(s);
            for (const auto& [a, idx] : y[s]) c.terms.push_back({1.0, idx});
            c.sense = Sense::Ge;
            c.rhs = 1.0;
            c.role = ConstraintRole::Admit;
            c.state = s;
            p.add_constraint(std::move(c));
        }
        {
            Constraint c;
            c.name = "threshold";
            c.terms = {{1.0, x[m.initial]}};
            c.sense = ge ? Sense::Ge : Sense::Le;
            c.rhs = spec.threshold;
            c.role = ConstraintRole::Threshold;
            c.state = m.initial;
            p.add_constraint(std::move(c));
        }
        for (StateId t : target.members()) {
            Constraint c;
            c.name = "pin_" + std::to_string(t);
            c.terms = {{1.0, x[t]}};
            c.sense = Sense::Eq;
            c.rhs = reward ? 0.0 : 1.0;
            c.role = ConstraintRole::Pin;
            c.state = t;
            p.add_constraint(std::move(c));
        }

        if (spec.kind == SpecKind::ProbGe) add_positive_reach_block();
        if (reward) add_almost_sure_block();
        if (tighten) tighten_value_bounds();
    }

    /// Every multi-strategy's robust value lies between the extremes reached by
    /// single strategies, and so does x_s in every integer-feasible point: for
    /// ≥ kinds x_s is at most the max-min value, for ≤ kinds at least the
    /// min-max value.
    void tighten_value_bounds() {
        const MultiStrategy full = MultiStrategy::full(m);
        const Objective objective = reward ? Objective::Reward : Objective::Reach;
        const ValueVector best = ge ? robust_value(m, full, target, objective, Direction::Max, Direction::Min)
                                    : robust_value(m, full, target, objective, Direction::Min, Direction::Max);
        for (StateId s = 0; s < m.num_states(); ++s) {
            if (target.contains(s) || !std::isfinite(best[s])) continue;
            Variable& v = p.variables()[x[s]];
            if (ge)
                v.upper = std::max(v.lower, std::min(v.upper, best[s] + kValueBoundSlack));
            else
                v.lower = std::min(v.upper, std::max(v.lower, best[s] - kValueBoundSlack));
        }
    }

    void add_qualitative(Constraint c) {
        c.role = ConstraintRole::Qualitative;
        p.add_constraint(std::move(c));
    }

    /// Membership w_s of the states whose fate depends on θ in the set of
    /// states that reach the target with positive probability under every
    /// compliant strategy and transition function, certified by a ranking.
    void add_membership_block(const StateSet& always, const StateSet& never) {
        const std::size_t n = m.num_states();
        const std::vector<StateId> end = chain_ends(always, never);
        std::vector<StateId> undecided;
        for (StateId s = 0; s < n; ++s)
            if (!target.contains(s) && !always.contains(s) && !never.contains(s) && end[s] == s)
                undecided.push_back(s);
        if (undecided.empty()) return;
        const double ranks = static_cast<double>(undecided.size());

        std::vector<std::optional<std::size_t>> rho(n);
        for (StateId s : undecided) {
            Variable w;
            w.name = "w_" + std::to_string(s);
            w.kind = VarKind::Binary;
            w.upper = 1.0;
            w.role = VarRole::InSet;
            w.state = s;
            in_w[s] = p.add_variable(std::move(w));
            Variable r;
            r.name = "rho_" + std::to_string(s);
            r.upper = ranks;
            r.role = VarRole::Rank;
            r.state = s;
            rho[s] = p.add_variable(std::move(r));
        }

        std::map<std::pair<StateId, StateId>, std::size_t> witness;
        auto witness_var = [&](StateId s, StateId t) {
            const auto key = std::pair{s, t};
            if (auto it = witness.find(key); it != witness.end()) return it->second;
            Variable q;
            q.name = "q_" + std::to_string(s) + "_" + std::to_string(t);
            q.kind = VarKind::Binary;
            q.upper = 1.0;
            q.role = VarRole::Witness;
            q.state = s;
            const std::size_t idx = p.add_variable(std::move(q));
            witness.emplace(key, idx);
            Constraint link;
            link.name = "qw_" + std::to_string(s) + "_" + std::to_string(t);
            link.terms = {{1.0, idx}, {-1.0, *in_w[t]}};
            link.sense = Sense::Le;
            link.state = s;
            add_qualitative(std::move(link));
            Constraint rank;
            rank.name = "qr_" + std::to_string(s) + "_" + std::to_string(t);
            rank.terms = {{1.0, *rho[t]}, {-1.0, *rho[s]}, {ranks + 1.0, idx}};
            rank.sense = Sense::Le;
            rank.rhs = ranks;
            rank.state = s;
            add_qualitative(std::move(rank));
            return idx;
        };

        // A state on a deterministic chain shares the membership of its end.
        for (StateId s = 0; s < n; ++s)
            if (end[s] != s) in_w[s] = in_w[end[s]];

        auto inside = [&](StateId t) { return target.contains(end[t]) || always.contains(end[t]); };
        for (StateId s : undecided) {
            const std::size_t w = *in_w[s];
            for (const auto& [a, yv] : y[s]) {
                const IntervalRow& row = choice(s, a).row;
                if (forced_into(row, inside)) continue;
                const std::string tag = pair_suffix(s, a);
                std::vector<std::size_t> mode_a;
                std::vector<std::pair<double, StateId>> variable_upper;
                double out_upper = 0.0;
                double total_upper = 0.0;
                for (const Successor& t : row) {
                    total_upper += t.upper;
                    const StateId e = end[t.state];
                    if (never.contains(e)) {
                        out_upper += t.upper;
                    } else if (!inside(t.state)) {
                        if (e == s) {
                            out_upper += t.upper;
                            continue;
                        }
                        variable_upper.emplace_back(t.upper, e);
                        if (t.lower > kQualitativeTolerance) mode_a.push_back(e);
                    }
                }
                std::sort(mode_a.begin(), mode_a.end());
                mode_a.erase(std::unique(mode_a.begin(), mode_a.end()), mode_a.end());
                const bool can_a = !mode_a.empty();
                const bool can_b = out_upper < 1.0 - kForcedMargin;
                if (!can_a && !can_b) {
                    Constraint c;
                    c.name = "wx_" + tag;
                    c.terms = {{1.0, yv}, {1.0, w}};
                    c.sense = Sense::Le;
                    c.rhs = 1.0;
                    c.state = s;
                    c.action = a;
                    add_qualitative(std::move(c));
                    continue;
                }
                std::optional<std::size_t> mode;
                if (can_a && can_b) {
                    Variable o;
                    o.name = "o_" + tag;
                    o.kind = VarKind::Binary;
                    o.upper = 1.0;
                    o.role = VarRole::Mode;
                    o.state = s;
                    o.action = a;
                    mode = p.add_variable(std::move(o));
                }
                if (can_a) {
                    // Some successor with positive lower bound is certified.
                    Constraint c;
                    c.name = "wa_" + tag;
                    for (StateId t : mode_a) c.terms.push_back({1.0, witness_var(s, t)});
                    c.terms.push_back({-1.0, yv});
                    c.terms.push_back({-1.0, w});
                    if (mode) c.terms.push_back({1.0, *mode});
                    c.sense = Sense::Ge;
                    c.rhs = -1.0;
                    c.state = s;
                    c.action = a;
                    add_qualitative(std::move(c));
                }
                if (can_b) {
                    // The uncertified successors cannot absorb all mass.
                    const double k = total_upper + 1.0;
                    Constraint c;
                    c.name = "wb_" + tag;
                    double rhs = 1.0 - kForcedMargin - out_upper + 2.0 * k;
                    for (const auto& [u, t] : variable_upper) {
                        c.terms.push_back({-u, witness_var(s, t)});
                        rhs -= u;
                    }
                    c.terms.push_back({k, yv});
                    c.terms.push_back({k, w});
                    if (mode) {
                        c.terms.push_back({k, *mode});
                        rhs += k;
                    }
                    c.sense = Sense::Le;
                    c.rhs = rhs;
                    c.state = s;
                    c.action = a;
                    add_qualitative(std::move(c));
                }
            }
        }
    }

    /// Follows every state with a single explicit action that moves to one
    /// other state with certainty; the result is the first state off such a
    /// chain (or the state itself). Undecided chains cannot close into a cycle
    /// (it would never reach the target); if one did, it ends where it closes.
    std::vector<StateId> chain_ends(const StateSet& always, const StateSet& never) const {
        const std::size_t n = m.num_states();
        auto step = [&](StateId s) -> std::optional<StateId> {
            if (target.contains(s) || always.contains(s) || never.contains(s)) return std::nullopt;
            if (m.choices[s].size() != 1 || m.choices[s][0].implicit()) return std::nullopt;
            const IntervalRow& row = m.choices[s][0].row;
            if (row.size() != 1 || row[0].state == s || row[0].lower < 1.0 - kQualitativeTolerance) return std::nullopt;
            return row[0].state;
        };
        std::vector<StateId> end(n);
        std::vector<int> mark(n, 0); // 0 unvisited, 1 on the current walk, 2 resolved
        for (StateId s = 0; s < n; ++s) {
            if (mark[s] == 2) continue;
            std::vector<StateId> walk;
            StateId cur = s;
            StateId last;
            for (;;) {
                if (mark[cur] == 2) {
                    last = end[cur];
                    break;
                }
                if (mark[cur] == 1) {
                    last = cur;
                    break;
                }
                mark[cur] = 1;
                walk.push_back(cur);
                const auto next = step(cur);
                if (!next) {
                    last = cur;
                    break;
                }
                cur = *next;
            }
            for (StateId v : walk) {
                end[v] = last;
                mark[v] = 2;
            }
        }
        return end;
    }

    void add_positive_reach_block() {
        const MultiStrategy full = MultiStrategy::full(m);
        const StateSet always = positive_reach_set(m, full, target);
        const StateSet never = complement_of(possibly_reaching_set(m, full, target));
        for (StateId s : never.members()) p.variables()[x[s]].upper = 0.0;
        add_membership_block(always, never);
        for (StateId s = 0; s < m.num_states(); ++s) {
            if (!in_w[s]) continue;
            Constraint c;
            c.name = "xw_" + std::to_string(s);
            c.terms = {{1.0, x[s]}, {-1.0, *in_w[s]}};
            c.sense = Sense::Le;
            c.state = s;
            add_qualitative(std::move(c));
        }
    }

    /// Reward side condition: every state reachable from the initial state
    /// under θ must be certified; robust constraints of the other states are
    /// switched off through r_s.
    void add_almost_sure_block() {
        if (target.contains(m.initial)) return;
        const MultiStrategy full = MultiStrategy::full(m);
        if (almost_sure_reach_set(m, full, target).count() == m.num_states()) return;
        const StateSet always = positive_reach_set(m, full, target);
        const StateSet never = complement_of(possibly_reaching_set(m, full, target));
        add_membership_block(always, never);

        const std::size_t n = m.num_states();
        for (StateId s = 0; s < n; ++s) {
            if (target.contains(s)) continue;
            Variable r;
            r.name = "r_" + std::to_string(s);
            r.lower = s == m.initial ? 1.0 : 0.0;
            r.upper = never.contains(s) ? 0.0 : 1.0;
            if (r.lower > r.upper) throw Error("internal: initial state cannot reach the target");
            r.role = VarRole::Reach;
            r.state = s;
            reach[s] = p.add_variable(std::move(r));
        }
        for (StateId s = 0; s < n; ++s) {
            if (!reach[s]) continue;
            if (in_w[s]) {
                Constraint c;
                c.name = "rw_" + std::to_string(s);
                c.terms = {{1.0, *reach[s]}, {-1.0, *in_w[s]}};
                c.sense = Sense::Le;
                c.state = s;
                add_qualitative(std::move(c));
            }
            for (const auto& [a, yv] : y[s]) {
                const IntervalRow& row = choice(s, a).row;
                for (std::size_t i = 0; i < row.size(); ++i) {
                    const StateId t = row[i].state;
                    if (t == s || !reach[t] || !possible_successor(row, i)) continue;
                    Constraint c;
                    c.name = "rp_" + pair_suffix(s, a) + "_" + std::to_string(t);
                    c.terms = {{1.0, *reach[t]}, {-1.0, *reach[s]}, {-1.0, yv}};
                    c.sense = Sense::Ge;
                    c.rhs = -1.0;
                    c.state = s;
                    c.action = a;
                    add_qualitative(std::move(c));
                }
            }
        }
    }

    /// Adds the big-M switch of a robust constraint: active iff y = 1 (and
    /// r_s = 1 when the side condition is encoded).
    void add_switch(Constraint& c, StateId s, std::size_t yv, double coef) const {
        if (c.sense == Sense::Le) {
            c.terms.push_back({coef, yv});
            c.rhs += coef;
            if (reach[s]) {
                c.terms.push_back({coef, *reach[s]});
                c.rhs += coef;
            }
        } else {
            c.terms.push_back({-coef, yv});
            c.rhs -= coef;
            if (reach[s]) {
                c.terms.push_back({-coef, *reach[s]});
                c.rhs -= coef;
            }
        }
    }

    double reward_of(const Choice& c) const { return reward ? c.reward : 0.0; }

    double lower_of(StateId t) const { return p.variables()[x[t]].lower; }
    double upper_of(StateId t) const { return p.variables()[x[t]].upper; }

    /// Largest violation of a vertex constraint within the variable bounds:
    /// the smallest switch coefficient that still deactivates it.
    double vertex_switch(StateId s, const Choice& ch, const std::vector<double>& probability) const {
        const double r = reward_of(ch);
        double violation = ge ? upper_of(s) - r : r - lower_of(s);
        for (std::size_t i = 0; i < ch.row.size(); ++i)
            violation += ge ? -probability[i] * lower_of(ch.row[i].state) : probability[i] * upper_of(ch.row[i].state);
        return std::max(0.0, violation);
    }

    /// Same for the dual robust constraint with η = û = ǔ = 0.
    double dual_switch(StateId s, const Choice& ch) const {
        const double r = reward_of(ch);
        return std::max(0.0, ge ? upper_of(s) - r : r - lower_of(s));
    }

    void add_vertex_constraints(const EncodingOptions& options) {
        std::size_t total = 0;
        for (StateId s = 0; s < m.num_states(); ++s)
            for (const auto& [a, yv] : y[s]) {
                const Choice& ch = choice(s, a);
                const auto vertices = enumerate_vertices(ch.row);
                total += vertices.size();
                if (total > options.vertex_constraint_cap)
                    throw CapExceeded("vertex encoding exceeds " + std::to_string(options.vertex_constraint_cap) +
                                      " robust constraints");
                const double r = reward_of(ch);
                for (std::size_t v = 0; v < vertices.size(); ++v) {
                    Constraint c;
                    c.name = "vr_" + pair_suffix(s, a) + "_" + std::to_string(v);
                    c.terms.push_back({1.0, x[s]});
                    for (std::size_t i = 0; i < ch.row.size(); ++i)
                        c.terms.push_back({-vertices[v].probability[i], x[ch.row[i].state]});
                    c.sense = ge ? Sense::Le : Sense::Ge;
                    c.rhs = r;
                    c.role = ConstraintRole::VertexRobust;
                    c.state = s;
                    c.action = a;
                    add_switch(c, s, yv, vertex_switch(s, ch, vertices[v].probability));
                    p.add_constraint(std::move(c));
                }
            }
    }

    void add_dual_constraints() {
        const double mm = big_m;
        for (StateId s = 0; s < m.num_states(); ++s)
            for (const auto& [a, yv] : y[s]) {
                const Choice& ch = choice(s, a);
                const std::string tag = pair_suffix(s, a);
                const double r = reward_of(ch);
                std::vector<std::size_t> uh(ch.row.size());
                std::vector<std::size_t> ul(ch.row.size());
                for (std::size_t i = 0; i < ch.row.size(); ++i) {
                    const std::string t = std::to_string(ch.row[i].state);
                    Variable u;
                    u.name = "uh_" + tag + "_" + t;
                    u.upper = mm;
                    u.role = VarRole::DualUpper;
                    u.state = s;
                    u.action = a;
                    uh[i] = p.add_variable(u);
                    u.name = "ul_" + tag + "_" + t;
                    u.role = VarRole::DualLower;
                    ul[i] = p.add_variable(u);
                }
                Variable lam_v;
                lam_v.name = "lam_" + tag;
                lam_v.lower = -mm;
                lam_v.upper = mm;
                lam_v.role = VarRole::Lambda;
                lam_v.state = s;
                lam_v.action = a;
                const std::size_t lam = p.add_variable(lam_v);
                lam_v.name = "eta_" + tag;
                lam_v.role = VarRole::Eta;
                const std::size_t eta = p.add_variable(lam_v);

                // Dual feasibility: λ − û + ǔ ≤ x_t (inner min) or λ + û − ǔ ≥ x_t (inner max).
                for (std::size_t i = 0; i < ch.row.size(); ++i) {
                    Constraint c;
                    c.name = "df_" + tag + "_" + std::to_string(ch.row[i].state);
                    const double sign = ge ? 1.0 : -1.0;
                    c.terms = {{1.0, lam}, {-sign, uh[i]}, {sign, ul[i]}, {-1.0, x[ch.row[i].state]}};
                    c.sense = ge ? Sense::Le : Sense::Ge;
                    c.role = ConstraintRole::DualFeasibility;
                    c.state = s;
                    c.action = a;
                    p.add_constraint(std::move(c));
                }
                {
                    Constraint c;
                    c.name = "dr_" + tag;
                    c.terms = {{1.0, x[s]}, {-1.0, eta}};
                    for (std::size_t i = 0; i < ch.row.size(); ++i) {
                        if (ge) {
                            c.terms.push_back({-ch.row[i].lower, ul[i]});
                            c.terms.push_back({ch.row[i].upper, uh[i]});
                        } else {
                            c.terms.push_back({-ch.row[i].upper, uh[i]});
                            c.terms.push_back({ch.row[i].lower, ul[i]});
                        }
                    }
                    c.sense = ge ? Sense::Le : Sense::Ge;
                    c.rhs = r;
                    c.role = ConstraintRole::DualRobust;
                    c.state = s;
                    c.action = a;
                    add_switch(c, s, yv, dual_switch(s, ch));
                    p.add_constraint(std::move(c));
                }
                auto link = [&](std::string name, std::vector<Term> terms, Sense sense, double rhs, ConstraintRole role) {
                    Constraint c;
                    c.name = std::move(name);
                    c.terms = std::move(terms);
                    c.sense = sense;
                    c.rhs = rhs;
                    c.role = role;
                    c.state = s;
                    c.action = a;
                    p.add_constraint(std::move(c));
                };
                link("ebu_" + tag, {{1.0, eta}, {-mm, yv}}, Sense::Le, 0.0, ConstraintRole::EtaBound);
                link("ebl_" + tag, {{1.0, eta}, {mm, yv}}, Sense::Ge, 0.0, ConstraintRole::EtaBound);
                link("elu_" + tag, {{1.0, eta}, {-1.0, lam}, {mm, yv}}, Sense::Le, mm, ConstraintRole::EtaLink);
                link("ell_" + tag, {{1.0, eta}, {-1.0, lam}, {-mm, yv}}, Sense::Ge, -mm, ConstraintRole::EtaLink);
            }
    }
};

} // namespace

double compute_big_m(const ImdpModel& model, const Spec& spec) {
    require_valid(model, spec);
    if (!spec.reward()) return 2.0;
    const ImdpModel m = with_absorbing_targets(model, spec.target);
    const StateSet target = spec.target_set(m.num_states());
    const StateSet capable = exists_almost_sure_set(m, target);

    MultiStrategy safe = MultiStrategy::full(m);
    for (StateId s : capable.members()) {
        std::vector<ActionId> keep;
        for (const Choice& c : m.choices[s]) {
            bool stays = true;
            for (std::size_t i = 0; i < c.row.size(); ++i)
                if (possible_successor(c.row, i) && !capable.contains(c.row[i].state)) stays = false;
            if (stays) keep.push_back(c.action);
        }
        safe.admitted[s] = std::move(keep);
    }
    const ValueVector v = robust_value(m, safe, target, Objective::Reward, Direction::Max, Direction::Max);
    double worst = 0.0;
    for (StateId s : capable.members()) {
        if (!std::isfinite(v[s]))
            throw Divergence("expected reward is unbounded under some strategy that keeps state " +
                             m.state_name(s) + " able to reach the target");
        worst = std::max(worst, v[s]);
    }
    double rmax = 0.0;
    for (const auto& row : m.choices)
        for (const Choice& c : row) rmax = std::max(rmax, c.reward);
    return 1.01 * std::max(worst, rmax) + 1.0;
}

MilpProblem build_vertex_encoding(const ImdpModel& model, const Spec& spec, const EncodingOptions& options) {
    Builder b(model, spec, options);
    b.add_vertex_constraints(options);
    return std::move(b.p);
}

MilpProblem build_dual_encoding(const ImdpModel& model, const Spec& spec, const EncodingOptions& options) {
    Builder b(model, spec, options);
    b.add_dual_constraints();
    return std::move(b.p);
}

MilpProblem build_encoding(EncodingKind kind, const ImdpModel& model, const Spec& spec,
                           const EncodingOptions& options) {
    return kind == EncodingKind::Vertex ? build_vertex_encoding(model, spec, options)
                                        : build_dual_encoding(model, spec, options);
}

EncodingStats encoding_stats(const MilpProblem& problem) {
    EncodingStats stats;
    for (const Variable& v : problem.variables())
        (v.kind == VarKind::Binary ? stats.binaries : stats.continuous) += 1;
    stats.constraints = problem.constraints().size();
    for (const Constraint& c : problem.constraints()) {
        ++stats.by_role[c.role];
        if ((c.role == ConstraintRole::VertexRobust || c.role == ConstraintRole::DualRobust) && c.state && c.action)
            ++stats.robust_per_pair[{*c.state, *c.action}];
    }
    return stats;
}

std::string admit_variable_name(const ImdpModel& model, StateId s, ActionId a) {
    return "y_" + std::to_string(s) + "_" + action_tokens(model).at(a);
}

} // namespace imdp
