#include "imdp/robust_vi.hpp"

#include "imdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <utility>

#ifdef IMDP_HAVE_OPENMP
#include <omp.h>
#endif

namespace imdp {

namespace {

/// Admitted choices per state.
struct Admitted {
    std::vector<std::vector<const Choice*>> rows;

    Admitted(const ImdpModel& model, const MultiStrategy& theta) : rows(model.num_states()) {
        for (StateId s = 0; s < model.num_states(); ++s)
            for (ActionId a : theta.admitted.at(s))
                if (const Choice* c = model.find_choice(s, a)) rows[s].push_back(c);
    }
};

struct Normalized {
    ImdpModel model;
    MultiStrategy theta;
};

Normalized normalize(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target) {
    if (target.universe() != model.num_states()) throw Error("target set does not match the model");
    if (theta.admitted.size() != model.num_states()) throw Error("multi-strategy does not match the model");
    Normalized out{with_absorbing_targets(model, target.members()), {}};
    out.theta = restrict_to(out.model, theta);
    return out;
}

struct Edge {
    StateId state;
    std::size_t choice; // position in Admitted::rows[state]
};

/// For every state t, the admitted (s, choice) pairs listing t as a successor.
std::vector<std::vector<Edge>> predecessors(const Admitted& adm, bool possible_only) {
    std::vector<std::vector<Edge>> pred(adm.rows.size());
    for (StateId s = 0; s < adm.rows.size(); ++s)
        for (std::size_t j = 0; j < adm.rows[s].size(); ++j) {
            const IntervalRow& row = adm.rows[s][j]->row;
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (possible_only && !possible_successor(row, i)) continue;
                pred[row[i].state].push_back({s, j});
            }
        }
    return pred;
}

/// Least superset of `seed` closed under adding a state once all (or, with
/// `existential`, any) of its usable choices are forced into the set.
template <class Usable>
StateSet forced_attractor(const Admitted& adm, const StateSet& seed, bool existential, Usable usable) {
    const std::size_t n = adm.rows.size();
    StateSet in = seed;
    std::vector<std::size_t> pending(n, 0);
    std::vector<std::vector<std::uint8_t>> forced(n);
    for (StateId s = 0; s < n; ++s) {
        forced[s].assign(adm.rows[s].size(), 0);
        for (std::size_t j = 0; j < adm.rows[s].size(); ++j)
            if (usable(s, j)) ++pending[s];
    }
    const auto pred = predecessors(adm, false);
    auto contains = [&](StateId t) { return in.contains(t); };

    std::deque<StateId> queue;
    for (StateId s : seed.members()) queue.push_back(s);
    while (!queue.empty()) {
        const StateId t = queue.front();
        queue.pop_front();
        for (const Edge& e : pred[t]) {
            if (in.contains(e.state) || forced[e.state][e.choice] || !usable(e.state, e.choice)) continue;
            if (!forced_into(adm.rows[e.state][e.choice]->row, contains)) continue;
            forced[e.state][e.choice] = 1;
            --pending[e.state];
            if (existential || pending[e.state] == 0) {
                in.insert(e.state);
                queue.push_back(e.state);
            }
        }
    }
    return in;
}

/// Least superset of `seed` closed under adding a state that has an admitted
/// choice with a possible successor in the set.
StateSet possible_closure(const Admitted& adm, const StateSet& seed) {
    StateSet in = seed;
    const auto pred = predecessors(adm, true);
    std::deque<StateId> queue;
    for (StateId s : seed.members()) queue.push_back(s);
    while (!queue.empty()) {
        const StateId t = queue.front();
        queue.pop_front();
        for (const Edge& e : pred[t])
            if (!in.contains(e.state)) {
                in.insert(e.state);
                queue.push_back(e.state);
            }
    }
    return in;
}

StateSet complement(const StateSet& set) {
    StateSet out(set.universe());
    for (StateId s = 0; s < set.universe(); ++s)
        if (!set.contains(s)) out.insert(s);
    return out;
}

StateSet almost_sure_normalized(const Admitted& adm, const StateSet& target) {
    const StateSet positive = forced_attractor(adm, target, false, [](StateId, std::size_t) { return true; });
    // A state fails iff some compliant strategy can possibly move it to a
    // state from which the target is avoided with positive probability.
    StateSet bad = complement(positive);
    for (StateId t : target.members()) bad.erase(t);
    StateSet closure = possible_closure(adm, bad);
    for (StateId t : target.members()) closure.erase(t);
    return complement(closure);
}

// ---------------------------------------------------------------------------
// Value iteration

struct Sweep {
    const ImdpModel& model;
    const Admitted& adm;
    const StateSet& target;
    const StateSet* sure; // almost-sure states of the admitted model
    Objective objective;
    Direction player;
    Direction adversary;

    double update(StateId s, const std::vector<double>& x, std::vector<std::size_t>& scratch) const {
        if (target.contains(s)) return objective == Objective::Reach ? 1.0 : 0.0;
        if (sure && objective == Objective::Reward && !sure->contains(s)) return 0.0;
        if (sure && objective == Objective::Reach && sure->contains(s)) return 1.0;
        double best = player == Direction::Min ? kInfinity : -kInfinity;
        for (const Choice* c : adm.rows[s]) {
            double v = optimal_expectation(c->row, x, adversary, scratch);
            if (objective == Objective::Reward) v += c->reward;
            best = player == Direction::Min ? std::min(best, v) : std::max(best, v);
        }
        return best;
    }
};

enum class Kernel { Parallel, Serial };

/// Updates the states listed in `active` (all states when it is null).
double sweep_once(const Sweep& sweep, const std::vector<double>& x, std::vector<double>& next, Kernel kernel,
                  const std::vector<StateId>* active = nullptr) {
    const auto n = static_cast<std::ptrdiff_t>(active ? active->size() : x.size());
    auto state_at = [&](std::ptrdiff_t i) { return active ? (*active)[i] : static_cast<StateId>(i); };
    double delta = 0.0;
    if (kernel == Kernel::Serial) {
        std::vector<std::size_t> scratch;
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const StateId s = state_at(i);
            next[s] = sweep.update(s, x, scratch);
            delta = std::max(delta, std::abs(next[s] - x[s]));
        }
        return delta;
    }
#ifdef IMDP_HAVE_OPENMP
#pragma omp parallel reduction(max : delta)
    {
        std::vector<std::size_t> scratch;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const StateId s = state_at(i);
            next[s] = sweep.update(s, x, scratch);
            delta = std::max(delta, std::abs(next[s] - x[s]));
        }
    }
#else
    std::vector<std::size_t> scratch;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const StateId s = state_at(i);
        next[s] = sweep.update(s, x, scratch);
        delta = std::max(delta, std::abs(next[s] - x[s]));
    }
#endif
    return delta;
}

/// Pass-through states have one admitted choice that moves to another state
/// with certainty. Their value is the value at the end of the chain plus the
/// rewards collected on the way, so sweeps only visit the other states and
/// a long chain costs one sweep instead of one per link.
struct Chains {
    std::vector<StateId> active;                      // states the sweeps update
    std::vector<std::pair<StateId, StateId>> through; // (pass-through state, chain end)
    std::vector<double> collected;                    // reward from state to chain end, per `through` entry

    Chains(const Admitted& adm, const StateSet& target) {
        const std::size_t n = adm.rows.size();
        constexpr StateId kNone = std::numeric_limits<StateId>::max();
        std::vector<StateId> succ(n, kNone);
        for (StateId s = 0; s < n; ++s) {
            if (target.contains(s) || adm.rows[s].size() != 1) continue;
            const IntervalRow& row = adm.rows[s][0]->row;
            if (row.size() == 1 && row[0].lower >= 1.0 && row[0].state != s) succ[s] = row[0].state;
        }
        // 0 unvisited, 1 on the current walk, 2 resolved.
        std::vector<std::uint8_t> mark(n, 0);
        std::vector<StateId> end(n, kNone);
        std::vector<double> reward(n, 0.0);
        std::vector<StateId> walk;
        for (StateId s = 0; s < n; ++s) {
            if (mark[s] == 2) continue;
            walk.clear();
            StateId t = s;
            while (succ[t] != kNone && mark[t] == 0) {
                mark[t] = 1;
                walk.push_back(t);
                t = succ[t];
            }
            // t ends the walk: a branching state, a resolved state, or a state of a cycle on this walk.
            StateId stop = t;
            double acc = 0.0;
            if (mark[t] == 2 && succ[t] != kNone) {
                stop = end[t];
                acc = reward[t];
            }
            const bool cycle = mark[t] == 1;
            for (auto it = walk.rbegin(); it != walk.rend(); ++it) {
                const StateId u = *it;
                mark[u] = 2;
                if (cycle) continue; // closed deterministic cycles stay ordinary states
                acc += adm.rows[u][0]->reward;
                end[u] = stop;
                reward[u] = acc;
            }
            if (cycle)
                for (StateId u : walk) succ[u] = kNone;
            mark[s] = 2;
        }
        for (StateId s = 0; s < n; ++s) {
            if (succ[s] != kNone && end[s] != kNone) {
                through.emplace_back(s, end[s]);
                collected.push_back(reward[s]);
            } else {
                active.push_back(s);
            }
        }
    }

    /// Sets the pass-through entries of `next` and returns their largest change from `x`.
    double fill(const std::vector<double>& x, std::vector<double>& next, Objective objective) const {
        double delta = 0.0;
        for (std::size_t i = 0; i < through.size(); ++i) {
            const StateId s = through[i].first;
            next[s] = next[through[i].second] + (objective == Objective::Reward ? collected[i] : 0.0);
            delta = std::max(delta, std::abs(next[s] - x[s]));
        }
        return delta;
    }
};

ValueVector iterate(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target, Objective objective,
                    Direction player, Direction adversary, const ViOptions& options, Kernel kernel) {
    const Normalized norm = normalize(model, theta, target);
    const Admitted adm(norm.model, norm.theta);
    const std::size_t n = norm.model.num_states();

    // Reward values are finite exactly on the almost-sure set; reach values are
    // 1 there, which spares the sweeps from slowly leaking end components.
    const StateSet sure = almost_sure_normalized(adm, target);
    const Sweep sweep{norm.model, adm, target, &sure, objective, player, adversary};
    const Chains chains(adm, target);

    std::vector<double> x(n, 0.0);
    std::vector<double> next(n, 0.0);
    ValueVector out;
    out.semantics = objective;
    for (;;) {
        if (out.iterations >= options.max_iterations)
            throw NonConvergence("value iteration did not converge within " + std::to_string(options.max_iterations) +
                                 " iterations");
        double delta = sweep_once(sweep, x, next, kernel, &chains.active);
        delta = std::max(delta, chains.fill(x, next, objective));
        x.swap(next);
        ++out.iterations;
        if (objective == Objective::Reward)
            for (double v : x)
                if (v > options.divergence_ceiling) throw Divergence("reward values exceed the divergence ceiling");
        if (delta < options.epsilon) break;
    }
    if (objective == Objective::Reward)
        for (StateId s = 0; s < n; ++s)
            if (!sure.contains(s)) x[s] = kInfinity;
    out.values = std::move(x);
    return out;
}

} // namespace

ValueVector robust_value(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target,
                         Objective objective, Direction player, Direction adversary, const ViOptions& options) {
    return iterate(model, theta, target, objective, player, adversary, options, Kernel::Parallel);
}

ValueVector robust_value_serial(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target,
                                Objective objective, Direction player, Direction adversary,
                                const ViOptions& options) {
    return iterate(model, theta, target, objective, player, adversary, options, Kernel::Serial);
}

std::vector<double> apply_robust_operator(const ImdpModel& model, const MultiStrategy& theta,
                                          const StateSet& target, Objective objective, Direction player,
                                          Direction adversary, const std::vector<double>& x) {
    const Normalized norm = normalize(model, theta, target);
    const Admitted adm(norm.model, norm.theta);
    if (x.size() != norm.model.num_states()) throw Error("value vector does not match the model");
    const Sweep sweep{norm.model, adm, target, nullptr, objective, player, adversary};
    std::vector<double> out(x.size());
    sweep_once(sweep, x, out, Kernel::Serial);
    return out;
}

StateSet positive_reach_set(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target) {
    const Normalized norm = normalize(model, theta, target);
    const Admitted adm(norm.model, norm.theta);
    return forced_attractor(adm, target, false, [](StateId, std::size_t) { return true; });
}

StateSet almost_sure_reach_set(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target) {
    const Normalized norm = normalize(model, theta, target);
    const Admitted adm(norm.model, norm.theta);
    return almost_sure_normalized(adm, target);
}

StateSet possibly_reaching_set(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target) {
    const Normalized norm = normalize(model, theta, target);
    const Admitted adm(norm.model, norm.theta);
    return possible_closure(adm, target);
}

StateSet exists_almost_sure_set(const ImdpModel& model, const StateSet& target) {
    const Normalized norm = normalize(model, MultiStrategy::full(model), target);
    const Admitted adm(norm.model, norm.theta);
    // Greatest fixed point: keep the states that can be steered into the
    // target with positive probability using only choices that stay inside.
    StateSet keep(norm.model.num_states());
    for (StateId s = 0; s < keep.universe(); ++s) keep.insert(s);
    for (;;) {
        auto stays = [&](StateId s, std::size_t j) {
            const IntervalRow& row = adm.rows[s][j]->row;
            for (std::size_t i = 0; i < row.size(); ++i)
                if (possible_successor(row, i) && !keep.contains(row[i].state)) return false;
            return keep.contains(s);
        };
        const StateSet next = forced_attractor(adm, target, true, stays);
        if (next == keep) return keep;
        keep = next;
    }
}

Objective objective_of(SpecKind kind) {
    return kind == SpecKind::RewGe || kind == SpecKind::RewLe ? Objective::Reward : Objective::Reach;
}

Direction direction_of(SpecKind kind) {
    return kind == SpecKind::ProbGe || kind == SpecKind::RewGe ? Direction::Min : Direction::Max;
}

SatisfactionVerdict check_robust_satisfaction(const ImdpModel& model, const MultiStrategy& theta, const Spec& spec,
                                              const ViOptions& options) {
    require_valid(model, spec);
    require_valid(model, theta);
    const StateSet target = spec.target_set(model.num_states());
    const Direction dir = direction_of(spec.kind);
    const ValueVector value = robust_value(model, theta, target, objective_of(spec.kind), dir, dir, options);

    SatisfactionVerdict verdict;
    verdict.witness = value[model.initial];
    if (spec.reward()) verdict.almost_sure = std::isfinite(verdict.witness);
    if (!verdict.almost_sure) {
        verdict.reason = "target is not reached with probability 1 from the initial state";
        return verdict;
    }
    verdict.satisfied = spec.lower_bound() ? verdict.witness >= spec.threshold - kThresholdTolerance
                                           : verdict.witness <= spec.threshold + kThresholdTolerance;
    if (!verdict.satisfied)
        verdict.reason = "robust value " + std::to_string(verdict.witness) +
                         (spec.lower_bound() ? " is below " : " is above ") + std::to_string(spec.threshold);
    return verdict;
}

// ---------------------------------------------------------------------------
// Brute force

namespace {

/// Solves A·z = b in place by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-300) throw Error("singular Markov-chain system");
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> z(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * z[c];
        z[i] = acc / a[i][i];
    }
    return z;
}

/// Backward reachability over the positive entries of a chain.
StateSet chain_backward(const std::vector<std::vector<double>>& p, const StateSet& seed) {
    const std::size_t n = p.size();
    StateSet in = seed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (StateId s = 0; s < n; ++s) {
            if (in.contains(s)) continue;
            for (StateId t = 0; t < n; ++t)
                if (p[s][t] > 0.0 && in.contains(t)) {
                    in.insert(s);
                    changed = true;
                    break;
                }
        }
    }
    return in;
}

} // namespace

std::vector<double> markov_chain_value(const std::vector<std::vector<double>>& transition,
                                       const std::vector<double>& reward, const StateSet& target,
                                       Objective objective) {
    const std::size_t n = transition.size();
    const StateSet reaching = chain_backward(transition, target);
    StateSet solve_set(n);
    std::vector<double> out(n, 0.0);
    if (objective == Objective::Reach) {
        for (StateId s = 0; s < n; ++s) {
            if (target.contains(s)) out[s] = 1.0;
            else if (reaching.contains(s)) solve_set.insert(s);
        }
    } else {
        const StateSet doomed = chain_backward(transition, complement(reaching));
        for (StateId s = 0; s < n; ++s) {
            if (target.contains(s)) out[s] = 0.0;
            else if (doomed.contains(s)) out[s] = kInfinity;
            else solve_set.insert(s);
        }
    }
    const std::vector<StateId> vars = solve_set.members();
    if (vars.empty()) return out;
    std::vector<std::size_t> index(n, 0);
    for (std::size_t i = 0; i < vars.size(); ++i) index[vars[i]] = i;
    std::vector<std::vector<double>> a(vars.size(), std::vector<double>(vars.size(), 0.0));
    std::vector<double> b(vars.size(), 0.0);
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const StateId s = vars[i];
        a[i][i] = 1.0;
        if (objective == Objective::Reward) b[i] = reward[s];
        for (StateId t = 0; t < n; ++t) {
            const double p = transition[s][t];
            if (p == 0.0) continue;
            if (solve_set.contains(t)) a[i][index[t]] -= p;
            else if (objective == Objective::Reach) b[i] += p * out[t];
        }
    }
    const std::vector<double> z = solve_dense(std::move(a), std::move(b));
    for (std::size_t i = 0; i < vars.size(); ++i) out[vars[i]] = z[i];
    return out;
}

ValueVector brute_force_robust_value(const ImdpModel& model, const MultiStrategy& theta, const Spec& spec,
                                     std::size_t cap) {
    return brute_force_robust_value(model, theta, spec.target_set(model.num_states()), objective_of(spec.kind),
                                    direction_of(spec.kind), cap);
}

ValueVector brute_force_robust_value(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target,
                                     Objective objective, Direction direction, std::size_t cap) {
    const Normalized norm = normalize(model, theta, target);
    const ImdpModel& m = norm.model;
    const std::size_t n = m.num_states();

    std::size_t total = 0;
    for (const DeterministicStrategy& sigma : compliant_strategies(m, norm.theta, cap)) {
        std::size_t chains = 1;
        for (StateId s = 0; s < n; ++s) {
            const std::size_t k = enumerate_vertices(m.find_choice(s, sigma.choice[s])->row).size();
            if (chains > cap / k) throw CapExceeded("brute-force enumeration exceeds the chain cap");
            chains *= k;
        }
        if (total > cap - chains) throw CapExceeded("brute-force enumeration exceeds the chain cap");
        total += chains;
    }

    ValueVector out;
    out.semantics = objective;
    out.values.assign(n, direction == Direction::Min ? kInfinity : -kInfinity);
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    std::vector<double> reward(n, 0.0);
    for (const DeterministicStrategy& sigma : compliant_strategies(m, norm.theta, cap)) {
        std::vector<const Choice*> chosen(n);
        std::vector<std::vector<VertexDistribution>> options(n);
        for (StateId s = 0; s < n; ++s) {
            chosen[s] = m.find_choice(s, sigma.choice[s]);
            options[s] = enumerate_vertices(chosen[s]->row);
            reward[s] = chosen[s]->reward;
        }
        std::vector<std::size_t> digit(n, 0);
        for (;;) {
            for (StateId s = 0; s < n; ++s) {
                std::fill(p[s].begin(), p[s].end(), 0.0);
                const IntervalRow& row = chosen[s]->row;
                const auto& prob = options[s][digit[s]].probability;
                for (std::size_t i = 0; i < row.size(); ++i) p[s][row[i].state] += prob[i];
            }
            const std::vector<double> v = markov_chain_value(p, reward, target, objective);
            for (StateId s = 0; s < n; ++s)
                out.values[s] = direction == Direction::Min ? std::min(out.values[s], v[s]) : std::max(out.values[s], v[s]);
            std::size_t pos = n;
            while (pos > 0) {
                --pos;
                if (++digit[pos] < options[pos].size()) break;
                digit[pos] = 0;
                if (pos == 0) {
                    pos = n + 1;
                    break;
                }
            }
            if (pos == n + 1 || n == 0) break;
        }
    }
    return out;
}

} // namespace imdp
