#include "imdp/model.hpp"

#include "imdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace imdp {

StateSet::StateSet(std::size_t num_states, const std::vector<StateId>& members) : bits_(num_states, 0) {
    for (StateId s : members) insert(s);
}

std::size_t StateSet::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<StateId> StateSet::members() const {
    std::vector<StateId> out;
    for (std::size_t s = 0; s < bits_.size(); ++s)
        if (bits_[s]) out.push_back(static_cast<StateId>(s));
    return out;
}

const Choice* ImdpModel::find_choice(StateId s, ActionId a) const {
    if (s >= choices.size()) return nullptr;
    for (const Choice& c : choices[s])
        if (c.action == a) return &c;
    return nullptr;
}

std::vector<ActionId> ImdpModel::enabled(StateId s) const {
    std::vector<ActionId> out;
    out.reserve(choices.at(s).size());
    for (const Choice& c : choices[s]) out.push_back(c.action);
    return out;
}

std::size_t ImdpModel::enabled_pairs() const {
    std::size_t n = 0;
    for (const auto& cs : choices) n += cs.size();
    return n;
}

std::string ImdpModel::action_name(ActionId a) const {
    if (a == kSelfLoop) return kSelfLoopLabel;
    if (a < actions.size()) return actions[a];
    return "#" + std::to_string(a);
}

std::string ImdpModel::state_name(StateId s) const {
    if (s < state_names.size() && !state_names[s].empty()) return state_names[s];
    return std::to_string(s);
}

bool ImdpModel::absorbing(StateId s) const {
    return choices.at(s).size() == 1 && choices[s].front().implicit();
}

std::string to_string(SpecKind kind) {
    switch (kind) {
    case SpecKind::ProbGe: return "P>=";
    case SpecKind::ProbLe: return "P<=";
    case SpecKind::RewGe: return "R>=";
    case SpecKind::RewLe: return "R<=";
    }
    return "?";
}

MultiStrategy MultiStrategy::full(const ImdpModel& model) {
    MultiStrategy theta;
    theta.admitted.resize(model.num_states());
    for (StateId s = 0; s < model.num_states(); ++s) theta.admitted[s] = model.enabled(s);
    return theta;
}

bool MultiStrategy::admits(StateId s, ActionId a) const {
    if (s >= admitted.size()) return false;
    return std::binary_search(admitted[s].begin(), admitted[s].end(), a);
}

std::string Diagnostic::describe(const ImdpModel* model) const {
    std::ostringstream out;
    out << (severity == Severity::Error ? "error" : "warning");
    if (state) out << " state " << (model ? model->state_name(*state) : std::to_string(*state));
    if (action) out << " action " << (model ? model->action_name(*action) : std::to_string(*action));
    if (successor) out << " successor " << (model ? model->state_name(*successor) : std::to_string(*successor));
    out << ": " << message;
    return out.str();
}

namespace {

std::string format_number(double v) {
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}

Diagnostic located(std::string message, std::optional<StateId> s = {}, std::optional<ActionId> a = {},
                   std::optional<StateId> succ = {}) {
    return Diagnostic{Diagnostic::Severity::Error, std::move(message), s, a, succ};
}

} // namespace

std::vector<Diagnostic> validate_model(const ImdpModel& model) {
    std::vector<Diagnostic> out;
    const std::size_t n = model.num_states();
    if (n == 0) {
        out.push_back(located("model has no states"));
        return out;
    }
    if (model.initial >= n) out.push_back(located("initial state out of range"));
    if (!model.state_names.empty() && model.state_names.size() != n)
        out.push_back(located("state name table size differs from state count"));

    for (StateId s = 0; s < n; ++s) {
        const auto& cs = model.choices[s];
        if (cs.empty()) {
            out.push_back(located("no enabled action", s));
            continue;
        }
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const Choice& c = cs[i];
            const ActionId a = c.action;
            if (c.implicit()) {
                if (cs.size() != 1) out.push_back(located("implicit self-loop must be the only choice", s, a));
                if (c.row.size() != 1 || c.row[0].state != s || c.row[0].lower != 1.0 || c.row[0].upper != 1.0)
                    out.push_back(located("implicit self-loop must be the point interval [1, 1] on itself", s, a));
            } else if (a >= model.actions.size()) {
                out.push_back(located("undeclared action", s, a));
            }
            if (i > 0 && cs[i - 1].action >= a) out.push_back(located("choices not in ascending action order", s, a));
            if (!std::isfinite(c.reward) || c.reward < 0.0) out.push_back(located("reward must be finite and >= 0", s, a));

            double lo_sum = 0.0;
            double hi_sum = 0.0;
            bool any_positive = false;
            for (std::size_t k = 0; k < c.row.size(); ++k) {
                const Successor& t = c.row[k];
                if (t.state >= n) {
                    out.push_back(located("successor out of range", s, a, t.state));
                    continue;
                }
                if (k > 0 && c.row[k - 1].state >= t.state)
                    out.push_back(located("successors not strictly ascending (duplicate transition?)", s, a, t.state));
                if (!(t.lower >= 0.0 && t.lower <= 1.0) || !(t.upper >= 0.0 && t.upper <= 1.0))
                    out.push_back(located("bound outside [0, 1]", s, a, t.state));
                if (t.lower > t.upper) out.push_back(located("lower exceeds upper", s, a, t.state));
                lo_sum += t.lower;
                hi_sum += t.upper;
                any_positive = any_positive || t.upper > 0.0;
            }
            if (!any_positive) out.push_back(located("no successor with positive upper bound", s, a));
            if (lo_sum > 1.0 + kSumTolerance)
                out.push_back(located("lower sum " + format_number(lo_sum) + " exceeds 1", s, a));
            if (hi_sum < 1.0 - kSumTolerance)
                out.push_back(located("upper sum " + format_number(hi_sum) + " below 1", s, a));
        }
    }
    for (const auto& [name, states] : model.labels)
        for (StateId s : states)
            if (s >= n) out.push_back(located("label \"" + name + "\" references state out of range", s));
    return out;
}

std::vector<Diagnostic> validate_strategy(const ImdpModel& model, const MultiStrategy& theta) {
    std::vector<Diagnostic> out;
    if (theta.admitted.size() != model.num_states()) {
        out.push_back(located("strategy covers " + std::to_string(theta.admitted.size()) + " states, model has " +
                              std::to_string(model.num_states())));
        return out;
    }
    for (StateId s = 0; s < model.num_states(); ++s) {
        const auto& set = theta.admitted[s];
        if (set.empty()) out.push_back(located("empty admitted action set", s));
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (i > 0 && set[i - 1] >= set[i]) out.push_back(located("admitted set not strictly ascending", s, set[i]));
            if (!model.find_choice(s, set[i])) out.push_back(located("admitted action not enabled", s, set[i]));
        }
    }
    return out;
}

std::vector<Diagnostic> validate_spec(const ImdpModel& model, const Spec& spec) {
    std::vector<Diagnostic> out;
    if (!std::isfinite(spec.threshold)) out.push_back(located("threshold is not finite"));
    if (spec.reward()) {
        if (spec.threshold < 0.0) out.push_back(located("reward threshold must be >= 0"));
    } else if (spec.threshold < 0.0 || spec.threshold > 1.0) {
        out.push_back(located("probability threshold must lie in [0, 1]"));
    }
    if (spec.target.empty()) out.push_back(located("empty target set"));
    for (StateId s : spec.target)
        if (s >= model.num_states()) out.push_back(located("target state out of range", s));
    return out;
}

namespace {

void throw_first(const std::vector<Diagnostic>& diags, const ImdpModel& model) {
    for (const auto& d : diags)
        if (d.severity == Diagnostic::Severity::Error) throw Error(d.describe(&model));
}

} // namespace

void require_valid(const ImdpModel& model) { throw_first(validate_model(model), model); }

void require_valid(const ImdpModel& model, const MultiStrategy& theta) {
    throw_first(validate_strategy(model, theta), model);
}

void require_valid(const ImdpModel& model, const Spec& spec) { throw_first(validate_spec(model, spec), model); }

ImdpModel with_absorbing_targets(ImdpModel model, const std::vector<StateId>& target) {
    for (StateId s : target) {
        if (s >= model.num_states()) throw Error("target state out of range");
        model.choices[s] = {Choice{kSelfLoop, {{s, 1.0, 1.0}}, 0.0}};
    }
    return model;
}

MultiStrategy restrict_to(const ImdpModel& model, const MultiStrategy& theta) {
    MultiStrategy out;
    out.admitted.resize(model.num_states());
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (s < theta.admitted.size())
            for (ActionId a : theta.admitted[s])
                if (model.find_choice(s, a)) out.admitted[s].push_back(a);
        if (out.admitted[s].empty()) out.admitted[s] = model.enabled(s);
    }
    return out;
}

std::size_t permissiveness(const ImdpModel& model, const MultiStrategy& theta) {
    std::size_t beta = 0;
    for (StateId s = 0; s < model.num_states(); ++s) beta += theta.admitted.at(s).size();
    return beta;
}

double normalized_permissiveness(const ImdpModel& model, const MultiStrategy& theta) {
    const std::size_t total = model.enabled_pairs();
    if (total == 0) return 1.0;
    return static_cast<double>(permissiveness(model, theta)) / static_cast<double>(total);
}

std::optional<double> choice_state_permissiveness(const ImdpModel& model, const MultiStrategy& theta,
                                                  const Spec& spec) {
    const std::size_t n = model.num_states();
    const StateSet target = spec.target_set(n);
    StateSet seen(n);
    std::deque<StateId> queue{model.initial};
    seen.insert(model.initial);
    while (!queue.empty()) {
        const StateId s = queue.front();
        queue.pop_front();
        if (target.contains(s)) continue;
        for (ActionId a : theta.admitted.at(s)) {
            const Choice* c = model.find_choice(s, a);
            if (!c) continue;
            for (const Successor& t : c->row)
                if (t.upper > 0.0 && !seen.contains(t.state)) {
                    seen.insert(t.state);
                    queue.push_back(t.state);
                }
        }
    }
    std::size_t admitted = 0;
    std::size_t enabled = 0;
    for (StateId s = 0; s < n; ++s) {
        if (!seen.contains(s) || target.contains(s) || model.choices[s].size() < 2) continue;
        admitted += theta.admitted[s].size();
        enabled += model.choices[s].size();
    }
    if (enabled == 0) return std::nullopt;
    return static_cast<double>(admitted) / static_cast<double>(enabled);
}

CompliantStrategies::CompliantStrategies(const ImdpModel& model, const MultiStrategy& theta, std::size_t cap)
    : sets_(theta.admitted) {
    if (sets_.size() != model.num_states()) throw Error("strategy does not match model state count");
    count_ = 1;
    for (const auto& set : sets_) {
        if (set.empty()) {
            count_ = 0;
            return;
        }
        if (count_ > cap / set.size())
            throw CapExceeded("more than " + std::to_string(cap) + " compliant strategies");
        count_ *= set.size();
    }
    if (count_ > cap) throw CapExceeded("more than " + std::to_string(cap) + " compliant strategies");
}

CompliantStrategies::iterator::iterator(const std::vector<std::vector<ActionId>>* sets, bool done)
    : sets_(sets), done_(done) {
    if (done_) return;
    digits_.assign(sets_->size(), 0);
    current_.choice.resize(sets_->size());
    for (std::size_t s = 0; s < sets_->size(); ++s) current_.choice[s] = (*sets_)[s][0];
}

CompliantStrategies::iterator& CompliantStrategies::iterator::operator++() {
    if (done_) return *this;
    // Odometer with the last state as the least significant digit.
    for (std::size_t k = digits_.size(); k-- > 0;) {
        if (++digits_[k] < (*sets_)[k].size()) {
            current_.choice[k] = (*sets_)[k][digits_[k]];
            return *this;
        }
        digits_[k] = 0;
        current_.choice[k] = (*sets_)[k][0];
    }
    done_ = true;
    digits_.clear();
    return *this;
}

MultiStrategy as_multi_strategy(const DeterministicStrategy& sigma) {
    MultiStrategy theta;
    theta.admitted.reserve(sigma.choice.size());
    for (ActionId a : sigma.choice) theta.admitted.push_back({a});
    return theta;
}

} // namespace imdp
