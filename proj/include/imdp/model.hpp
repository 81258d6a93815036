#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace imdp {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

/// Action id of the implicit self-loop carried by absorbing states.
inline constexpr ActionId kSelfLoop = std::numeric_limits<ActionId>::max();

/// Label printed for the implicit self-loop action.
inline constexpr const char* kSelfLoopLabel = "@loop";

/// Absolute slack accepted when comparing interval sums against 1.
inline constexpr double kSumTolerance = 1e-9;

struct Successor {
    StateId state = 0;
    double lower = 0.0;
    double upper = 0.0;

    bool operator==(const Successor&) const = default;
};

/// Interval bounds of one (state, action) pair, sorted by successor.
using IntervalRow = std::vector<Successor>;

struct Choice {
    ActionId action = kSelfLoop;
    IntervalRow row;
    double reward = 0.0;

    bool implicit() const { return action == kSelfLoop; }
    bool operator==(const Choice&) const = default;
};

/// Dense set of states.
class StateSet {
public:
    StateSet() = default;
    explicit StateSet(std::size_t num_states) : bits_(num_states, 0) {}
    StateSet(std::size_t num_states, const std::vector<StateId>& members);

    std::size_t universe() const { return bits_.size(); }
    bool contains(StateId s) const { return s < bits_.size() && bits_[s] != 0; }
    void insert(StateId s) { bits_.at(s) = 1; }
    void erase(StateId s) { bits_.at(s) = 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    std::vector<StateId> members() const;

    bool operator==(const StateSet&) const = default;

private:
    std::vector<std::uint8_t> bits_;
};

/// Interval MDP. States are dense indices; `choices[s]` lists the enabled
/// actions of `s` in ascending action order. A state whose only choice is the
/// implicit self-loop is absorbing.
struct ImdpModel {
    std::vector<std::string> state_names; // empty string: unnamed
    StateId initial = 0;
    std::vector<std::string> actions;
    std::vector<std::vector<Choice>> choices;
    std::map<std::string, std::vector<StateId>> labels;

    std::size_t num_states() const { return choices.size(); }
    const Choice* find_choice(StateId s, ActionId a) const;
    std::vector<ActionId> enabled(StateId s) const;
    std::size_t enabled_pairs() const;
    std::string action_name(ActionId a) const;
    std::string state_name(StateId s) const;
    bool absorbing(StateId s) const;

    bool operator==(const ImdpModel&) const = default;
};

enum class SpecKind { ProbGe, ProbLe, RewGe, RewLe };

struct Spec {
    SpecKind kind = SpecKind::ProbGe;
    double threshold = 0.0;
    std::string label;
    std::vector<StateId> target; // sorted, nonempty

    bool reward() const { return kind == SpecKind::RewGe || kind == SpecKind::RewLe; }
    /// True for the `>=` forms, whose robust value is the pessimistic minimum.
    bool lower_bound() const { return kind == SpecKind::ProbGe || kind == SpecKind::RewGe; }
    StateSet target_set(std::size_t num_states) const { return {num_states, target}; }
};

std::string to_string(SpecKind kind);

/// Per-state admitted action sets, each sorted ascending.
struct MultiStrategy {
    std::vector<std::vector<ActionId>> admitted;

    static MultiStrategy full(const ImdpModel& model);
    bool admits(StateId s, ActionId a) const;
    bool operator==(const MultiStrategy&) const = default;
};

struct DeterministicStrategy {
    std::vector<ActionId> choice;

    bool operator==(const DeterministicStrategy&) const = default;
};

struct Diagnostic {
    enum class Severity { Error, Warning };

    Severity severity = Severity::Error;
    std::string message;
    std::optional<StateId> state;
    std::optional<ActionId> action;
    std::optional<StateId> successor;

    std::string describe(const ImdpModel* model = nullptr) const;
};

/// Every violated structural invariant of `model`, located. Empty iff valid.
std::vector<Diagnostic> validate_model(const ImdpModel& model);

std::vector<Diagnostic> validate_strategy(const ImdpModel& model, const MultiStrategy& theta);

std::vector<Diagnostic> validate_spec(const ImdpModel& model, const Spec& spec);

/// Throws imdp::Error carrying the first error-severity diagnostic, if any.
void require_valid(const ImdpModel& model);
void require_valid(const ImdpModel& model, const MultiStrategy& theta);
void require_valid(const ImdpModel& model, const Spec& spec);

/// Replaces the choices of every target state by the implicit self-loop with
/// reward 0. Idempotent.
ImdpModel with_absorbing_targets(ImdpModel model, const std::vector<StateId>& target);

/// Restricts `theta` to the actions still enabled in `model`; states left
/// empty fall back to all enabled actions.
MultiStrategy restrict_to(const ImdpModel& model, const MultiStrategy& theta);

/// Total number of admitted (state, action) pairs.
std::size_t permissiveness(const ImdpModel& model, const MultiStrategy& theta);

/// permissiveness(theta) / permissiveness(full).
double normalized_permissiveness(const ImdpModel& model, const MultiStrategy& theta);

/// Normalized permissiveness restricted to choice states: non-target states
/// with at least two enabled actions that are reachable from the initial
/// state through actions admitted by `theta` over edges with upper bound > 0.
/// Empty when there is no choice state.
std::optional<double> choice_state_permissiveness(const ImdpModel& model,
                                                  const MultiStrategy& theta,
                                                  const Spec& spec);

/// Lazily enumerates the deterministic memoryless strategies compliant with a
/// multi-strategy, in lexicographic order of per-state choices (state 0 is the
/// most significant position).
class CompliantStrategies {
public:
    static constexpr std::size_t kDefaultCap = 1'000'000;

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = DeterministicStrategy;
        using difference_type = std::ptrdiff_t;
        using pointer = const DeterministicStrategy*;
        using reference = const DeterministicStrategy&;

        iterator() = default;
        reference operator*() const { return current_; }
        pointer operator->() const { return &current_; }
        iterator& operator++();
        void operator++(int) { ++*this; }
        bool operator==(const iterator& other) const { return done_ == other.done_ && (done_ || digits_ == other.digits_); }

    private:
        friend class CompliantStrategies;
        iterator(const std::vector<std::vector<ActionId>>* sets, bool done);

        const std::vector<std::vector<ActionId>>* sets_ = nullptr;
        std::vector<std::size_t> digits_;
        DeterministicStrategy current_;
        bool done_ = true;
    };

    CompliantStrategies(const ImdpModel& model, const MultiStrategy& theta,
                        std::size_t cap = kDefaultCap);

    /// Number of compliant strategies, Π_s |θ(s)|.
    std::size_t size() const { return count_; }
    iterator begin() const { return iterator(&sets_, count_ == 0); }
    iterator end() const { return iterator(); }

private:
    std::vector<std::vector<ActionId>> sets_;
    std::size_t count_ = 0;
};

inline CompliantStrategies compliant_strategies(const ImdpModel& model, const MultiStrategy& theta,
                                                std::size_t cap = CompliantStrategies::kDefaultCap) {
    return {model, theta, cap};
}

/// The multi-strategy admitting exactly the choices of `sigma`.
MultiStrategy as_multi_strategy(const DeterministicStrategy& sigma);

} // namespace imdp
