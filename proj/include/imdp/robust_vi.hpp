#pragma once

#include "imdp/model.hpp"
#include "imdp/uncertainty.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace imdp {

enum class Objective { Reach, Reward };

struct ViOptions {
    double epsilon = 1e-12;            ///< stop when the sup-norm change drops below this
    std::size_t max_iterations = 1'000'000;
    double divergence_ceiling = 1e15;  ///< reward values above this are reported as divergent
};

/// Per-state values. Reward entries of states that do not reach the target
/// almost surely are +infinity.
struct ValueVector {
    std::vector<double> values;
    Objective semantics = Objective::Reach;
    std::size_t iterations = 0;

    double operator[](StateId s) const { return values.at(s); }
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Robust value iteration under a multi-strategy:
///   x_s ← opt_player_{a ∈ θ(s)} [ r(s,a)·[reward] + opt_adversary_{P ∈ 𝒫(s,a)} Σ P·x ]
/// with target states pinned (1 for reach, 0 for reward), iterated from 0
/// with synchronous (Jacobi) sweeps. Target states are made absorbing first.
/// The sweep runs in parallel when OpenMP is enabled; results are identical
/// to robust_value_serial.
ValueVector robust_value(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target,
                         Objective objective, Direction player, Direction adversary, const ViOptions& options = {});

/// Single-threaded reference kernel with the same contract as robust_value.
ValueVector robust_value_serial(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target,
                                Objective objective, Direction player, Direction adversary,
                                const ViOptions& options = {});

/// One application of the robust Bellman operator to `x` (the operator whose
/// fixed point robust_value computes). Non-almost-sure states are not special
/// cased here; callers pass finite vectors.
std::vector<double> apply_robust_operator(const ImdpModel& model, const MultiStrategy& theta,
                                          const StateSet& target, Objective objective, Direction player,
                                          Direction adversary, const std::vector<double>& x);

// ---------------------------------------------------------------------------
// Qualitative reachability over the interval structure (see forced_into and
// possible_successor for the per-row semantics).

/// States from which every compliant strategy under every admissible
/// transition function reaches `target` with positive probability.
StateSet positive_reach_set(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target);

/// States from which every compliant strategy under every admissible
/// transition function reaches `target` with probability 1.
StateSet almost_sure_reach_set(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target);

/// States with at least one path to `target` using admitted actions and
/// possible successors.
StateSet possibly_reaching_set(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target);

/// States from which some deterministic strategy reaches `target` with
/// probability 1 under every admissible transition function.
StateSet exists_almost_sure_set(const ImdpModel& model, const StateSet& target);

// ---------------------------------------------------------------------------

struct SatisfactionVerdict {
    bool satisfied = false;
    double witness = 0.0;          ///< robust value at the initial state
    bool almost_sure = true;       ///< reward kinds: initial state reaches the target surely
    std::string reason;
};

/// Tolerance on threshold comparisons in check_robust_satisfaction.
inline constexpr double kThresholdTolerance = 1e-9;

/// Robust satisfaction of `spec` by every strategy compliant with `theta`
/// under every admissible transition function. Targets are made absorbing
/// and `theta` is restricted accordingly.
SatisfactionVerdict check_robust_satisfaction(const ImdpModel& model, const MultiStrategy& theta, const Spec& spec,
                                              const ViOptions& options = {});

/// Value objective and optimization direction a spec kind is judged by.
Objective objective_of(SpecKind kind);
Direction direction_of(SpecKind kind);

/// Exact reference values by exhaustive enumeration: every compliant
/// strategy × every stationary vertex selection, each induced Markov chain
/// solved by Gaussian elimination; pointwise inf (`>=` kinds) or sup
/// (`<=` kinds). Throws CapExceeded when more than `cap` chains would be
/// evaluated.
ValueVector brute_force_robust_value(const ImdpModel& model, const MultiStrategy& theta, const Spec& spec,
                                     std::size_t cap = 10'000'000);

/// Same enumeration for an explicit objective and direction.
ValueVector brute_force_robust_value(const ImdpModel& model, const MultiStrategy& theta, const StateSet& target,
                                     Objective objective, Direction direction, std::size_t cap = 10'000'000);

/// Value of a Markov chain given as a dense row-stochastic matrix: reach
/// probability of `target`, or expected total reward until `target` (+inf
/// where the target is not reached almost surely).
std::vector<double> markov_chain_value(const std::vector<std::vector<double>>& transition,
                                       const std::vector<double>& reward, const StateSet& target,
                                       Objective objective);

} // namespace imdp
