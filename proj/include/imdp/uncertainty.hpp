#pragma once

#include "imdp/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace imdp {

enum class Direction { Min, Max };

/// A distribution over the successors of one row, aligned with the row order.
struct VertexDistribution {
    std::vector<double> probability;

    bool operator==(const VertexDistribution&) const = default;
};

/// Two vertices are the same when every coordinate agrees within this bound.
inline constexpr double kVertexTolerance = 1e-12;

/// Default cap on residual/bound-pattern candidates examined per row.
inline constexpr std::size_t kDefaultVertexCandidateCap = 50'000'000;

/// True iff Σ lower ≤ 1 ≤ Σ upper (within kSumTolerance).
bool is_feasible(std::span<const Successor> row);

/// Extreme points of the row polytope {P : lower ≤ P ≤ upper, Σ P = 1}.
/// Each candidate fixes one residual successor and puts every other
/// successor at a bound; the residual absorbs 1 − Σ(others) and the
/// candidate survives iff the residual stays within its own bounds.
/// Deduplicated, in order of first generation.
std::vector<VertexDistribution> enumerate_vertices(std::span<const Successor> row,
                                                   std::size_t candidate_cap = kDefaultVertexCandidateCap);

/// Number of candidates enumerate_vertices would examine, k·2^(k−1), saturating.
std::size_t vertex_candidate_count(std::size_t k);

struct Expectation {
    double value = 0.0;
    VertexDistribution vertex;
};

/// Optimum of Σ P(s')·values[i] over the row polytope, `values` aligned with
/// the row. Greedy: start at the lower bounds and hand the remaining mass to
/// successors in ascending (Min) or descending (Max) value order, ties by
/// ascending row position. The returned distribution is a vertex.
Expectation worst_case_expectation(std::span<const Successor> row, std::span<const double> values,
                                   Direction direction);

/// Same optimum with values looked up per state id; no allocation beyond
/// `scratch`, used by the value-iteration kernels.
double optimal_expectation(std::span<const Successor> row, std::span<const double> state_values,
                           Direction direction, std::vector<std::size_t>& scratch);

// ---------------------------------------------------------------------------
// Qualitative queries. Masses at or below kQualitativeTolerance count as zero.

inline constexpr double kQualitativeTolerance = 1e-9;

/// Largest probability any admissible distribution puts on row position `i`.
double max_mass_of(std::span<const Successor> row, std::size_t i);

/// True iff some admissible distribution gives successor position `i`
/// positive probability.
bool possible_successor(std::span<const Successor> row, std::size_t i);

/// True iff every admissible distribution puts positive mass on the states
/// selected by `in_set`: some selected successor has a positive lower bound,
/// or the unselected successors cannot absorb all mass.
template <class Pred>
bool forced_into(std::span<const Successor> row, Pred in_set) {
    double outside_upper = 0.0;
    for (const Successor& t : row) {
        if (in_set(t.state)) {
            if (t.lower > kQualitativeTolerance) return true;
        } else {
            outside_upper += t.upper;
        }
    }
    return outside_upper < 1.0 - kQualitativeTolerance;
}

} // namespace imdp
