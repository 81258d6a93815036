#pragma once

#include "imdp/milp.hpp"
#include "imdp/model.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace imdp {

enum class EncodingKind { Vertex, Dual };

std::string to_string(EncodingKind kind);
EncodingKind parse_encoding_kind(const std::string& text);

struct EncodingOptions {
    std::size_t vertex_constraint_cap = 10'000'000; ///< cap on Σ |V(s,a)| for the vertex encoding
    std::optional<double> big_m;                     ///< overrides compute_big_m
    /// Bound every x_s by the value the best single strategy guarantees (no
    /// integer-feasible point lies beyond it); tightens the relaxation.
    bool tighten_value_bounds = true;
};

/// M = 2 for probability kinds; for reward kinds 1.01·max(V, r_max) + 1 where V
/// is the largest robust max-max reward-to-go over the states that can reach
/// the target almost surely (using only actions that keep them there) and
/// r_max the largest reward. Throws Divergence if those values are unbounded.
double compute_big_m(const ImdpModel& model, const Spec& spec);

/// Encoding 1: one robust constraint per vertex of every decision row.
MilpProblem build_vertex_encoding(const ImdpModel& model, const Spec& spec, const EncodingOptions& options = {});

/// Encoding 2: the inner worst case replaced by its LP dual with a big-M
/// linearization of λ·y.
MilpProblem build_dual_encoding(const ImdpModel& model, const Spec& spec, const EncodingOptions& options = {});

MilpProblem build_encoding(EncodingKind kind, const ImdpModel& model, const Spec& spec,
                           const EncodingOptions& options = {});

struct EncodingStats {
    std::size_t binaries = 0;
    std::size_t continuous = 0;
    std::size_t constraints = 0;
    std::map<ConstraintRole, std::size_t> by_role;
    /// Robust constraints per (state, action) pair; for the vertex encoding
    /// this is |V(s,a)|.
    std::map<std::pair<StateId, ActionId>, std::size_t> robust_per_pair;

    std::size_t count(ConstraintRole role) const {
        const auto it = by_role.find(role);
        return it == by_role.end() ? 0 : it->second;
    }
};

EncodingStats encoding_stats(const MilpProblem& problem);

/// Name of the admit variable of (s, a): `y_<s>_<action>`.
std::string admit_variable_name(const ImdpModel& model, StateId s, ActionId a);

} // namespace imdp
