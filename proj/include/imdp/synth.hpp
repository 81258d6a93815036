#pragma once

#include "imdp/encode.hpp"
#include "imdp/model.hpp"
#include "imdp/robust_vi.hpp"
#include "imdp/solve.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace imdp {

struct SynthesisConfig {
    EncodingKind encoding = EncodingKind::Vertex;
    EncodingOptions encoding_options;
    SolverConfig solver;
    ViOptions vi;
    bool check_maximality = true;
    std::size_t maximality_budget = 14; ///< exhaustive tier runs when Σ_s |α(s)| is at most this
};

struct MaximalityVerdict {
    bool augmentation_ok = true;
    std::vector<std::pair<StateId, ActionId>> satisfying_augmentations;
    bool exhaustive_checked = false;
    bool exhaustive_ok = true;
    std::size_t exhaustive_candidates = 0;
    std::string skipped_reason;

    bool maximal() const { return augmentation_ok && exhaustive_ok; }
};

enum class SynthesisStatus { Synthesized, Infeasible };

struct SynthesisReport {
    SynthesisStatus status = SynthesisStatus::Infeasible;
    EncodingKind encoding = EncodingKind::Vertex;
    MultiStrategy theta;
    double objective = 0.0;
    std::size_t beta = 0;            ///< admitted decision pairs (what the MILP counts)
    std::size_t admitted_pairs = 0;  ///< all admitted pairs, implicit self-loops included
    double normalized_permissiveness = 0.0;
    std::optional<double> choice_state_permissiveness;
    double big_m = 0.0;
    EncodingStats stats;
    SolveStatus solver_status = SolveStatus::Infeasible;
    std::size_t solver_nodes = 0;
    double build_seconds = 0.0;
    double solve_seconds = 0.0;
    SatisfactionVerdict verification;
    std::optional<MaximalityVerdict> maximality;
};

/// Builds the chosen encoding, solves it, extracts θ and verifies it by robust
/// value iteration. Throws VerificationFailure if θ does not robustly satisfy
/// the spec or the objective differs from its decision-pair count, and
/// CapExceeded if the solver stops at a cap.
SynthesisReport synthesize(const ImdpModel& model, const Spec& spec, const SynthesisConfig& config = {});

/// θ(s) = {a : y_{s,a} > 1 − tolerance}; target and absorbing states admit
/// all their enabled actions. Throws Error if a state is left empty.
MultiStrategy extract_strategy(const MilpProblem& problem, const Assignment& assignment, const ImdpModel& model,
                               const Spec& spec, double tolerance = 1e-6);

/// Admitted explicit actions at non-target states: the quantity the MILP maximizes.
std::size_t decision_permissiveness(const ImdpModel& model, const MultiStrategy& theta, const Spec& spec);

/// Two-tier maximality check: no single added action keeps the spec
/// satisfied, and, when the model is small enough, no multi-strategy with a
/// larger decision-pair count satisfies it.
MaximalityVerdict check_maximality(const ImdpModel& model, const Spec& spec, const MultiStrategy& theta,
                                   std::size_t budget = 14, const ViOptions& vi = {});

struct SweepRow {
    double epsilon = 0.0;
    std::string action;
    double min_value = 0.0;
    double max_value = 0.0;
};

/// For every ε of the grid and every action of interest: reachability of the
/// labelled target from the initial state with θ(initial) = {action} and all
/// other states unrestricted, minimized and maximized over strategies and
/// transition functions.
std::vector<SweepRow> sweep_epsilon(const std::function<ImdpModel(double)>& model_at, const std::string& target_label,
                                    const std::vector<std::string>& actions, const std::vector<double>& grid);

/// from + i·step for i = 0 .. round((to − from)/step).
std::vector<double> epsilon_grid(double from, double to, double step);

/// Header `epsilon,action,min_value,max_value`, 17-digit numerals.
std::string sweep_csv(const std::vector<SweepRow>& rows);

std::string format_report(const ImdpModel& model, const Spec& spec, const SynthesisReport& report);
std::string report_json(const ImdpModel& model, const Spec& spec, const SynthesisReport& report);

} // namespace imdp
