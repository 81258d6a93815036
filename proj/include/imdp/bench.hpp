#pragma once

#include "imdp/model.hpp"
#include "imdp/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace imdp {

struct BenchmarkInstance {
    std::string domain;
    std::string params;
    ImdpModel model;
    Spec spec;
    bool expected_solvable = true;
};

/// Running example: s0 chooses fast (f) or medium (m); s1 continues with m;
/// s2 is an absorbing trap, s3 the absorbing goal. Spec P>=p [F "goal"].
/// The medium nominal 0.9 is a reconstruction that reproduces every reported
/// admission outcome.
BenchmarkInstance gen_nav3(double epsilon, double p = 0.65);

/// Frozen-lake grid. Cells c<r>_<c>, start (0,0), goal (grid-1,grid-1), traps
/// at density 0.1. A move draws its direction at once (intended 0.8 ± ε,
/// each side slip 0.1 ± ε; a wall keeps the agent in place) and then walks a
/// deterministic chain of steps-1 micro-states to the neighbouring cell.
/// Spec P>=p [F "goal"] with p = fraction · (best robust value), unless
/// `threshold` is given.
BenchmarkInstance gen_obs(int grid, int steps, double epsilon, std::uint64_t seed, double fraction = 0.9,
                          std::optional<double> threshold = std::nullopt);

/// Vehicle on a grid that must keep in contact with a controller. State:
/// position and steps since last contact d (at most grid/2). Moves stay inside
/// the grid, are deterministic and increase d; exceeding grid/2 leads to the
/// failure sink. Out of contact (d >= 1), channels 1 and 2 restore contact
/// (d = 0) but lose the message with probability 0.2 ± ε and 0.4 ± ε, which
/// also costs a step (d + 1). Loss rates are scaled by distance to the
/// nearest of two seeded relays and by `loss_scale`. Spec P>=p [F "goal"] at
/// the opposite corner.
BenchmarkInstance gen_sav(int grid, double epsilon, std::uint64_t seed, double loss_scale = 1.0,
                          double fraction = 0.9);

/// Collision avoidance on an altitude ladder of branch+1 levels over a
/// horizon of 3 steps. The own aircraft climbs, holds or descends; the
/// intruder jumps to one of its `branch` nearest levels with seeded nominal
/// weights ± ε. Equal altitudes collide (trap); surviving the horizon exits
/// the corridor (goal).
BenchmarkInstance gen_aca(int branch, double epsilon, std::uint64_t seed, double fraction = 0.9);

/// Warehouse route choice. From the start, route A takes two segments to the
/// target zone, route B three. Each segment is `segment_steps` unit-reward
/// steps that succeed with probability success ± ε and otherwise retry.
/// Spec R<=b [F "target"] with b = 1.2 · 2 · segment_steps / success.
BenchmarkInstance gen_wh(int segment_steps, double epsilon, double success = 0.95);

struct BenchParams {
    int grid = 3;
    int steps = 2;
    int branch = 2;
    int segment_steps = 5;
    double epsilon = 0.05;
    std::uint64_t seed = 1;
};

/// One instance of `domain` (nav3, obs, sav, aca, wh) from the relevant parameters.
BenchmarkInstance make_instance(const std::string& domain, const BenchParams& params);

/// Small instances of every domain, each solvable by the built-in backend in seconds.
std::vector<BenchmarkInstance> small_suite();

/// One instance per domain at the largest size the built-in backend solves
/// within seconds: trap-sparse OBS with long moves, SAV, ACA and a long WH route.
std::vector<BenchmarkInstance> reference_suite();

struct SuiteRow {
    std::string domain;
    std::string params;
    std::size_t states = 0;
    std::size_t transitions = 0;
    EncodingKind encoding = EncodingKind::Vertex;
    std::size_t binaries = 0;
    std::size_t continuous = 0;
    std::size_t constraints = 0;
    double solve_seconds = 0.0;
    std::string status;   ///< synthesized, infeasible or error
    std::string error;
    std::size_t beta = 0;
    std::optional<double> norm_perm;
    std::optional<double> choice_perm;
    std::optional<SynthesisReport> report;
};

std::vector<SuiteRow> run_suite(const std::vector<BenchmarkInstance>& instances,
                                const std::vector<EncodingKind>& encodings, const SynthesisConfig& config = {});

std::string suite_csv(const std::vector<SuiteRow>& rows);
std::string suite_table(const std::vector<SuiteRow>& rows);

/// Σ over enabled pairs of the successor count.
std::size_t transition_count(const ImdpModel& model);

} // namespace imdp
