#pragma once

#include "imdp/milp.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace imdp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, CapExceeded };

std::string to_string(SolveStatus status);

enum class Backend { Builtin, External };

/// Environment variable that overrides SolverConfig::command_template.
inline constexpr const char* kSolverCommandEnv = "IMDP_SOLVER_COMMAND";

struct SolverConfig {
    Backend backend = Backend::Builtin;
    /// Shell command with `{lp_file}` and `{sol_file}` placeholders. The
    /// command must exit 0 after writing `<variable> <value>` lines (lines
    /// starting with '#' are comments; Gurobi `.sol` files qualify). A comment
    /// line containing the word "infeasible", or exit status 10, reports an
    /// infeasible problem.
    std::string command_template;
    double integrality_tolerance = 1e-6;
    double feasibility_tolerance = 1e-6;
    double pivot_tolerance = 1e-9;
    std::size_t node_cap = 1'000'000;
    double time_cap_seconds = 3600.0;
    bool disable_pruning = false;   ///< explore the whole tree (certificate runs)
    /// Branch on fractional binaries of the objective before any other binary.
    bool objective_first_branching = true;
    bool parallel_kernel = true;    ///< OpenMP pivot updates; false selects the serial reference
    /// Memory for solved node tableaus that warm-start the children by dual
    /// simplex; 0 re-solves every node from scratch.
    std::size_t warm_start_memory_mb = 1024;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    Assignment assignment;
    std::size_t nodes = 0;
    std::size_t pivots = 0;
    double seconds = 0.0;
    std::vector<std::string> warnings;
};

/// Optimum of the MILP. The built-in backend runs best-bound branch and bound
/// (FIFO among equal bounds, most-fractional branching with the lowest index
/// on ties, objective binaries first unless disabled, up-branch first) over the simplex relaxation. Optimal assignments
/// are re-checked against every constraint; a failed check throws SolverError.
SolveResult solve(const MilpProblem& problem, const SolverConfig& config = {});

/// Continuous relaxation by the bounded-variable primal simplex method
/// (Dantzig pricing, Bland's rule after 10·(m+n) consecutive degenerate pivots).
SolveResult lp_relax(const MilpProblem& problem, const SolverConfig& config = {});

/// Same relaxation with the variable bounds replaced by `lower`/`upper`.
SolveResult lp_relax(const MilpProblem& problem, const std::vector<double>& lower, const std::vector<double>& upper,
                     const SolverConfig& config = {});

/// Parses `<variable> <value>` lines; '#' lines are comments, unknown
/// variables are ignored, missing ones default to 0 with a warning.
Assignment parse_solution(std::string_view text, const MilpProblem& problem,
                          std::vector<std::string>* warnings = nullptr);

/// `# Objective value = <v>` followed by one `<variable> <value>` line per variable.
std::string write_solution(const MilpProblem& problem, const Assignment& x);

/// The configured command template after the environment override.
std::string effective_command_template(const SolverConfig& config);

} // namespace imdp
