#include "imdp/solve.hpp"

#include "imdp/errors.hpp"
#include "imdp/model_io.hpp"
#include "tableau.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <queue>
#include <sstream>

namespace imdp {

std::string to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::CapExceeded: return "cap-exceeded";
    }
    return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Node {
    double bound = 0.0;
    std::size_t id = 0;
    std::vector<std::pair<std::size_t, double>> fixes;
    Assignment relaxation;
    std::shared_ptr<detail::Tableau> lp; ///< solved relaxation kept for warm starts
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound; // larger bound first
        return a.id > b.id;                                // then FIFO
    }
};

bool integral_objective(const MilpProblem& problem) {
    for (const Term& t : problem.objective())
        if (problem.variables()[t.var].kind != VarKind::Binary || t.coef != std::round(t.coef)) return false;
    return true;
}

class BranchAndBound {
public:
    BranchAndBound(const MilpProblem& problem, const SolverConfig& config)
        : problem_(problem), config_(config), integral_(integral_objective(problem)) {
        for (const Variable& v : problem.variables()) {
            base_lower_.push_back(v.lower);
            base_upper_.push_back(v.upper);
        }
        in_objective_.assign(problem.variables().size(), false);
        for (const Term& t : problem.objective()) in_objective_[t.var] = t.coef != 0.0;
    }

    SolveResult run() {
        start_ = Clock::now();
        SolveResult result;
        std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
        if (auto root = evaluate({})) open.push(std::move(*root));

        bool capped = false;
        while (!open.empty()) {
            Node node = open.top();
            open.pop();
            if (node.lp) cached_bytes_ -= node.lp->bytes();
            if (prunable(node.bound)) continue;
            if (nodes_ >= config_.node_cap || seconds_since(start_) > config_.time_cap_seconds) {
                capped = true;
                break;
            }
            const std::optional<std::size_t> branch = branching_variable(node.relaxation);
            if (!branch) {
                polish(node);
                continue;
            }
            for (const double value : {1.0, 0.0}) {
                auto fixes = node.fixes;
                fixes.emplace_back(*branch, value);
                // The second child may consume the parent's tableau.
                std::shared_ptr<detail::Tableau> parent = value == 0.0 ? std::move(node.lp) : node.lp;
                if (auto child = evaluate(std::move(fixes), std::move(parent))) {
                    if (!prunable(child->bound)) {
                        open.push(std::move(*child));
                    } else if (child->lp) {
                        cached_bytes_ -= child->lp->bytes();
                    }
                }
            }
        }

        result.nodes = nodes_;
        result.pivots = pivots_;
        result.warnings = std::move(warnings_);
        if (incumbent_) {
            result.status = capped ? SolveStatus::CapExceeded : SolveStatus::Optimal;
            result.assignment = *incumbent_;
            result.objective = incumbent_value_;
            const FeasibilityReport check = check_feasibility(problem_, result.assignment, config_.feasibility_tolerance);
            if (!check.feasible)
                throw SolverError("solution violates " + check.worst + " by " + std::to_string(check.max_violation));
        } else {
            result.status = capped ? SolveStatus::CapExceeded : SolveStatus::Infeasible;
        }
        result.seconds = seconds_since(start_);
        return result;
    }

private:
    /// Solves the relaxation of a node, warm-started from the parent's
    /// tableau when one is available (only the last fix is new).
    std::optional<Node> evaluate(std::vector<std::pair<std::size_t, double>> fixes,
                                 std::shared_ptr<detail::Tableau> parent = nullptr) {
        ++nodes_;
        std::shared_ptr<detail::Tableau> lp;
        detail::LpOutcome outcome = detail::LpOutcome::Stalled;
        if (parent && !fixes.empty()) {
            lp = parent.use_count() == 1 ? std::move(parent) : std::make_shared<detail::Tableau>(*parent);
            const std::size_t before = lp->pivots();
            outcome = lp->fix_and_reoptimize(fixes.back().first, fixes.back().second);
            pivots_ += lp->pivots() - before;
        }
        if (outcome == detail::LpOutcome::Stalled) {
            std::vector<double> lower = base_lower_;
            std::vector<double> upper = base_upper_;
            for (const auto& [var, value] : fixes) lower[var] = upper[var] = value;
            for (std::size_t j = 0; j < lower.size(); ++j)
                if (lower[j] > upper[j]) return std::nullopt;
            lp = std::make_shared<detail::Tableau>(problem_, lower, upper, config_);
            outcome = lp->solve();
            pivots_ += lp->pivots();
        }
        if (outcome == detail::LpOutcome::Unbounded) throw SolverError("unbounded relaxation despite finite bounds");
        if (outcome != detail::LpOutcome::Optimal) return std::nullopt;
        Node node;
        node.relaxation = lp->structural_values();
        node.bound = objective_value(problem_, node.relaxation);
        node.id = next_id_++;
        node.fixes = std::move(fixes);
        if (cached_bytes_ + lp->bytes() <= config_.warm_start_memory_mb * 1024 * 1024) {
            cached_bytes_ += lp->bytes();
            node.lp = std::move(lp);
        }
        return node;
    }

    bool prunable(double bound) const {
        if (config_.disable_pruning || !incumbent_) return false;
        if (integral_) return std::floor(bound + 1e-6) <= incumbent_value_ + 1e-9;
        return bound <= incumbent_value_ + 1e-9;
    }

    /// Most fractional binary, lowest index on ties; none if integral. With
    /// objective-first branching the binaries of the objective are tried
    /// before all others.
    std::optional<std::size_t> branching_variable(const Assignment& x) const {
        std::optional<std::size_t> best;
        for (int tier = config_.objective_first_branching ? 0 : 1; tier < 2 && !best; ++tier)
            best = most_fractional(x, tier == 0);
        return best;
    }

    std::optional<std::size_t> most_fractional(const Assignment& x, bool objective_only) const {
        std::optional<std::size_t> best;
        double best_distance = -1.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (problem_.variables()[j].kind != VarKind::Binary) continue;
            if (objective_only && !in_objective_[j]) continue;
            const double frac = x[j] - std::floor(x[j]);
            const double distance = std::min(frac, 1.0 - frac);
            if (distance <= config_.integrality_tolerance) continue;
            if (distance > best_distance + 1e-12) {
                best_distance = distance;
                best = j;
            }
        }
        return best;
    }

    /// Fixes the binaries at their rounded values and re-solves the LP so the
    /// incumbent is exactly integral.
    void polish(const Node& node) {
        std::vector<double> lower = base_lower_;
        std::vector<double> upper = base_upper_;
        for (std::size_t j = 0; j < node.relaxation.size(); ++j)
            if (problem_.variables()[j].kind == VarKind::Binary) lower[j] = upper[j] = std::round(node.relaxation[j]);
        SolveResult lp = lp_relax(problem_, lower, upper, config_);
        pivots_ += lp.pivots;
        if (lp.status != SolveStatus::Optimal) {
            warnings_.push_back("rounded relaxation of node " + std::to_string(node.id) + " is infeasible");
            return;
        }
        if (!incumbent_ || lp.objective > incumbent_value_ + 1e-9) {
            incumbent_ = std::move(lp.assignment);
            incumbent_value_ = lp.objective;
        }
    }

    const MilpProblem& problem_;
    const SolverConfig& config_;
    bool integral_;
    std::vector<double> base_lower_, base_upper_;
    std::vector<bool> in_objective_;
    Clock::time_point start_;
    std::size_t nodes_ = 0;
    std::size_t pivots_ = 0;
    std::size_t next_id_ = 0;
    std::size_t cached_bytes_ = 0;
    std::optional<Assignment> incumbent_;
    double incumbent_value_ = 0.0;
    std::vector<std::string> warnings_;
};

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

bool reports_infeasible(const std::string& solution) {
    std::istringstream in(solution);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] != '#') continue;
        std::string lower = line;
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (lower.find("infeasible") != std::string::npos) return true;
    }
    return false;
}

SolveResult solve_external(const MilpProblem& problem, const SolverConfig& config) {
    const auto start = Clock::now();
    const std::string command_template = effective_command_template(config);
    if (command_template.empty()) throw SolverError("external backend selected but no command template configured");

    static std::atomic<unsigned> counter{0};
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() /
                         ("imdpsynth-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    const fs::path lp_file = dir / "problem.lp";
    const fs::path sol_file = dir / "problem.sol";
    write_text_file(lp_file.string(), emit_lp(problem));

    std::string command = replace_all(command_template, "{lp_file}", lp_file.string());
    command = replace_all(command, "{sol_file}", sol_file.string());
    const int raw = std::system(command.c_str());
    const int code = raw == -1 ? -1 : (WIFEXITED(raw) ? WEXITSTATUS(raw) : 128 + WTERMSIG(raw));

    SolveResult result;
    result.nodes = 0;
    std::string solution;
    if (fs::exists(sol_file)) solution = read_text_file(sol_file.string());
    fs::remove_all(dir);

    if (code == 10 || reports_infeasible(solution)) {
        result.status = SolveStatus::Infeasible;
        result.seconds = seconds_since(start);
        return result;
    }
    if (code != 0) throw SolverError("external solver exited with status " + std::to_string(code));
    if (solution.empty()) throw SolverError("external solver wrote no solution file");

    result.assignment = parse_solution(solution, problem, &result.warnings);
    for (std::size_t j = 0; j < result.assignment.size(); ++j)
        if (problem.variables()[j].kind == VarKind::Binary &&
            std::abs(result.assignment[j] - std::round(result.assignment[j])) <= config.integrality_tolerance)
            result.assignment[j] = std::round(result.assignment[j]);
    const FeasibilityReport check = check_feasibility(problem, result.assignment, config.feasibility_tolerance);
    if (!check.feasible)
        throw SolverError("external solution violates " + check.worst + " by " + std::to_string(check.max_violation));
    result.status = SolveStatus::Optimal;
    result.objective = objective_value(problem, result.assignment);
    result.seconds = seconds_since(start);
    return result;
}

} // namespace

std::string effective_command_template(const SolverConfig& config) {
    if (const char* env = std::getenv(kSolverCommandEnv); env && *env) return env;
    return config.command_template;
}

SolveResult solve(const MilpProblem& problem, const SolverConfig& config) {
    if (config.integrality_tolerance <= 0.0 || config.feasibility_tolerance <= 0.0 || config.pivot_tolerance <= 0.0)
        throw Error("solver tolerances must be positive");
    if (config.node_cap == 0 || config.time_cap_seconds <= 0.0) throw Error("solver caps must be positive");
    if (config.backend == Backend::External) return solve_external(problem, config);
    return BranchAndBound(problem, config).run();
}

Assignment parse_solution(std::string_view text, const MilpProblem& problem, std::vector<std::string>* warnings) {
    Assignment x(problem.variables().size(), 0.0);
    std::vector<bool> seen(x.size(), false);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] != '#') {
            std::istringstream in(line);
            std::string name, value, extra;
            in >> name >> value;
            if (value.empty()) throw ParseError("expected '<variable> <value>'", line_no, first + 1);
            if (in >> extra) throw ParseError("unexpected trailing text", line_no, line.find(extra, first) + 1);
            char* stop = nullptr;
            const double v = std::strtod(value.c_str(), &stop);
            if (stop == value.c_str() || *stop != '\0')
                throw ParseError("malformed value '" + value + "'", line_no, line.find(value, first + name.size()) + 1);
            if (auto idx = problem.find(name)) {
                x[*idx] = v;
                seen[*idx] = true;
            }
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    if (warnings)
        for (std::size_t j = 0; j < x.size(); ++j)
            if (!seen[j]) warnings->push_back("variable " + problem.variables()[j].name + " missing; using 0");
    return x;
}

std::string write_solution(const MilpProblem& problem, const Assignment& x) {
    std::ostringstream out;
    out << "# Objective value = " << format_double(objective_value(problem, x)) << '\n';
    for (std::size_t j = 0; j < x.size(); ++j) out << problem.variables()[j].name << ' ' << format_double(x[j]) << '\n';
    return out.str();
}

} // namespace imdp
