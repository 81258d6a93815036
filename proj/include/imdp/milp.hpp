#pragma once

#include "imdp/model.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace imdp {

enum class VarKind { Continuous, Binary };
enum class Sense { Le, Ge, Eq };

/// What a variable stands for in an encoding; `Other` for hand-built problems.
enum class VarRole { Other, Value, Admit, DualUpper, DualLower, Lambda, Eta, InSet, Rank, Witness, Mode, Reach };

enum class ConstraintRole {
    Other,
    Admit,
    Threshold,
    Pin,
    VertexRobust,
    DualFeasibility,
    DualRobust,
    EtaBound,
    EtaLink,
    Qualitative,
};

std::string to_string(ConstraintRole role);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = kInf;
    VarRole role = VarRole::Other;
    std::optional<StateId> state;
    std::optional<ActionId> action;
};

struct Term {
    double coef = 0.0;
    std::size_t var = 0;

    bool operator==(const Term&) const = default;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::Le;
    double rhs = 0.0;
    ConstraintRole role = ConstraintRole::Other;
    std::optional<StateId> state;   // owning (state, action) pair, when there is one
    std::optional<ActionId> action;
};

/// Maximization MILP. Terms on the same variable are merged on insertion.
class MilpProblem {
public:
    std::size_t add_variable(Variable v);
    std::size_t add_continuous(std::string name, double lower, double upper, VarRole role = VarRole::Other);
    std::size_t add_binary(std::string name, VarRole role = VarRole::Other);
    void add_constraint(Constraint c);
    void set_objective(std::vector<Term> terms);

    const std::vector<Variable>& variables() const { return variables_; }
    std::vector<Variable>& variables() { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<Term>& objective() const { return objective_; }
    std::optional<std::size_t> find(std::string_view name) const;

    std::size_t num_binaries() const;

private:
    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::vector<Term> objective_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Sorts terms by variable, sums duplicates and drops zero coefficients.
std::vector<Term> merge_terms(std::vector<Term> terms);

/// Replaces every character outside [A-Za-z0-9_] by '_'.
std::string sanitize_name(std::string_view name);

using Assignment = std::vector<double>;

double evaluate(const std::vector<Term>& terms, const Assignment& x);
double objective_value(const MilpProblem& problem, const Assignment& x);

struct FeasibilityReport {
    bool feasible = true;
    double max_violation = 0.0;
    std::string worst; // name of the most violated constraint or bound
};

/// Independent pass over bounds, integrality and every constraint.
FeasibilityReport check_feasibility(const MilpProblem& problem, const Assignment& x, double tolerance = 1e-6);

/// LP-file text: Maximize / Subject To / Bounds / Binaries / End, 17-digit numerals.
std::string emit_lp(const MilpProblem& problem);

/// Reads the LP-file subset emit_lp produces, plus `Minimize` (negated into a
/// maximization), `st`/`s.t.`, `free` and one-sided bounds.
MilpProblem read_lp(std::string_view text);

} // namespace imdp
