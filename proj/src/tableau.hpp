#pragma once

#include "imdp/solve.hpp"

#include <cstddef>
#include <vector>

namespace imdp::detail {

enum class LpOutcome { Optimal, Infeasible, Unbounded, Stalled };

/// Dense tableau of the bounded-variable simplex method over
///   Σ_j a_ij x_j + s_i (+ σ_i art_i) = b_i,   lo ≤ (x, s, art) ≤ up.
/// A solved tableau can be copied, given tighter bounds on a structural
/// variable and re-optimized by the dual simplex method.
class Tableau {
public:
    Tableau(const MilpProblem& problem, const std::vector<double>& lower, const std::vector<double>& upper,
            const SolverConfig& config);

    /// Two-phase primal simplex from the slack/artificial basis.
    LpOutcome solve();

    /// Fixes structural variable j to `value` and restores optimality by dual
    /// simplex pivots. Stalled means the caller should solve from scratch.
    LpOutcome fix_and_reoptimize(std::size_t j, double value);

    std::vector<double> structural_values() const { return {val_.begin(), val_.begin() + n_}; }
    std::size_t pivots() const { return pivots_; }
    std::size_t bytes() const { return t_.size() * sizeof(double); }
    double max_primal_violation() const;

private:
    static constexpr std::size_t kNotBasic = static_cast<std::size_t>(-1);

    double& at(std::size_t i, std::size_t j) { return t_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * cols_ + j]; }

    void compute_reduced_costs();
    void refresh_basic_values();
    void pivot(std::size_t r, std::size_t j);
    bool optimize();
    LpOutcome dual_simplex();

    const MilpProblem* problem_;
    const SolverConfig* config_;
    std::size_t n_;
    std::size_t m_;
    std::size_t cols_ = 0;
    std::size_t artificial_begin_ = 0;
    std::vector<double> b_;
    std::vector<double> lo_, up_, val_, d_, cost_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_, where_, init_col_;
    std::vector<double> init_coef_;
    std::size_t bland_limit_ = 0;
    std::size_t pivots_ = 0;
};

} // namespace imdp::detail
