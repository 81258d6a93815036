#include "imdp/errors.hpp"
#include "imdp/solve.hpp"
#include "tableau.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace imdp {

namespace {

constexpr double kCostTolerance = 1e-9;
constexpr double kDegenerateStep = 1e-12;
constexpr std::size_t kRefreshInterval = 64;
constexpr double kPrimalTolerance = 1e-9;


} // namespace

namespace detail {

Tableau::Tableau(const MilpProblem& problem, const std::vector<double>& lower, const std::vector<double>& upper,
                 const SolverConfig& config)
    : problem_(&problem), config_(&config), n_(problem.variables().size()), m_(problem.constraints().size()) {
    const auto& rows = problem.constraints();
    b_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) b_[i] = rows[i].rhs;

    lo_ = lower;
    up_ = upper;
    for (std::size_t j = 0; j < n_; ++j) {
        if (lo_[j] > up_[j]) throw SolverError("empty variable bounds for " + problem.variables()[j].name);
        val_.push_back(std::isfinite(lo_[j]) ? lo_[j] : (std::isfinite(up_[j]) ? up_[j] : 0.0));
    }
    for (std::size_t i = 0; i < m_; ++i) {
        switch (rows[i].sense) {
        case Sense::Le: lo_.push_back(0.0); up_.push_back(kInf); break;
        case Sense::Ge: lo_.push_back(-kInf); up_.push_back(0.0); break;
        case Sense::Eq: lo_.push_back(0.0); up_.push_back(0.0); break;
        }
        val_.push_back(0.0);
    }

    // Residuals decide which rows start with an artificial variable.
    std::vector<double> residual(b_);
    for (std::size_t i = 0; i < m_; ++i)
        for (const Term& t : rows[i].terms) residual[i] -= t.coef * val_[t.var];
    init_col_.resize(m_);
    init_coef_.resize(m_);
    std::vector<std::size_t> art_row;
    for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t slack = n_ + i;
        const double r = residual[i];
        if (r >= lo_[slack] && r <= up_[slack]) {
            init_col_[i] = slack;
            init_coef_[i] = 1.0;
            val_[slack] = r;
        } else {
            const double bound = r < lo_[slack] ? lo_[slack] : up_[slack];
            val_[slack] = bound;
            init_coef_[i] = r - bound > 0.0 ? 1.0 : -1.0;
            init_col_[i] = n_ + m_ + art_row.size();
            art_row.push_back(i);
            lo_.push_back(0.0);
            up_.push_back(kInf);
            val_.push_back(std::abs(r - bound));
        }
    }
    cols_ = n_ + m_ + art_row.size();
    artificial_begin_ = n_ + m_;

    t_.assign(m_ * cols_, 0.0);
    basis_.resize(m_);
    where_.assign(cols_, kNotBasic);
    for (std::size_t i = 0; i < m_; ++i) {
        const double inv = 1.0 / init_coef_[i];
        for (const Term& t : rows[i].terms) at(i, t.var) = t.coef * inv;
        at(i, n_ + i) = inv;
        at(i, init_col_[i]) = 1.0;
        basis_[i] = init_col_[i];
        where_[init_col_[i]] = i;
    }
    bland_limit_ = 10 * (m_ + n_);
}

LpOutcome Tableau::solve() {
    if (artificial_begin_ < cols_) {
        cost_.assign(cols_, 0.0);
        for (std::size_t j = artificial_begin_; j < cols_; ++j) cost_[j] = -1.0;
        optimize();
        double infeasibility = 0.0;
        for (std::size_t j = artificial_begin_; j < cols_; ++j) infeasibility += val_[j];
        double scale = 1.0;
        for (double v : b_) scale = std::max(scale, std::abs(v));
        if (infeasibility > 1e-7 * scale) return LpOutcome::Infeasible;
        for (std::size_t j = artificial_begin_; j < cols_; ++j) {
            up_[j] = 0.0;
            if (where_[j] == kNotBasic) val_[j] = 0.0;
        }
    }
    cost_.assign(cols_, 0.0);
    for (const Term& t : problem_->objective()) cost_[t.var] = t.coef;
    return optimize() ? LpOutcome::Optimal : LpOutcome::Unbounded;
}

double Tableau::max_primal_violation() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) worst = std::max({worst, lo_[j] - val_[j], val_[j] - up_[j]});
    return worst;
}

void Tableau::compute_reduced_costs() {
    d_ = cost_;
    for (std::size_t i = 0; i < m_; ++i) {
        const double cb = cost_[basis_[i]];
        if (cb == 0.0) continue;
        const double* row = &t_[i * cols_];
        for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * row[j];
    }
    for (std::size_t i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
}

/// Recomputes basic values from the nonbasic ones through B⁻¹, read off the
/// columns of the starting basis.
void Tableau::refresh_basic_values() {
    const auto& rows = problem_->constraints();
    std::vector<double> r(b_);
    for (std::size_t i = 0; i < m_; ++i) {
        for (const Term& t : rows[i].terms)
            if (where_[t.var] == kNotBasic) r[i] -= t.coef * val_[t.var];
        if (where_[n_ + i] == kNotBasic) r[i] -= val_[n_ + i];
        if (init_col_[i] >= artificial_begin_ && where_[init_col_[i]] == kNotBasic)
            r[i] -= init_coef_[i] * val_[init_col_[i]];
    }
    for (std::size_t k = 0; k < m_; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m_; ++i) acc += at(k, init_col_[i]) / init_coef_[i] * r[i];
        val_[basis_[k]] = acc;
    }
}

void Tableau::pivot(std::size_t r, std::size_t j) {
    double* prow = &t_[r * cols_];
    const double inv = 1.0 / prow[j];
    for (std::size_t c = 0; c < cols_; ++c) prow[c] *= inv;
    prow[j] = 1.0;
    const auto m = static_cast<std::ptrdiff_t>(m_);
    const std::size_t cols = cols_;
    double* t = t_.data();
    if (config_->parallel_kernel) {
#ifdef IMDP_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (m_ * cols_ > 200000)
#endif
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            if (static_cast<std::size_t>(i) == r) continue;
            double* row = t + static_cast<std::size_t>(i) * cols;
            const double f = row[j];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols; ++c) row[c] -= f * prow[c];
            row[j] = 0.0;
        }
    } else {
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            if (static_cast<std::size_t>(i) == r) continue;
            double* row = t + static_cast<std::size_t>(i) * cols;
            const double f = row[j];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < cols; ++c) row[c] -= f * prow[c];
            row[j] = 0.0;
        }
    }
    const double dj = d_[j];
    if (dj != 0.0)
        for (std::size_t c = 0; c < cols_; ++c) d_[c] -= dj * prow[c];
    d_[j] = 0.0;
    where_[basis_[r]] = kNotBasic;
    basis_[r] = j;
    where_[j] = r;
    ++pivots_;
}

bool Tableau::optimize() {
    compute_reduced_costs();
    std::size_t degenerate_run = 0;
    bool bland = false;
    std::size_t since_refresh = 0;
    const std::size_t iteration_cap = 50 * (m_ + cols_) + 10'000;
    for (std::size_t iter = 0;; ++iter) {
        if (iter > iteration_cap) throw SolverError("simplex iteration limit reached (numerical instability)");
        // Pricing.
        std::size_t enter = kNotBasic;
        double best = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (where_[j] != kNotBasic || lo_[j] == up_[j]) continue;
            const double dj = d_[j];
            const bool up_ok = dj > kCostTolerance && val_[j] < up_[j];
            const bool down_ok = dj < -kCostTolerance && val_[j] > lo_[j];
            if (!up_ok && !down_ok) continue;
            if (bland) {
                enter = j;
                break;
            }
            if (std::abs(dj) > best) {
                best = std::abs(dj);
                enter = j;
            }
        }
        if (enter == kNotBasic) {
            refresh_basic_values();
            return true;
        }
        const double dir = d_[enter] > 0.0 ? 1.0 : -1.0;

        // Ratio test.
        double step = up_[enter] - lo_[enter];
        std::size_t leave_row = kNotBasic;
        double leave_pivot = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double a = at(i, enter);
            if (std::abs(a) <= config_->pivot_tolerance) continue;
            const std::size_t bv = basis_[i];
            const double rate = -dir * a;
            double limit;
            if (rate < 0.0) {
                if (!std::isfinite(lo_[bv])) continue;
                limit = (val_[bv] - lo_[bv]) / -rate;
            } else {
                if (!std::isfinite(up_[bv])) continue;
                limit = (up_[bv] - val_[bv]) / rate;
            }
            limit = std::max(limit, 0.0);
            bool take;
            if (leave_row == kNotBasic)
                take = limit < step;
            else if (limit < step - 1e-12)
                take = true;
            else if (limit <= step + 1e-12)
                take = bland ? bv < basis_[leave_row] : std::abs(a) > std::abs(leave_pivot);
            else
                take = false;
            if (take) {
                step = limit;
                leave_row = i;
                leave_pivot = a;
            }
        }
        if (!std::isfinite(step)) return false;

        // Move.
        val_[enter] += dir * step;
        if (step != 0.0)
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (a != 0.0) val_[basis_[i]] -= dir * step * a;
            }
        if (leave_row == kNotBasic) {
            // Bound flip of the entering variable.
            val_[enter] = dir > 0.0 ? up_[enter] : lo_[enter];
        } else {
            const std::size_t out = basis_[leave_row];
            const double rate = -dir * leave_pivot;
            val_[out] = rate < 0.0 ? lo_[out] : up_[out];
            pivot(leave_row, enter);
        }
        if (step <= kDegenerateStep) {
            if (++degenerate_run >= bland_limit_) bland = true;
        } else {
            degenerate_run = 0;
        }
        if (++since_refresh >= kRefreshInterval) {
            refresh_basic_values();
            compute_reduced_costs();
            since_refresh = 0;
        }
    }
}

LpOutcome Tableau::fix_and_reoptimize(std::size_t j, double value) {
    lo_[j] = up_[j] = value;
    if (where_[j] == kNotBasic) {
        const double delta = value - val_[j];
        val_[j] = value;
        if (delta != 0.0)
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, j);
                if (a != 0.0) val_[basis_[i]] -= a * delta;
            }
    }
    const LpOutcome outcome = dual_simplex();
    if (outcome != LpOutcome::Optimal) return outcome;
    refresh_basic_values();
    if (max_primal_violation() > kPrimalTolerance) return LpOutcome::Stalled;
    return optimize() ? LpOutcome::Optimal : LpOutcome::Unbounded;
}

/// Bounded dual simplex: the basis stays dual feasible while basic variables
/// outside their bounds are driven onto them, largest violation first.
LpOutcome Tableau::dual_simplex() {
    const std::size_t cap = 10 * (m_ + cols_) + 1000;
    for (std::size_t iter = 0; iter < cap; ++iter) {
        std::size_t row = kNotBasic;
        double worst = kPrimalTolerance;
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t bv = basis_[i];
            const double violation = std::max(lo_[bv] - val_[bv], val_[bv] - up_[bv]);
            if (violation > worst) {
                worst = violation;
                row = i;
            }
        }
        if (row == kNotBasic) return LpOutcome::Optimal;

        const std::size_t leaving = basis_[row];
        const bool raise = val_[leaving] < lo_[leaving];
        const double bound = raise ? lo_[leaving] : up_[leaving];
        // x_leaving moves by −α_rj·Δ_j; pick the entering column keeping the
        // reduced costs dual feasible (smallest |d_j / α_rj|).
        std::size_t enter = kNotBasic;
        double best_ratio = kInf;
        double best_alpha = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (where_[j] != kNotBasic || lo_[j] == up_[j]) continue;
            const double a = at(row, j);
            if (std::abs(a) <= config_->pivot_tolerance) continue;
            const bool can_increase = val_[j] < up_[j];
            const bool can_decrease = val_[j] > lo_[j];
            const bool usable = raise ? ((a < 0.0 && can_increase) || (a > 0.0 && can_decrease))
                                      : ((a > 0.0 && can_increase) || (a < 0.0 && can_decrease));
            if (!usable) continue;
            const double ratio = std::abs(d_[j]) / std::abs(a);
            if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(a) > std::abs(best_alpha))) {
                best_ratio = ratio;
                enter = j;
                best_alpha = a;
            }
        }
        if (enter == kNotBasic) return LpOutcome::Infeasible;

        const double delta = (val_[leaving] - bound) / best_alpha;
        val_[enter] += delta;
        for (std::size_t i = 0; i < m_; ++i) {
            const double a = at(i, enter);
            if (a != 0.0 && i != row) val_[basis_[i]] -= a * delta;
        }
        val_[leaving] = bound;
        pivot(row, enter);
    }
    return LpOutcome::Stalled;
}

} // namespace detail

SolveResult lp_relax(const MilpProblem& problem, const std::vector<double>& lower, const std::vector<double>& upper,
                     const SolverConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    result.nodes = 1;
    if (lower.size() != problem.variables().size() || upper.size() != problem.variables().size())
        throw Error("bound vectors do not match the problem");
    for (std::size_t j = 0; j < lower.size(); ++j)
        if (lower[j] > upper[j]) {
            result.status = SolveStatus::Infeasible;
            return result;
        }
    detail::Tableau tableau(problem, lower, upper, config);
    const detail::LpOutcome outcome = tableau.solve();
    if (outcome == detail::LpOutcome::Infeasible) {
        result.status = SolveStatus::Infeasible;
    } else if (outcome == detail::LpOutcome::Unbounded) {
        result.status = SolveStatus::Unbounded;
    } else {
        result.status = SolveStatus::Optimal;
        result.assignment = tableau.structural_values();
        result.objective = objective_value(problem, result.assignment);
        if (tableau.max_primal_violation() > 1e-6)
            result.warnings.push_back("basic solution violates a bound by " +
                                      std::to_string(tableau.max_primal_violation()));
    }
    result.pivots = tableau.pivots();
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

SolveResult lp_relax(const MilpProblem& problem, const SolverConfig& config) {
    std::vector<double> lower, upper;
    for (const Variable& v : problem.variables()) {
        lower.push_back(v.lower);
        upper.push_back(v.upper);
    }
    return lp_relax(problem, lower, upper, config);
}

} // namespace imdp
