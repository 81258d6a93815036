#include "imdp/uncertainty.hpp"

#include "imdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace imdp {

bool is_feasible(std::span<const Successor> row) {
    double lo = 0.0;
    double hi = 0.0;
    for (const Successor& t : row) {
        lo += t.lower;
        hi += t.upper;
    }
    return lo <= 1.0 + kSumTolerance && hi >= 1.0 - kSumTolerance;
}

std::size_t vertex_candidate_count(std::size_t k) {
    if (k == 0) return 0;
    if (k - 1 >= 58) return std::numeric_limits<std::size_t>::max();
    const std::size_t patterns = std::size_t{1} << (k - 1);
    if (patterns > std::numeric_limits<std::size_t>::max() / k) return std::numeric_limits<std::size_t>::max();
    return k * patterns;
}

namespace {

void require_feasible(std::span<const Successor> row) {
    if (row.empty()) throw InfeasibleRow("empty interval row");
    if (!is_feasible(row)) throw InfeasibleRow("interval row has an empty polytope");
}

} // namespace

std::vector<VertexDistribution> enumerate_vertices(std::span<const Successor> row, std::size_t candidate_cap) {
    require_feasible(row);
    const std::size_t k = row.size();
    if (vertex_candidate_count(k) > candidate_cap)
        throw CapExceeded("vertex enumeration of a " + std::to_string(k) + "-successor row exceeds the candidate cap");

    // Near-point intervals contribute a single bound; this keeps the generated
    // coordinates exact bound values so that duplicates compare bitwise equal.
    std::vector<bool> point(k);
    for (std::size_t i = 0; i < k; ++i) point[i] = row[i].upper - row[i].lower <= kVertexTolerance;

    std::vector<VertexDistribution> out;
    std::set<std::vector<double>> seen;
    std::vector<double> p(k);
    const std::size_t patterns = std::size_t{1} << (k - 1);
    for (std::size_t residual = 0; residual < k; ++residual) {
        for (std::size_t mask = 0; mask < patterns; ++mask) {
            // Bit j of `mask` picks the upper bound of the j-th non-residual successor.
            double sum = 0.0;
            std::size_t bit = 0;
            bool redundant = false;
            for (std::size_t i = 0; i < k; ++i) {
                if (i == residual) continue;
                const bool up = (mask >> bit & 1U) != 0;
                ++bit;
                if (up && point[i]) {
                    redundant = true;
                    break;
                }
                p[i] = up ? row[i].upper : row[i].lower;
                sum += p[i];
            }
            if (redundant) continue;
            double rest = 1.0 - sum;
            const Successor& r = row[residual];
            if (rest < r.lower - kVertexTolerance || rest > r.upper + kVertexTolerance) continue;
            if (std::abs(rest - r.lower) <= kVertexTolerance)
                rest = r.lower;
            else if (std::abs(rest - r.upper) <= kVertexTolerance)
                rest = r.upper;
            p[residual] = rest;
            if (seen.insert(p).second) out.push_back({p});
        }
    }
    return out;
}

namespace {

/// Fills `order` with row positions sorted by value for the greedy pass.
template <class ValueAt>
void greedy_order(std::size_t k, ValueAt value_at, Direction direction, std::vector<std::size_t>& order) {
    order.resize(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (direction == Direction::Min)
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value_at(a) < value_at(b); });
    else
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value_at(a) > value_at(b); });
}

} // namespace

Expectation worst_case_expectation(std::span<const Successor> row, std::span<const double> values,
                                   Direction direction) {
    require_feasible(row);
    if (values.size() != row.size()) throw Error("value vector does not match row length");
    for (double v : values)
        if (!std::isfinite(v)) throw Error("non-finite value in expectation");

    const std::size_t k = row.size();
    Expectation out;
    out.vertex.probability.resize(k);
    double slack = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        out.vertex.probability[i] = row[i].lower;
        slack -= row[i].lower;
    }
    std::vector<std::size_t> order;
    greedy_order(k, [&](std::size_t i) { return values[i]; }, direction, order);
    for (std::size_t i : order) {
        if (slack <= 0.0) break;
        const double add = std::min(slack, row[i].upper - row[i].lower);
        out.vertex.probability[i] += add;
        slack -= add;
    }
    out.value = 0.0;
    for (std::size_t i = 0; i < k; ++i) out.value += out.vertex.probability[i] * values[i];
    return out;
}

double optimal_expectation(std::span<const Successor> row, std::span<const double> state_values,
                           Direction direction, std::vector<std::size_t>& scratch) {
    const std::size_t k = row.size();
    if (k == 1) return state_values[row[0].state];
    double slack = 1.0;
    double value = 0.0;
    for (const Successor& t : row) {
        slack -= t.lower;
        value += t.lower * state_values[t.state];
    }
    greedy_order(k, [&](std::size_t i) { return state_values[row[i].state]; }, direction, scratch);
    for (std::size_t i : scratch) {
        if (slack <= 0.0) break;
        const double add = std::min(slack, row[i].upper - row[i].lower);
        value += add * state_values[row[i].state];
        slack -= add;
    }
    return value;
}

double max_mass_of(std::span<const Successor> row, std::size_t i) {
    double others_lower = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j)
        if (j != i) others_lower += row[j].lower;
    return std::max(0.0, std::min(row[i].upper, 1.0 - others_lower));
}

bool possible_successor(std::span<const Successor> row, std::size_t i) {
    return max_mass_of(row, i) > kQualitativeTolerance;
}

} // namespace imdp
