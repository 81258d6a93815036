#include "oracles.hpp"

#include "imdp/bench.hpp"
#include "imdp/errors.hpp"
#include "imdp/model_io.hpp"
#include "imdp/robust_vi.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace imdp;

namespace {

double guaranteed(const BenchmarkInstance& inst) {
    const MultiStrategy full = MultiStrategy::full(inst.model);
    return robust_value(inst.model, full, inst.spec.target_set(inst.model.num_states()), Objective::Reach,
                        Direction::Max, Direction::Min)[inst.model.initial];
}

bool has_label(const ImdpModel& m, const std::string& label) {
    const auto it = m.labels.find(label);
    return it != m.labels.end() && !it->second.empty();
}

} // namespace

TEST_CASE("generators are deterministic and produce valid instances") {
    std::vector<std::pair<std::string, BenchParams>> grid;
    for (int g : {2, 3, 4})
        for (int steps : {1, 3}) grid.push_back({"obs", {g, steps, 2, 5, 0.05, 1}});
    for (int g : {3, 4}) grid.push_back({"sav", {g, 1, 2, 5, 0.05, 2}});
    for (int b : {2, 3, 4}) grid.push_back({"aca", {3, 1, b, 5, 0.05, 3}});
    for (int seg : {1, 4}) grid.push_back({"wh", {3, 1, 2, seg, 0.05, 1}});
    grid.push_back({"nav3", {3, 1, 2, 5, 0.1, 1}});
    for (const auto& [domain, params] : grid) {
        CAPTURE(domain);
        const BenchmarkInstance a = make_instance(domain, params);
        const BenchmarkInstance b = make_instance(domain, params);
        CAPTURE(a.params);
        CHECK(a.domain == domain);
        CHECK(a.model == b.model);
        CHECK(write_spec(a.spec) == write_spec(b.spec));
        CHECK(validate_model(a.model).empty());
        CHECK(validate_spec(a.model, a.spec).empty());
        CHECK(parse_model(write_model(a.model)) == a.model);
    }
    CHECK_THROWS_AS(make_instance("mars", {}), Error);
    CHECK_THROWS_AS(gen_obs(1, 1, 0.05, 1), Error);
    CHECK_THROWS_AS(gen_sav(2, 0.05, 1), Error);
    CHECK_THROWS_AS(gen_aca(1, 0.05, 1), Error);
    CHECK_THROWS_AS(gen_wh(0, 0.05), Error);
}

TEST_CASE("seeds change the random parts") {
    bool differs = false;
    for (std::uint64_t seed = 2; seed < 10 && !differs; ++seed)
        differs = !(gen_aca(3, 0.05, 1).model == gen_aca(3, 0.05, seed).model);
    CHECK(differs);
}

TEST_CASE("obs: a trap-free grid is solved surely at eps = 0") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed < 40; ++seed) {
        const auto inst = gen_obs(3, 1, 0.0, seed);
        if (has_label(inst.model, "trap")) continue;
        ++checked;
        CHECK(guaranteed(inst) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(checked > 0);
}

TEST_CASE("obs: micro-step chains leave the reachability value unchanged") {
    for (std::uint64_t seed : {1u, 5u, 7u}) {
        const double one = guaranteed(gen_obs(3, 1, 0.05, seed));
        for (int steps : {2, 4}) {
            const auto inst = gen_obs(3, steps, 0.05, seed);
            CHECK(guaranteed(inst) == doctest::Approx(one).epsilon(1e-9));
            // Longer moves only add chain states.
            CHECK(inst.model.num_states() > gen_obs(3, 1, 0.05, seed).model.num_states());
        }
    }
}

TEST_CASE("obs: the generated threshold is the requested fraction of the guaranteed value") {
    const auto inst = gen_obs(3, 1, 0.05, 7);
    CHECK(inst.spec.kind == SpecKind::ProbGe);
    CHECK(inst.spec.threshold == doctest::Approx(0.9 * guaranteed(inst)).epsilon(1e-12));
    CHECK(gen_obs(3, 2, 0.05, 7, 0.9, 0.5).spec.threshold == 0.5);
}

TEST_CASE("obs 2x2 against strategy-by-strategy enumeration") {
    for (double eps : {0.0, 0.05}) {
        const auto inst = gen_obs(2, 1, eps, 3);
        const auto& m = inst.model;
        double best = 0.0;
        for (const auto& sigma : compliant_strategies(m, MultiStrategy::full(m)))
            best = std::max(best, oracle::initial_value_range(m, as_multi_strategy(sigma), inst.spec.target, false).lowest);
        CHECK(guaranteed(inst) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("sav: without message loss the vehicle always arrives") {
    for (int g : {3, 4}) {
        const auto inst = gen_sav(g, 0.0, 1, 0.0);
        CHECK(guaranteed(inst) == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Losses only make things worse.
    CHECK(guaranteed(gen_sav(3, 0.05, 1)) <= guaranteed(gen_sav(3, 0.0, 1)) + 1e-12);
    CHECK(guaranteed(gen_sav(3, 0.0, 1)) < 1.0);
}

TEST_CASE("aca: thresholds and monotonicity in eps") {
    for (int b : {2, 3}) {
        const auto tight = gen_aca(b, 0.0, 1);
        const auto loose = gen_aca(b, 0.1, 1);
        CHECK(guaranteed(loose) <= guaranteed(tight) + 1e-12);
        CHECK(tight.spec.threshold == doctest::Approx(0.9 * guaranteed(tight)).epsilon(1e-12));
        CHECK(has_label(tight.model, "exit"));
    }
}

TEST_CASE("wh: expected cost has the geometric closed form") {
    for (int seg : {1, 3, 6}) {
        for (double success : {1.0, 0.95}) {
            for (double eps : {0.0, 0.05}) {
                const auto inst = gen_wh(seg, eps, success);
                const auto& m = inst.model;
                CHECK(inst.spec.kind == SpecKind::RewLe);
                CHECK(inst.spec.threshold == doctest::Approx(1.2 * 2 * seg / success).epsilon(1e-12));
                const MultiStrategy full = MultiStrategy::full(m);
                const auto v = robust_value(m, full, inst.spec.target_set(m.num_states()), Objective::Reward,
                                            Direction::Min, Direction::Max);
                // Best route A, adversary picks the lowest success probability.
                const double worst_success = std::max(0.0, success - eps);
                CHECK(v[m.initial] == doctest::Approx(2.0 * seg / worst_success).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("transition count") {
    const auto inst = gen_wh(2, 0.05);
    std::size_t n = 0;
    for (StateId s = 0; s < inst.model.num_states(); ++s)
        for (ActionId a : inst.model.enabled(s)) n += inst.model.find_choice(s, a)->row.size();
    CHECK(transition_count(inst.model) == n);
}

TEST_CASE("suite runs report one row per instance and encoding") {
    std::vector<BenchmarkInstance> instances{gen_nav3(0.1), gen_wh(2, 0.05)};
    const auto rows = run_suite(instances, {EncodingKind::Vertex, EncodingKind::Dual});
    REQUIRE(rows.size() == 4);
    for (const SuiteRow& r : rows) {
        CAPTURE(r.domain);
        CHECK(r.status == "synthesized");
        CHECK(r.binaries > 0);
        CHECK(r.norm_perm.has_value());
    }
    CHECK(rows[0].beta == rows[1].beta);
    CHECK(rows[2].beta == rows[3].beta);
    const std::string csv = suite_csv(rows);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "domain,params,states,transitions,encoding,binaries,continuous,constraints,solve_seconds,status,beta,"
          "norm_perm,choice_perm");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 4);
    CHECK(suite_table(rows).find("wh") != std::string::npos);
}

TEST_CASE("suites build") {
    const auto small = small_suite();
    CHECK(small.size() >= 5);
    std::set<std::string> domains;
    for (const auto& inst : small) domains.insert(inst.domain);
    CHECK(domains == std::set<std::string>{"nav3", "obs", "sav", "aca", "wh"});
    for (const auto& inst : reference_suite()) CHECK(validate_model(inst.model).empty());
}
