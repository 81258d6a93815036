#include "imdp/bench.hpp"
#include "imdp/errors.hpp"
#include "imdp/model.hpp"
#include "imdp/model_io.hpp"

#include <doctest.h>

using namespace imdp;

namespace {

const char* kTiny = "imdp 3\nactions a b\nlabel \"goal\" 2\n"
                    "trans 0 a 1 [0.2, 0.6]\ntrans 0 a 2 [0.4, 0.8]\n"
                    "trans 0 b 2 1\n"
                    "trans 1 a 0 1\n";

} // namespace

TEST_CASE("structure of a parsed model") {
    const ImdpModel m = parse_model(kTiny);
    CHECK(m.num_states() == 3);
    CHECK(m.enabled(0) == std::vector<ActionId>{0, 1});
    CHECK(m.enabled(2) == std::vector<ActionId>{kSelfLoop});
    CHECK(m.absorbing(2));
    CHECK_FALSE(m.absorbing(1));
    CHECK(m.enabled_pairs() == 4);
    CHECK(m.action_name(kSelfLoop) == "@loop");
    CHECK(validate_model(m).empty());
}

TEST_CASE("validation locates broken rows") {
    ImdpModel m = parse_model(kTiny);
    m.choices[0][0].row[0].lower = 0.7; // lower > upper
    const auto d = validate_model(m);
    REQUIRE_FALSE(d.empty());
    CHECK(d[0].state == 0u);
    CHECK_THROWS_AS(require_valid(m), Error);

    ImdpModel sums = parse_model(kTiny);
    sums.choices[0][0].row[0].upper = 0.3;
    sums.choices[0][0].row[1].upper = 0.5; // Σ upper < 1
    CHECK_FALSE(validate_model(sums).empty());

    ImdpModel dangling = parse_model(kTiny);
    dangling.choices[1][0].row[0].state = 9;
    CHECK_FALSE(validate_model(dangling).empty());
}

TEST_CASE("strategy and spec validation") {
    const ImdpModel m = parse_model(kTiny);
    MultiStrategy theta = MultiStrategy::full(m);
    CHECK(validate_strategy(m, theta).empty());
    theta.admitted[1] = {1}; // b is not enabled in state 1
    CHECK_FALSE(validate_strategy(m, theta).empty());
    theta.admitted[1] = {};
    CHECK_FALSE(validate_strategy(m, theta).empty());

    Spec spec = parse_spec("P>=0.5 [F \"goal\"]", m);
    CHECK(validate_spec(m, spec).empty());
    spec.threshold = 1.5;
    CHECK_FALSE(validate_spec(m, spec).empty());
    spec = parse_spec("R<=3 [F \"goal\"]", m);
    spec.threshold = -1;
    CHECK_FALSE(validate_spec(m, spec).empty());
}

TEST_CASE("absorbing targets and restriction") {
    const ImdpModel m = parse_model(kTiny);
    const ImdpModel t = with_absorbing_targets(m, {0});
    CHECK(t.absorbing(0));
    CHECK(with_absorbing_targets(t, {0}) == t);
    const MultiStrategy r = restrict_to(t, MultiStrategy::full(m));
    CHECK(r.admitted[0] == std::vector<ActionId>{kSelfLoop});
    CHECK(r.admitted[1] == std::vector<ActionId>{0});
}

TEST_CASE("permissiveness measures") {
    const auto inst = gen_nav3(0.1);
    const ImdpModel& m = inst.model;
    MultiStrategy theta = MultiStrategy::full(m);
    CHECK(permissiveness(m, theta) == 5);
    CHECK(normalized_permissiveness(m, theta) == 1.0);
    theta.admitted[0] = {0};
    CHECK(permissiveness(m, theta) == 4);
    CHECK(normalized_permissiveness(m, theta) == doctest::Approx(0.8));
    CHECK(choice_state_permissiveness(m, theta, inst.spec) == doctest::Approx(0.5));
    const ImdpModel chain = parse_model("imdp 2\nactions a\nlabel \"goal\" 1\ntrans 0 a 1 1\n");
    CHECK_FALSE(choice_state_permissiveness(chain, MultiStrategy::full(chain),
                                            parse_spec("P>=1 [F \"goal\"]", chain))
                    .has_value());
}

TEST_CASE("compliant strategies enumerate the product in lexicographic order") {
    const auto inst = gen_nav3(0.1);
    const auto all = compliant_strategies(inst.model, MultiStrategy::full(inst.model));
    CHECK(all.size() == 2);
    std::vector<DeterministicStrategy> seen(all.begin(), all.end());
    REQUIRE(seen.size() == 2);
    CHECK(seen[0].choice[0] == 0);
    CHECK(seen[1].choice[0] == 1);
    CHECK(as_multi_strategy(seen[1]).admitted[0] == std::vector<ActionId>{1});
    const auto obs = gen_obs(3, 1, 0.05, 7);
    CHECK_THROWS_AS(compliant_strategies(obs.model, MultiStrategy::full(obs.model), 10), CapExceeded);
}

TEST_CASE("state sets") {
    StateSet s(5, {1, 3});
    CHECK(s.count() == 2);
    CHECK(s.contains(3));
    CHECK_FALSE(s.contains(7));
    s.erase(3);
    s.insert(4);
    CHECK(s.members() == std::vector<StateId>{1, 4});
}
