#include "imdp/bench.hpp"
#include "imdp/encode.hpp"
#include "imdp/errors.hpp"
#include "imdp/milp.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace imdp;

namespace {

// Name-keyed view of a problem, so two problems compare independently of variable order.
struct Canonical {
    std::map<std::string, std::tuple<VarKind, double, double>> vars;
    std::vector<std::tuple<std::string, std::map<std::string, double>, Sense, double>> rows;
    std::map<std::string, double> objective;
};

std::map<std::string, double> by_name(const MilpProblem& p, const std::vector<Term>& terms) {
    std::map<std::string, double> out;
    for (const Term& t : terms) out[p.variables()[t.var].name] += t.coef;
    std::erase_if(out, [](const auto& kv) { return kv.second == 0.0; });
    return out;
}

Canonical canonical(const MilpProblem& p) {
    Canonical c;
    for (const Variable& v : p.variables()) c.vars[v.name] = {v.kind, v.lower, v.upper};
    for (const Constraint& r : p.constraints())
        c.rows.emplace_back(sanitize_name(r.name), by_name(p, r.terms), r.sense, r.rhs);
    c.objective = by_name(p, p.objective());
    return c;
}

bool same(const Canonical& a, const Canonical& b) {
    return a.vars == b.vars && a.rows == b.rows && a.objective == b.objective;
}

MilpProblem random_problem(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> pick(0, 5);
    MilpProblem p;
    const int n = 2 + pick(rng);
    for (int j = 0; j < n; ++j) {
        const std::string name = "x" + std::to_string(j);
        switch (pick(rng)) {
        case 0: p.add_binary(name); break;
        case 1: p.add_continuous(name, -kInf, kInf); break;
        case 2: p.add_continuous(name, u(rng), kInf); break;
        case 3: p.add_continuous(name, -kInf, u(rng)); break;
        case 4: p.add_continuous(name, 1.0 / 3.0, 1.0 / 3.0); break;
        default: {
            const double a = u(rng), b = u(rng);
            p.add_continuous(name, std::min(a, b), std::max(a, b));
        }
        }
    }
    std::vector<Term> obj;
    for (int j = 0; j < n; ++j)
        if (pick(rng) < 4) obj.push_back({u(rng), static_cast<std::size_t>(j)});
    p.set_objective(obj);
    const int m = 1 + pick(rng);
    for (int i = 0; i < m; ++i) {
        Constraint c;
        c.name = "c" + std::to_string(i) + "[a.b]";
        for (int j = 0; j < n; ++j)
            if (pick(rng) < 3) c.terms.push_back({u(rng), static_cast<std::size_t>(j)});
        c.sense = static_cast<Sense>(pick(rng) % 3);
        c.rhs = u(rng);
        p.add_constraint(c);
    }
    return p;
}

} // namespace

TEST_CASE("emit_lp and read_lp round-trip random problems exactly") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const MilpProblem p = random_problem(rng);
        CAPTURE(trial);
        const std::string text = emit_lp(p);
        const MilpProblem q = read_lp(text);
        // Variables that occur nowhere in the text body are only declared through Bounds; all are present.
        CHECK(q.variables().size() == p.variables().size());
        CHECK(same(canonical(p), canonical(q)));
        CHECK(same(canonical(q), canonical(read_lp(emit_lp(q)))));
    }
}

TEST_CASE("encodings survive the LP round trip") {
    for (const auto& inst : small_suite()) {
        for (EncodingKind kind : {EncodingKind::Vertex, EncodingKind::Dual}) {
            const MilpProblem p = build_encoding(kind, inst.model, inst.spec);
            const MilpProblem q = read_lp(emit_lp(p));
            CHECK(same(canonical(p), canonical(q)));
        }
    }
}

TEST_CASE("merge_terms sorts, sums and drops zeros") {
    const auto t = merge_terms({{2.0, 3}, {1.0, 0}, {-2.0, 3}, {0.5, 1}, {0.25, 1}, {0.0, 2}});
    REQUIRE(t.size() == 2);
    CHECK(t[0] == Term{1.0, 0});
    CHECK(t[1] == Term{0.75, 1});
}

TEST_CASE("constraints merge duplicate terms on insertion") {
    MilpProblem p;
    const auto x = p.add_continuous("x", 0, 1);
    p.add_constraint({"c", {{1.0, x}, {2.0, x}}, Sense::Le, 3.0});
    REQUIRE(p.constraints()[0].terms.size() == 1);
    CHECK(p.constraints()[0].terms[0].coef == 3.0);
    CHECK_THROWS_AS(p.add_continuous("x", 0, 1), Error);
    CHECK_THROWS_AS(p.add_continuous("y", 2, 1), Error);
    CHECK_THROWS_AS(p.add_constraint({"bad", {{1.0, 7}}, Sense::Le, 0.0}), Error);
    CHECK(p.find("x") == x);
    CHECK_FALSE(p.find("z").has_value());
}

TEST_CASE("sanitize_name") {
    CHECK(sanitize_name("val[s0]") == "val_s0_");
    CHECK(sanitize_name("a-b c.d") == "a_b_c_d");
    CHECK(sanitize_name("plain_9") == "plain_9");
}

TEST_CASE("check_feasibility reports the worst violation") {
    MilpProblem p;
    const auto x = p.add_continuous("x", 0, 2);
    const auto y = p.add_binary("y");
    p.add_constraint({"sum", {{1.0, x}, {1.0, y}}, Sense::Le, 2.0});
    p.add_constraint({"eq", {{1.0, x}}, Sense::Eq, 1.0});
    CHECK(check_feasibility(p, {1.0, 1.0}).feasible);
    auto r = check_feasibility(p, {1.0, 0.5});
    CHECK_FALSE(r.feasible);
    CHECK(r.worst == "y");
    r = check_feasibility(p, {1.75, 0.0});
    CHECK_FALSE(r.feasible);
    CHECK(r.worst == "eq");
    CHECK(r.max_violation == doctest::Approx(0.75));
    CHECK_FALSE(check_feasibility(p, {1.0}).feasible);
    CHECK(objective_value(p, {1.0, 1.0}) == 0.0);
}

TEST_CASE("read_lp accepts the common dialect") {
    const MilpProblem p = read_lp("\\ comment line\n"
                                  "Minimize\n obj: 2 x - y\n"
                                  "st\n c1: x + y\n >= 1\n -x + 3 y <= 4\n"
                                  "Bounds\n y free\n x <= 5\n -2 <= z\n w <= -1\n"
                                  "Binary\n b\n"
                                  "End\n");
    const auto& v = p.variables();
    const auto x = *p.find("x"), y = *p.find("y"), z = *p.find("z"), w = *p.find("w"), b = *p.find("b");
    CHECK(v[x].lower == 0.0);
    CHECK(v[x].upper == 5.0);
    CHECK(v[y].lower == -kInf);
    CHECK(v[y].upper == kInf);
    CHECK(v[z].lower == -2.0);
    CHECK(v[w].lower == -kInf);
    CHECK(v[w].upper == -1.0);
    CHECK(v[b].kind == VarKind::Binary);
    REQUIRE(p.constraints().size() == 2);
    CHECK(p.constraints()[0].name == "c1");
    CHECK(p.constraints()[0].sense == Sense::Ge);
    CHECK(p.constraints()[1].name == "R1");
    // Minimize is negated into a maximization.
    const auto obj = by_name(p, p.objective());
    CHECK(obj.at("x") == -2.0);
    CHECK(obj.at("y") == 1.0);
}

TEST_CASE("read_lp errors carry positions") {
    CHECK_THROWS_AS(read_lp("Maximize\n obj: x\nSubject To\n c: x <= 1\n"), ParseError); // no End
    CHECK_THROWS_AS(read_lp("Subject To\n c: x <= 1\nEnd\n"), ParseError);
    CHECK_THROWS_AS(read_lp("Maximize\n obj: x\nSubject To\n c: x + 3 <= 1\nEnd\n"), ParseError);
    CHECK_THROWS_AS(read_lp("Maximize\n obj: x\nGenerals\n x\nEnd\n"), ParseError);
    try {
        read_lp("Maximize\n obj: x\nSubject To\n c: x y <= 1\nEnd\n");
        FAIL("accepted a missing operator");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
}

TEST_CASE("17-digit numerals survive the text form") {
    MilpProblem p;
    const auto x = p.add_continuous("x", 0.1, 1.0 / 3.0);
    p.add_constraint({"c", {{0.68000000000000005, x}}, Sense::Ge, 1e-17});
    p.set_objective({{2.0 / 3.0, x}});
    const MilpProblem q = read_lp(emit_lp(p));
    CHECK(q.variables()[0].upper == 1.0 / 3.0);
    CHECK(q.constraints()[0].terms[0].coef == 0.68000000000000005);
    CHECK(q.constraints()[0].rhs == 1e-17);
    CHECK(q.objective()[0].coef == 2.0 / 3.0);
}
