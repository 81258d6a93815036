#include "imdp/milp.hpp"

#include "imdp/errors.hpp"
#include "imdp/model_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace imdp {

std::string to_string(ConstraintRole role) {
    switch (role) {
    case ConstraintRole::Other: return "other";
    case ConstraintRole::Admit: return "admit";
    case ConstraintRole::Threshold: return "threshold";
    case ConstraintRole::Pin: return "pin";
    case ConstraintRole::VertexRobust: return "vertex-robust";
    case ConstraintRole::DualFeasibility: return "dual-feasibility";
    case ConstraintRole::DualRobust: return "dual-robust";
    case ConstraintRole::EtaBound: return "eta-bound";
    case ConstraintRole::EtaLink: return "eta-link";
    case ConstraintRole::Qualitative: return "qualitative";
    }
    return "other";
}

std::vector<Term> merge_terms(std::vector<Term> terms) {
    std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> out;
    for (const Term& t : terms) {
        if (!out.empty() && out.back().var == t.var)
            out.back().coef += t.coef;
        else
            out.push_back(t);
    }
    std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
    return out;
}

std::string sanitize_name(std::string_view name) {
    std::string out(name);
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    return out;
}

std::size_t MilpProblem::add_variable(Variable v) {
    if (v.kind == VarKind::Binary) {
        v.lower = std::max(v.lower, 0.0);
        v.upper = std::min(v.upper, 1.0);
    }
    if (v.lower > v.upper) throw Error("variable " + v.name + " has empty bounds");
    if (index_.contains(v.name)) throw Error("duplicate variable " + v.name);
    index_.emplace(v.name, variables_.size());
    variables_.push_back(std::move(v));
    return variables_.size() - 1;
}

std::size_t MilpProblem::add_continuous(std::string name, double lower, double upper, VarRole role) {
    Variable v;
    v.name = std::move(name);
    v.lower = lower;
    v.upper = upper;
    v.role = role;
    return add_variable(std::move(v));
}

std::size_t MilpProblem::add_binary(std::string name, VarRole role) {
    Variable v;
    v.name = std::move(name);
    v.kind = VarKind::Binary;
    v.lower = 0.0;
    v.upper = 1.0;
    v.role = role;
    return add_variable(std::move(v));
}

void MilpProblem::add_constraint(Constraint c) {
    for (const Term& t : c.terms) {
        if (t.var >= variables_.size()) throw Error("constraint " + c.name + " references an undeclared variable");
        if (!std::isfinite(t.coef)) throw Error("constraint " + c.name + " has a non-finite coefficient");
    }
    if (!std::isfinite(c.rhs)) throw Error("constraint " + c.name + " has a non-finite right-hand side");
    c.terms = merge_terms(std::move(c.terms));
    constraints_.push_back(std::move(c));
}

void MilpProblem::set_objective(std::vector<Term> terms) {
    for (const Term& t : terms)
        if (t.var >= variables_.size()) throw Error("objective references an undeclared variable");
    objective_ = merge_terms(std::move(terms));
}

std::optional<std::size_t> MilpProblem::find(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t MilpProblem::num_binaries() const {
    return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                  [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

double evaluate(const std::vector<Term>& terms, const Assignment& x) {
    double acc = 0.0;
    for (const Term& t : terms) acc += t.coef * x.at(t.var);
    return acc;
}

double objective_value(const MilpProblem& problem, const Assignment& x) { return evaluate(problem.objective(), x); }

FeasibilityReport check_feasibility(const MilpProblem& problem, const Assignment& x, double tolerance) {
    FeasibilityReport report;
    if (x.size() != problem.variables().size()) {
        report.feasible = false;
        report.max_violation = kInf;
        report.worst = "assignment size";
        return report;
    }
    auto note = [&](double violation, const std::string& what) {
        if (violation > report.max_violation) {
            report.max_violation = violation;
            report.worst = what;
        }
    };
    for (std::size_t j = 0; j < x.size(); ++j) {
        const Variable& v = problem.variables()[j];
        if (!std::isfinite(x[j])) {
            note(kInf, v.name);
            continue;
        }
        note(v.lower - x[j], v.name);
        note(x[j] - v.upper, v.name);
        if (v.kind == VarKind::Binary) note(std::min(std::abs(x[j]), std::abs(x[j] - 1.0)), v.name);
    }
    for (const Constraint& c : problem.constraints()) {
        const double lhs = evaluate(c.terms, x);
        switch (c.sense) {
        case Sense::Le: note(lhs - c.rhs, c.name); break;
        case Sense::Ge: note(c.rhs - lhs, c.name); break;
        case Sense::Eq: note(std::abs(lhs - c.rhs), c.name); break;
        }
    }
    report.feasible = report.max_violation <= tolerance;
    return report;
}

// ---------------------------------------------------------------------------
// Writer

namespace {

std::string bound_text(double v) {
    if (v == kInf) return "+inf";
    if (v == -kInf) return "-inf";
    return format_double(v);
}

void write_terms(std::ostringstream& out, const std::vector<Term>& terms, const MilpProblem& problem) {
    if (terms.empty()) {
        out << " 0 " << problem.variables().front().name;
        return;
    }
    bool first = true;
    for (const Term& t : terms) {
        const bool negative = t.coef < 0.0;
        if (first)
            out << (negative ? " - " : " ");
        else
            out << (negative ? " - " : " + ");
        out << format_double(std::abs(t.coef)) << ' ' << problem.variables()[t.var].name;
        first = false;
    }
}

const char* sense_text(Sense s) {
    switch (s) {
    case Sense::Le: return "<=";
    case Sense::Ge: return ">=";
    case Sense::Eq: return "=";
    }
    return "=";
}

} // namespace

std::string emit_lp(const MilpProblem& problem) {
    if (problem.variables().empty()) throw Error("cannot emit a problem without variables");
    std::ostringstream out;
    out << "Maximize\n obj:";
    write_terms(out, problem.objective(), problem);
    out << "\nSubject To\n";
    for (const Constraint& c : problem.constraints()) {
        out << ' ' << sanitize_name(c.name) << ':';
        write_terms(out, c.terms, problem);
        out << ' ' << sense_text(c.sense) << ' ' << format_double(c.rhs) << '\n';
    }
    out << "Bounds\n";
    for (const Variable& v : problem.variables()) {
        if (v.kind == VarKind::Binary) continue;
        if (v.lower == -kInf && v.upper == kInf)
            out << ' ' << v.name << " free\n";
        else if (v.lower == v.upper)
            out << ' ' << v.name << " = " << format_double(v.lower) << '\n';
        else
            out << ' ' << bound_text(v.lower) << " <= " << v.name << " <= " << bound_text(v.upper) << '\n';
    }
    out << "Binaries\n";
    for (const Variable& v : problem.variables())
        if (v.kind == VarKind::Binary) out << ' ' << v.name << '\n';
    out << "End\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Reader

namespace {

enum class LpTok { Number, Name, Plus, Minus, Cmp, Colon };

struct LpToken {
    LpTok kind;
    std::string text;
    double number = 0.0;
    std::size_t line = 0;
    std::size_t column = 0;
};

bool is_operator_char(char c) { return c == '+' || c == '-' || c == '<' || c == '>' || c == '=' || c == ':'; }

std::vector<LpToken> lex_line(std::string_view line, std::size_t line_no) {
    std::vector<LpToken> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (c == '\\') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t col = i + 1;
        if (c == '+' || c == '-') {
            out.push_back({c == '+' ? LpTok::Plus : LpTok::Minus, std::string(1, c), 0.0, line_no, col});
            ++i;
            continue;
        }
        if (c == ':') {
            out.push_back({LpTok::Colon, ":", 0.0, line_no, col});
            ++i;
            continue;
        }
        if (c == '<' || c == '>' || c == '=') {
            std::size_t j = i + 1;
            if (j < line.size() && (line[j] == '=' || line[j] == '<' || line[j] == '>')) ++j;
            std::string op(line.substr(i, j - i));
            if (op == "=<" || op == "<") op = "<=";
            if (op == "=>" || op == ">") op = ">=";
            if (op != "<=" && op != ">=" && op != "=") throw ParseError("unknown operator '" + op + "'", line_no, col);
            out.push_back({LpTok::Cmp, op, 0.0, line_no, col});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::string rest(line.substr(i));
            char* end = nullptr;
            const double v = std::strtod(rest.c_str(), &end);
            const std::size_t len = static_cast<std::size_t>(end - rest.c_str());
            if (len == 0) throw ParseError("malformed number", line_no, col);
            out.push_back({LpTok::Number, rest.substr(0, len), v, line_no, col});
            i += len;
            continue;
        }
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && !is_operator_char(line[j]) &&
               line[j] != '\\')
            ++j;
        out.push_back({LpTok::Name, std::string(line.substr(i, j - i)), 0.0, line_no, col});
        i = j;
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, End };

struct SectionHeader {
    Section section;
    bool minimize = false;
};

std::optional<SectionHeader> section_of(std::string_view raw_line) {
    std::string line = lower(raw_line);
    const std::size_t cut = line.find('\\');
    if (cut != std::string::npos) line.resize(cut);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) ++start;
    line = line.substr(start);
    if (line == "maximize" || line == "maximise" || line == "maximum" || line == "max")
        return SectionHeader{Section::Objective, false};
    if (line == "minimize" || line == "minimise" || line == "minimum" || line == "min")
        return SectionHeader{Section::Objective, true};
    if (line == "subject to" || line == "such that" || line == "st" || line == "s.t." || line == "st.")
        return SectionHeader{Section::Constraints};
    if (line == "bounds" || line == "bound") return SectionHeader{Section::Bounds};
    if (line == "binaries" || line == "binary" || line == "bin") return SectionHeader{Section::Binaries};
    if (line == "generals" || line == "general" || line == "gen") return SectionHeader{Section::Generals};
    if (line == "end") return SectionHeader{Section::End};
    return std::nullopt;
}

struct LpBuilder {
    MilpProblem problem;
    std::vector<bool> bounded; // lower bound explicitly given

    std::size_t var(const std::string& name) {
        if (auto idx = problem.find(name)) return *idx;
        bounded.push_back(false);
        return problem.add_continuous(name, 0.0, kInf);
    }
};

bool is_infinity_name(const std::string& s) {
    const std::string l = lower(s);
    return l == "inf" || l == "infinity";
}

/// Parses `[name:] expr` terms from `toks` starting at `pos` until a comparator
/// or the end. Returns the terms; a bare constant is rejected.
std::vector<Term> parse_expression(const std::vector<LpToken>& toks, std::size_t& pos, LpBuilder& b) {
    std::vector<Term> terms;
    while (pos < toks.size() && toks[pos].kind != LpTok::Cmp) {
        double sign = 1.0;
        bool had_sign = false;
        while (pos < toks.size() && (toks[pos].kind == LpTok::Plus || toks[pos].kind == LpTok::Minus)) {
            if (toks[pos].kind == LpTok::Minus) sign = -sign;
            had_sign = true;
            ++pos;
        }
        if (pos >= toks.size()) {
            const LpToken& last = toks.back();
            throw ParseError("expression ends after a sign", last.line, last.column);
        }
        double coef = 1.0;
        if (toks[pos].kind == LpTok::Number) {
            coef = toks[pos].number;
            ++pos;
            if (pos >= toks.size() || toks[pos].kind != LpTok::Name) {
                const LpToken& at = toks[pos - 1];
                throw ParseError("constant terms are not supported", at.line, at.column);
            }
        }
        if (toks[pos].kind != LpTok::Name) throw ParseError("expected a variable", toks[pos].line, toks[pos].column);
        if (!had_sign && !terms.empty())
            throw ParseError("missing '+' or '-' between terms", toks[pos].line, toks[pos].column);
        terms.push_back({sign * coef, b.var(toks[pos].text)});
        ++pos;
    }
    return terms;
}

double parse_signed_number(const std::vector<LpToken>& toks, std::size_t& pos, bool allow_infinity) {
    double sign = 1.0;
    if (pos < toks.size() && (toks[pos].kind == LpTok::Plus || toks[pos].kind == LpTok::Minus)) {
        if (toks[pos].kind == LpTok::Minus) sign = -1.0;
        ++pos;
    }
    if (pos >= toks.size()) {
        const LpToken& last = toks.back();
        throw ParseError("expected a number", last.line, last.column + 1);
    }
    const LpToken& t = toks[pos];
    if (t.kind == LpTok::Number) {
        ++pos;
        return sign * t.number;
    }
    if (allow_infinity && t.kind == LpTok::Name && is_infinity_name(t.text)) {
        ++pos;
        return sign * kInf;
    }
    throw ParseError("expected a number", t.line, t.column);
}

void parse_bound_line(const std::vector<LpToken>& toks, LpBuilder& b) {
    auto is_number_start = [&](std::size_t p) {
        if (p >= toks.size()) return false;
        if (toks[p].kind == LpTok::Plus || toks[p].kind == LpTok::Minus) ++p;
        return p < toks.size() &&
               (toks[p].kind == LpTok::Number || (toks[p].kind == LpTok::Name && is_infinity_name(toks[p].text)));
    };
    std::size_t pos = 0;
    auto expect_cmp = [&]() -> std::string {
        if (pos >= toks.size() || toks[pos].kind != LpTok::Cmp) {
            const LpToken& at = pos < toks.size() ? toks[pos] : toks.back();
            throw ParseError("expected a comparison in bound", at.line, at.column);
        }
        return toks[pos++].text;
    };
    auto expect_name = [&]() -> std::size_t {
        if (pos >= toks.size() || toks[pos].kind != LpTok::Name) {
            const LpToken& at = pos < toks.size() ? toks[pos] : toks.back();
            throw ParseError("expected a variable in bound", at.line, at.column);
        }
        return b.var(toks[pos++].text);
    };
    auto apply = [&](std::size_t v, const std::string& op, double value, bool value_on_left) {
        Variable& var = b.problem.variables()[v];
        std::string eff = op;
        if (value_on_left && op != "=") eff = op == "<=" ? ">=" : "<=";
        if (eff == "=") {
            var.lower = var.upper = value;
        } else if (eff == "<=") {
            var.upper = value;
        } else {
            var.lower = value;
        }
        b.bounded[v] = true;
    };

    if (is_number_start(0)) {
        const double lo = parse_signed_number(toks, pos, true);
        const std::string op1 = expect_cmp();
        const std::size_t v = expect_name();
        apply(v, op1, lo, true);
        if (pos < toks.size()) {
            const std::string op2 = expect_cmp();
            const double hi = parse_signed_number(toks, pos, true);
            apply(v, op2, hi, false);
        }
    } else {
        const std::size_t v = expect_name();
        if (pos < toks.size() && toks[pos].kind == LpTok::Name && lower(toks[pos].text) == "free") {
            b.problem.variables()[v].lower = -kInf;
            b.problem.variables()[v].upper = kInf;
            ++pos;
        } else {
            const std::string op = expect_cmp();
            const double value = parse_signed_number(toks, pos, true);
            // A negative upper bound on a variable with the default lower bound
            // of zero makes the variable unbounded below, as in common readers.
            if (op == "<=" && value < 0.0 && !b.bounded[v]) b.problem.variables()[v].lower = -kInf;
            apply(v, op, value, false);
        }
    }
    if (pos != toks.size()) throw ParseError("trailing tokens in bound", toks[pos].line, toks[pos].column);
}

Sense sense_of(const std::string& op) {
    if (op == "<=") return Sense::Le;
    if (op == ">=") return Sense::Ge;
    return Sense::Eq;
}

} // namespace

MilpProblem read_lp(std::string_view text) {
    LpBuilder b;
    Section section = Section::None;
    bool minimize = false;
    bool saw_objective = false;
    std::vector<LpToken> objective_toks;
    std::vector<LpToken> constraint_toks;
    std::vector<std::string> binaries;
    std::size_t line_no = 0;
    std::vector<std::vector<LpToken>> bound_lines;

    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (auto header = section_of(line)) {
            section = header->section;
            if (section == Section::Objective) {
                if (saw_objective) throw ParseError("second objective section", line_no, 1);
                saw_objective = true;
                minimize = header->minimize;
            }
            if (section == Section::Generals) throw ParseError("general integer variables are not supported", line_no, 1);
            if (section == Section::End) break;
        } else {
            std::vector<LpToken> toks = lex_line(line, line_no);
            if (!toks.empty()) {
                switch (section) {
                case Section::None: throw ParseError("content before the objective section", line_no, toks[0].column);
                case Section::Objective: objective_toks.insert(objective_toks.end(), toks.begin(), toks.end()); break;
                case Section::Constraints:
                    constraint_toks.insert(constraint_toks.end(), toks.begin(), toks.end());
                    break;
                case Section::Bounds: bound_lines.push_back(std::move(toks)); break;
                case Section::Binaries:
                    for (const LpToken& t : toks) {
                        if (t.kind != LpTok::Name) throw ParseError("expected a variable name", t.line, t.column);
                        binaries.push_back(t.text);
                    }
                    break;
                case Section::Generals:
                case Section::End: break;
                }
            }
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    if (!saw_objective) throw ParseError("missing objective section", line_no, 1);
    if (section != Section::End) throw ParseError("missing 'End'", line_no, 1);

    // Objective.
    {
        std::size_t pos = 0;
        if (objective_toks.size() >= 2 && objective_toks[0].kind == LpTok::Name && objective_toks[1].kind == LpTok::Colon)
            pos = 2;
        std::vector<Term> terms = parse_expression(objective_toks, pos, b);
        if (pos != objective_toks.size())
            throw ParseError("comparison in objective", objective_toks[pos].line, objective_toks[pos].column);
        if (minimize)
            for (Term& t : terms) t.coef = -t.coef;
        b.problem.set_objective(std::move(terms));
    }

    // Constraints: [name:] expr cmp rhs, possibly spanning lines.
    std::size_t pos = 0;
    std::size_t unnamed = 0;
    std::vector<Constraint> pending;
    while (pos < constraint_toks.size()) {
        Constraint c;
        if (pos + 1 < constraint_toks.size() && constraint_toks[pos].kind == LpTok::Name &&
            constraint_toks[pos + 1].kind == LpTok::Colon) {
            c.name = constraint_toks[pos].text;
            pos += 2;
        } else {
            c.name = "R" + std::to_string(++unnamed);
        }
        const LpToken& first = constraint_toks[std::min(pos, constraint_toks.size() - 1)];
        c.terms = parse_expression(constraint_toks, pos, b);
        if (pos >= constraint_toks.size()) throw ParseError("constraint without comparison", first.line, first.column);
        c.sense = sense_of(constraint_toks[pos].text);
        ++pos;
        c.rhs = parse_signed_number(constraint_toks, pos, false);
        pending.push_back(std::move(c));
    }

    for (const auto& toks : bound_lines) parse_bound_line(toks, b);
    for (const std::string& name : binaries) {
        Variable& v = b.problem.variables()[b.var(name)];
        v.kind = VarKind::Binary;
        v.lower = std::max(v.lower, 0.0);
        v.upper = std::min(v.upper, 1.0);
    }
    for (Constraint& c : pending) b.problem.add_constraint(std::move(c));
    return b.problem;
}

} // namespace imdp
