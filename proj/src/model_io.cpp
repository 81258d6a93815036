#include "imdp/model_io.hpp"

#include "imdp/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace imdp {

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

enum class TokKind { Word, Quoted, LBracket, RBracket, Comma, Colon };

struct Token {
    TokKind kind;
    std::string text;
    std::size_t column; // 1-based
};

/// Splits one line into tokens; a `#` outside quotes ends the line.
std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t col = i + 1;
        switch (c) {
        case '[': out.push_back({TokKind::LBracket, "[", col}); ++i; continue;
        case ']': out.push_back({TokKind::RBracket, "]", col}); ++i; continue;
        case ',': out.push_back({TokKind::Comma, ",", col}); ++i; continue;
        case ':': out.push_back({TokKind::Colon, ":", col}); ++i; continue;
        default: break;
        }
        if (c == '"') {
            const std::size_t close = line.find('"', i + 1);
            if (close == std::string_view::npos) throw ParseError("unterminated string", line_no, col);
            out.push_back({TokKind::Quoted, std::string(line.substr(i + 1, close - i - 1)), col});
            i = close + 1;
            continue;
        }
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
               std::string_view("[],:\"#").find(line[j]) == std::string_view::npos)
            ++j;
        out.push_back({TokKind::Word, std::string(line.substr(i, j - i)), col});
        i = j;
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

/// Cursor over the tokens of one line with located errors.
class LineReader {
public:
    LineReader(std::vector<Token> tokens, std::size_t line_no, std::size_t line_len)
        : toks_(std::move(tokens)), line_(line_no), end_col_(line_len + 1) {}

    bool at_end() const { return pos_ >= toks_.size(); }
    std::size_t line() const { return line_; }
    std::size_t column() const { return at_end() ? end_col_ : toks_[pos_].column; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, column()); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t col) const { throw ParseError(msg, line_, col); }

    const Token& next(const char* what) {
        if (at_end()) fail(std::string("expected ") + what);
        return toks_[pos_++];
    }

    const Token& expect(TokKind kind, const char* what) {
        const Token& t = next(what);
        if (t.kind != kind) fail_at(std::string("expected ") + what, t.column);
        return t;
    }

    double number(const char* what) {
        const Token& t = expect(TokKind::Word, what);
        double v = 0.0;
        const char* first = t.text.data();
        const char* last = first + t.text.size();
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            fail_at(std::string("invalid number for ") + what + ": '" + t.text + "'", t.column);
        return v;
    }

    std::uint64_t integer(const char* what) {
        const Token& t = expect(TokKind::Word, what);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size())
            fail_at(std::string("invalid integer for ") + what + ": '" + t.text + "'", t.column);
        return v;
    }

    void finish() {
        if (!at_end()) fail("unexpected trailing token '" + toks_[pos_].text + "'");
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::size_t end_col_;
};

struct PendingRow {
    std::map<StateId, std::pair<double, double>> successors;
    std::optional<double> reward;
    std::size_t line = 0;
};

} // namespace

ImdpModel parse_model(std::string_view text) {
    ImdpModel model;
    std::optional<std::size_t> num_states;
    std::map<std::string, ActionId> action_index;
    std::map<std::pair<StateId, ActionId>, PendingRow> rows;
    std::map<std::pair<StateId, ActionId>, std::pair<double, std::size_t>> rewards;
    bool saw_actions = false;
    bool saw_initial = false;

    const auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        LineReader in(tokenize(lines[li], line_no), line_no, lines[li].size());
        if (in.at_end()) continue;

        const Token& kw = in.next("directive");
        if (kw.kind != TokKind::Word) in.fail_at("expected directive", kw.column);

        auto state = [&](const char* what) -> StateId {
            const std::size_t col = in.column();
            const std::uint64_t v = in.integer(what);
            if (v >= *num_states) in.fail_at(std::string("undeclared state ") + std::to_string(v), col);
            return static_cast<StateId>(v);
        };
        auto action = [&]() -> ActionId {
            const Token& t = in.expect(TokKind::Word, "action label");
            auto it = action_index.find(t.text);
            if (it == action_index.end()) in.fail_at("undeclared action '" + t.text + "'", t.column);
            return it->second;
        };

        if (!num_states) {
            if (kw.text != "imdp") in.fail_at("missing header: expected 'imdp <num_states>'", kw.column);
            const std::size_t col = in.column();
            const std::uint64_t n = in.integer("state count");
            if (n == 0) in.fail_at("state count must be positive", col);
            if (n > std::numeric_limits<StateId>::max() / 2) in.fail_at("state count too large", col);
            in.finish();
            num_states = n;
            continue;
        }

        if (kw.text == "imdp") {
            in.fail_at("duplicate header", kw.column);
        } else if (kw.text == "actions") {
            if (saw_actions) in.fail_at("duplicate 'actions' directive", kw.column);
            saw_actions = true;
            while (!in.at_end()) {
                const Token& t = in.expect(TokKind::Word, "action label");
                if (!is_identifier(t.text)) in.fail_at("invalid action label '" + t.text + "'", t.column);
                if (action_index.count(t.text)) in.fail_at("duplicate action label '" + t.text + "'", t.column);
                action_index.emplace(t.text, static_cast<ActionId>(model.actions.size()));
                model.actions.push_back(t.text);
            }
        } else if (kw.text == "initial") {
            if (saw_initial) in.fail_at("duplicate 'initial' directive", kw.column);
            saw_initial = true;
            model.initial = state("initial state");
            in.finish();
        } else if (kw.text == "name") {
            const StateId s = state("state");
            const Token& t = in.expect(TokKind::Quoted, "quoted name");
            if (model.state_names.empty()) model.state_names.resize(*num_states);
            model.state_names[s] = t.text;
            in.finish();
        } else if (kw.text == "label") {
            const Token& t = in.expect(TokKind::Quoted, "quoted label name");
            if (t.text.empty()) in.fail_at("empty label name", t.column);
            if (model.labels.count(t.text)) in.fail_at("duplicate label \"" + t.text + "\"", t.column);
            std::vector<StateId> members;
            while (!in.at_end()) members.push_back(state("state"));
            std::sort(members.begin(), members.end());
            members.erase(std::unique(members.begin(), members.end()), members.end());
            model.labels.emplace(t.text, std::move(members));
        } else if (kw.text == "trans") {
            const StateId s = state("source state");
            const ActionId a = action();
            const std::size_t succ_col = in.column();
            const StateId t = state("successor state");
            double lo = 0.0;
            double hi = 0.0;
            const std::size_t col = in.column();
            if (in.at_end()) in.fail("expected probability or interval");
            LineReader probe = in;
            if (probe.next("interval").kind == TokKind::LBracket) {
                in.next("[");
                lo = in.number("lower bound");
                in.expect(TokKind::Comma, "','");
                hi = in.number("upper bound");
                in.expect(TokKind::RBracket, "']'");
            } else {
                lo = hi = in.number("probability");
            }
            in.finish();
            if (lo < 0.0 || hi > 1.0) in.fail_at("probability bound outside [0, 1]", col);
            if (lo > hi) in.fail_at("lower exceeds upper", col);
            PendingRow& row = rows[{s, a}];
            if (row.line == 0) row.line = line_no;
            if (!row.successors.emplace(t, std::make_pair(lo, hi)).second)
                in.fail_at("duplicate transition " + std::to_string(s) + " " + model.actions[a] + " " +
                               std::to_string(t),
                           succ_col);
        } else if (kw.text == "reward") {
            const StateId s = state("state");
            const ActionId a = action();
            const std::size_t col = in.column();
            const double r = in.number("reward");
            in.finish();
            if (r < 0.0) in.fail_at("reward must be >= 0", col);
            if (!rewards.emplace(std::make_pair(s, a), std::make_pair(r, line_no)).second)
                in.fail_at("duplicate reward", col);
        } else {
            in.fail_at("unknown directive '" + kw.text + "'", kw.column);
        }
    }
    if (!num_states) throw ParseError("missing header: expected 'imdp <num_states>'", 1, 1);

    model.choices.resize(*num_states);
    for (auto& [key, row] : rows) {
        Choice c;
        c.action = key.second;
        for (const auto& [t, bounds] : row.successors) c.row.push_back({t, bounds.first, bounds.second});
        model.choices[key.first].push_back(std::move(c));
    }
    for (const auto& [key, value] : rewards) {
        auto& cs = model.choices[key.first];
        auto it = std::find_if(cs.begin(), cs.end(), [&](const Choice& c) { return c.action == key.second; });
        if (it == cs.end())
            throw ParseError("reward for action without transitions", value.second, 1);
        it->reward = value.first;
    }
    for (StateId s = 0; s < model.num_states(); ++s)
        if (model.choices[s].empty()) model.choices[s].push_back(Choice{kSelfLoop, {{s, 1.0, 1.0}}, 0.0});

    for (const Diagnostic& d : validate_model(model)) {
        if (d.severity != Diagnostic::Severity::Error) continue;
        std::size_t line = 1;
        if (d.state && d.action) {
            auto it = rows.find({*d.state, *d.action});
            if (it != rows.end()) line = it->second.line;
        }
        throw ParseError("invalid model: " + d.describe(&model), line, 1);
    }
    return model;
}

std::string write_model(const ImdpModel& model) {
    std::ostringstream out;
    out << "imdp " << model.num_states() << "\n";
    out << "actions";
    for (const auto& a : model.actions) out << ' ' << a;
    out << "\n";
    out << "initial " << model.initial << "\n";
    for (StateId s = 0; s < model.state_names.size(); ++s)
        if (!model.state_names[s].empty()) out << "name " << s << " \"" << model.state_names[s] << "\"\n";
    for (const auto& [name, members] : model.labels) {
        out << "label \"" << name << '"';
        for (StateId s : members) out << ' ' << s;
        out << "\n";
    }
    for (StateId s = 0; s < model.num_states(); ++s) {
        for (const Choice& c : model.choices[s]) {
            if (c.implicit()) continue;
            for (const Successor& t : c.row) {
                out << "trans " << s << ' ' << model.actions.at(c.action) << ' ' << t.state << ' ';
                if (t.lower == t.upper)
                    out << format_double(t.lower);
                else
                    out << '[' << format_double(t.lower) << ", " << format_double(t.upper) << ']';
                out << "\n";
            }
        }
    }
    for (StateId s = 0; s < model.num_states(); ++s)
        for (const Choice& c : model.choices[s])
            if (!c.implicit() && c.reward != 0.0)
                out << "reward " << s << ' ' << model.actions.at(c.action) << ' ' << format_double(c.reward) << "\n";
    return out.str();
}

Spec parse_spec(std::string_view text, const ImdpModel& model) {
    LineReader in(tokenize(text, 1), 1, text.size());
    Spec spec;
    const Token& head = in.expect(TokKind::Word, "'P' or 'R'");
    // The head word carries the operator and, when unspaced, the threshold: "P>=0.65".
    std::string_view w = head.text;
    if (w.empty() || (w[0] != 'P' && w[0] != 'R')) in.fail_at("expected 'P' or 'R'", head.column);
    const bool reward = w[0] == 'R';
    w.remove_prefix(1);
    std::string op_word;
    std::size_t op_col = head.column + 1;
    if (w.empty()) {
        op_col = in.column();
        op_word = in.expect(TokKind::Word, "'>=' or '<='").text;
        w = op_word;
    }
    if (w.size() < 2 || (w.substr(0, 2) != ">=" && w.substr(0, 2) != "<=")) in.fail_at("expected '>=' or '<='", op_col);
    const bool ge = w[0] == '>';
    w.remove_prefix(2);
    spec.kind = reward ? (ge ? SpecKind::RewGe : SpecKind::RewLe) : (ge ? SpecKind::ProbGe : SpecKind::ProbLe);
    const std::size_t thr_col = w.empty() ? in.column() : op_col + 2;
    std::string thr_text = w.empty() ? in.expect(TokKind::Word, "threshold").text : std::string(w);
    {
        double v = 0.0;
        const char* first = thr_text.data();
        const char* last = first + thr_text.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            in.fail_at("invalid threshold '" + thr_text + "'", thr_col);
        spec.threshold = v;
    }
    if (reward ? spec.threshold < 0.0 : (spec.threshold < 0.0 || spec.threshold > 1.0))
        in.fail_at("threshold out of range", thr_col);
    in.expect(TokKind::LBracket, "'['");
    const Token& f = in.expect(TokKind::Word, "'F'");
    if (f.text != "F") in.fail_at("expected 'F'", f.column);
    const Token& label = in.expect(TokKind::Quoted, "quoted target label");
    in.expect(TokKind::RBracket, "']'");
    in.finish();
    auto it = model.labels.find(label.text);
    if (it == model.labels.end()) in.fail_at("unknown label \"" + label.text + "\"", label.column);
    if (it->second.empty()) in.fail_at("label \"" + label.text + "\" has no states", label.column);
    spec.label = label.text;
    spec.target = it->second;
    return spec;
}

std::string write_spec(const Spec& spec) {
    return to_string(spec.kind) + format_double(spec.threshold) + " [F \"" + spec.label + "\"]";
}

MultiStrategy parse_strategy(std::string_view text, const ImdpModel& model) {
    MultiStrategy theta;
    theta.admitted.resize(model.num_states());
    std::vector<bool> seen(model.num_states(), false);
    std::map<std::string, ActionId> names;
    for (ActionId a = 0; a < model.actions.size(); ++a) names.emplace(model.actions[a], a);
    names.emplace(kSelfLoopLabel, kSelfLoop);
    std::map<std::string, StateId> state_names;
    for (StateId s = 0; s < model.num_states(); ++s)
        if (!model.state_names.empty() && !model.state_names[s].empty()) state_names.emplace(model.state_names[s], s);

    const auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        LineReader in(tokenize(lines[li], line_no), line_no, lines[li].size());
        if (in.at_end()) continue;
        const std::size_t col = in.column();
        const Token& st = in.expect(TokKind::Word, "state");
        std::uint64_t s = model.num_states();
        if (const auto named = state_names.find(st.text); named != state_names.end()) {
            s = named->second;
        } else {
            auto [ptr, ec] = std::from_chars(st.text.data(), st.text.data() + st.text.size(), s);
            if (ec != std::errc() || ptr != st.text.data() + st.text.size())
                in.fail_at("unknown state '" + st.text + "'", col);
        }
        if (s >= model.num_states()) in.fail_at("undeclared state " + std::to_string(s), col);
        if (seen[s]) in.fail_at("duplicate line for state " + std::to_string(s), col);
        seen[s] = true;
        in.expect(TokKind::Colon, "':'");
        auto& set = theta.admitted[s];
        while (!in.at_end()) {
            const Token& t = in.expect(TokKind::Word, "action label");
            auto it = names.find(t.text);
            if (it == names.end()) in.fail_at("unknown action '" + t.text + "'", t.column);
            if (!model.find_choice(static_cast<StateId>(s), it->second))
                in.fail_at("action '" + t.text + "' not enabled in state " + std::to_string(s), t.column);
            set.push_back(it->second);
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        if (set.empty()) throw ParseError("empty admitted set for state " + std::to_string(s), line_no, col);
    }
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (seen[s]) continue;
        if (!model.absorbing(s)) throw ParseError("missing line for state " + std::to_string(s), lines.size(), 1);
        theta.admitted[s] = {kSelfLoop};
    }
    return theta;
}

std::string write_strategy(const ImdpModel& model, const MultiStrategy& theta) {
    std::ostringstream out;
    for (StateId s = 0; s < model.num_states(); ++s) {
        out << s << ':';
        for (ActionId a : theta.admitted.at(s)) out << ' ' << model.action_name(a);
        out << "\n";
    }
    return out.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

ImdpModel load_model_file(const std::string& path) { return parse_model(read_text_file(path)); }

} // namespace imdp
