#include "hcm/dsl.hpp"

#include <algorithm>
#include <sstream>

namespace hcm {

namespace {

struct Token {
    std::string text;
    int col = 0; // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        size_t start = i;
        if (line[i] == '{' || line[i] == '}' || line[i] == '|' ||
            line[i] == ',' || line[i] == '=' || line[i] == '~') {
            ++i;
        } else if (line.compare(i, 2, "->") == 0) {
            i += 2;
        } else {
            while (i < line.size() &&
                   !std::isspace(static_cast<unsigned char>(line[i])) &&
                   std::string("#{}|,=~").find(line[i]) == std::string::npos &&
                   line.compare(i, 2, "->") != 0)
                ++i;
        }
        out.push_back({line.substr(start, i - start), static_cast<int>(start + 1)});
    }
    return out;
}

[[noreturn]] void syntax_error(int line, int col, const std::string& expected) {
    std::ostringstream os;
    os << "line " << line << ":" << col << ": expected " << expected;
    throw Error("SyntaxError", os.str());
}

[[noreturn]] void semantic_error(int line, const std::string& msg) {
    std::ostringstream os;
    os << "line " << line << ": " << msg;
    throw Error("SemanticError", os.str());
}

bool is_ident(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
            return false;
    return !std::isdigit(static_cast<unsigned char>(s[0]));
}

} // namespace

ParseResult parse_hcm(const std::string& text) {
    ParseResult res;
    enum State { Start, Body, AfterBody, Query, Done } state = Start;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::optional<int> q_treatment, q_outcome;
    InterventionKind q_kind = InterventionKind::SoftSubunit;
    std::vector<int> q_cond;
    int q_line = 0;

    while (std::getline(in, raw)) {
        ++lineno;
        auto toks = tokenize(raw);
        if (toks.empty()) continue;
        auto tok = [&](size_t i) -> const Token& {
            if (i >= toks.size())
                syntax_error(lineno, static_cast<int>(raw.size() + 1),
                             "more input");
            return toks[i];
        };
        switch (state) {
        case Start: {
            if (tok(0).text != "hcm")
                syntax_error(lineno, tok(0).col, "'hcm'");
            if (!is_ident(tok(1).text))
                syntax_error(lineno, tok(1).col, "model name");
            if (tok(2).text != "{")
                syntax_error(lineno, tok(2).col, "'{'");
            if (toks.size() > 3)
                syntax_error(lineno, toks[3].col, "end of line");
            res.graph.name = tok(1).text;
            state = Body;
            break;
        }
        case Body: {
            const std::string& head = tok(0).text;
            if (head == "}") {
                if (toks.size() > 1)
                    syntax_error(lineno, toks[1].col, "end of line");
                state = AfterBody;
                break;
            }
            if (head == "unit" || head == "subunit") {
                const std::string& vis = tok(1).text;
                if (vis != "observed" && vis != "hidden")
                    syntax_error(lineno, tok(1).col, "'observed' or 'hidden'");
                if (!is_ident(tok(2).text))
                    syntax_error(lineno, tok(2).col, "variable name");
                if (toks.size() > 3)
                    syntax_error(lineno, toks[3].col, "end of line");
                try {
                    res.graph.add_var(tok(2).text,
                                      head == "unit" ? Level::Unit
                                                     : Level::Subunit,
                                      vis == "observed",
                                      SourceLoc{lineno, tok(2).col});
                } catch (const Error& e) {
                    semantic_error(lineno, e.what());
                }
                break;
            }
            // edge: A -> B
            if (!is_ident(head)) syntax_error(lineno, tok(0).col, "declaration or edge");
            if (tok(1).text != "->") syntax_error(lineno, tok(1).col, "'->'");
            if (!is_ident(tok(2).text))
                syntax_error(lineno, tok(2).col, "variable name");
            if (toks.size() > 3)
                syntax_error(lineno, toks[3].col, "end of line");
            auto a = res.graph.find(head);
            auto b = res.graph.find(tok(2).text);
            if (!a) semantic_error(lineno, "unknown variable '" + head + "'");
            if (!b) semantic_error(lineno, "unknown variable '" + tok(2).text + "'");
            res.graph.add_edge(*a, *b);
            break;
        }
        case AfterBody: {
            if (tok(0).text != "query")
                syntax_error(lineno, tok(0).col, "'query' or end of input");
            if (tok(1).text != "{")
                syntax_error(lineno, tok(1).col, "'{'");
            if (toks.size() > 2)
                syntax_error(lineno, toks[2].col, "end of line");
            state = Query;
            q_line = lineno;
            break;
        }
        case Query: {
            const std::string& head = tok(0).text;
            if (head == "}") {
                if (toks.size() > 1)
                    syntax_error(lineno, toks[1].col, "end of line");
                state = Done;
                break;
            }
            if (head == "intervene") {
                if (!is_ident(tok(1).text))
                    syntax_error(lineno, tok(1).col, "variable name");
                auto v = res.graph.find(tok(1).text);
                if (!v)
                    semantic_error(lineno,
                                   "unknown variable '" + tok(1).text + "'");
                q_treatment = *v;
                if (tok(2).text == "=") {
                    if (tok(3).text != "hard")
                        syntax_error(lineno, tok(3).col, "'hard'");
                    if (toks.size() > 4)
                        syntax_error(lineno, toks[4].col, "end of line");
                    q_kind = InterventionKind::HardUnit;
                } else if (tok(2).text == "~") {
                    if (tok(3).text != "soft")
                        syntax_error(lineno, tok(3).col, "'soft'");
                    q_kind = InterventionKind::SoftSubunit;
                    size_t i = 4;
                    if (i < toks.size()) {
                        if (tok(i).text != "|")
                            syntax_error(lineno, tok(i).col, "'|' or end of line");
                        ++i;
                        q_kind = InterventionKind::ConditionalSoftSubunit;
                        bool want_name = true;
                        for (; i < toks.size(); ++i) {
                            if (want_name) {
                                if (!is_ident(toks[i].text))
                                    syntax_error(lineno, toks[i].col,
                                                 "variable name");
                                auto w = res.graph.find(toks[i].text);
                                if (!w)
                                    semantic_error(lineno, "unknown variable '" +
                                                               toks[i].text + "'");
                                q_cond.push_back(*w);
                            } else if (toks[i].text != ",") {
                                syntax_error(lineno, toks[i].col, "','");
                            }
                            want_name = !want_name;
                        }
                        if (want_name || q_cond.empty())
                            syntax_error(lineno,
                                         static_cast<int>(raw.size() + 1),
                                         "variable name");
                    }
                } else {
                    syntax_error(lineno, tok(2).col, "'~' or '='");
                }
                break;
            }
            if (head == "outcome") {
                if (!is_ident(tok(1).text))
                    syntax_error(lineno, tok(1).col, "variable name");
                if (toks.size() > 2)
                    syntax_error(lineno, toks[2].col, "end of line");
                auto y = res.graph.find(tok(1).text);
                if (!y)
                    semantic_error(lineno,
                                   "unknown variable '" + tok(1).text + "'");
                q_outcome = *y;
                break;
            }
            syntax_error(lineno, tok(0).col, "'intervene', 'outcome' or '}'");
        }
        case Done:
            syntax_error(lineno, tok(0).col, "end of input");
        }
    }
    if (state == Start) syntax_error(lineno + 1, 1, "'hcm <Name> {'");
    if (state == Body) syntax_error(lineno + 1, 1, "'}'");
    if (state == Query) syntax_error(lineno + 1, 1, "'}'");

    auto rep = validate_hcm(res.graph);
    if (!rep.ok())
        throw Error(rep.issues.front().code, rep.issues.front().message);

    if (state == Done) {
        if (!q_treatment || !q_outcome)
            semantic_error(q_line, "query needs both 'intervene' and 'outcome'");
        QuerySpec q;
        q.treatment = *q_treatment;
        q.outcome = *q_outcome;
        q.intervention = q_kind;
        std::sort(q_cond.begin(), q_cond.end());
        q.conditioning = q_cond;
        const auto& tv = res.graph.var(q.treatment);
        if (q_kind == InterventionKind::HardUnit && tv.level != Level::Unit)
            semantic_error(q_line, "hard intervention requires a unit variable, '" +
                                       tv.name + "' is subunit-level");
        if (q_kind != InterventionKind::HardUnit && tv.level != Level::Subunit)
            semantic_error(q_line, "soft intervention requires a subunit variable, '" +
                                       tv.name + "' is unit-level");
        if (q_kind == InterventionKind::ConditionalSoftSubunit) {
            auto pas = res.graph.subunit_parents(q.treatment);
            for (int w : q.conditioning)
                if (std::find(pas.begin(), pas.end(), w) == pas.end())
                    semantic_error(q_line, "conditioning variable '" +
                                               res.graph.var(w).name +
                                               "' is not a subunit parent of '" +
                                               tv.name + "'");
        }
        q.outcome_form = res.graph.var(q.outcome).level == Level::Subunit
                             ? OutcomeForm::SubunitMarginal
                             : OutcomeForm::UnitValue;
        res.query = q;
    }
    return res;
}

std::string serialize_hcm(const HierGraph& g,
                          const std::optional<QuerySpec>& query) {
    std::ostringstream os;
    os << "hcm " << g.name << " {\n";
    for (int v = 0; v < g.size(); ++v) {
        const auto& vr = g.var(v);
        os << "  " << (vr.level == Level::Unit ? "unit" : "subunit") << " "
           << (vr.observed ? "observed" : "hidden") << " " << vr.name << "\n";
    }
    for (const auto& [a, b] : g.edges())
        os << "  " << g.var(a).name << " -> " << g.var(b).name << "\n";
    os << "}\n";
    if (query) {
        os << "query {\n";
        os << "  intervene " << g.var(query->treatment).name;
        if (query->intervention == InterventionKind::HardUnit) {
            os << " = hard\n";
        } else {
            os << " ~ soft";
            if (query->intervention == InterventionKind::ConditionalSoftSubunit) {
                os << " | ";
                for (size_t i = 0; i < query->conditioning.size(); ++i) {
                    if (i) os << ", ";
                    os << g.var(query->conditioning[i]).name;
                }
            }
            os << "\n";
        }
        os << "  outcome " << g.var(query->outcome).name << "\n";
        os << "}\n";
    }
    return os.str();
}

} // namespace hcm
