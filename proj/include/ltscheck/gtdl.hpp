// gtdl.hpp — the generic threat-detection rule language.
//
// A rule is a finite program of Boolean assignments, conditionals and a
// flag-setting detection action.  This header provides the concrete-syntax
// parser, the small-step operational semantics of single rules, and the
// compilation of rules and whole rule sets into LTSs over the shared flag
// alphabet.
//
// Two compilation modes exist and they serve different purposes:
//
//  * `rule_to_lts` analyses one rule in isolation: the initial state branches
//    silently over every valuation of the rule's external inputs (plugin
//    calls and flag reads), and each branch is the deterministic SOS run
//    under that valuation.
//
//  * `engine_to_lts` composes a rule set the way the detection engine runs
//    it: rules execute in parallel, a `GlobalFlag.Set` and all
//    `GlobalFlag.IsSet` readers of the same flag synchronize on that flag's
//    observable action (multiway rendezvous), and plugin inputs branch
//    silently at their assignment.  States from which no run can complete
//    are pruned, so the completed-trace language contains exactly the
//    detection behaviours that can actually finish.

#pragma once

#include "ltscheck/lts.hpp"

#include <cctype>
#include <tuple>

namespace ltscheck {

// ---------------------------------------------------------------------------
// Abstract syntax
// ---------------------------------------------------------------------------

struct plugin_call {
    std::string function;
    std::string argument;
    auto operator<=>(const plugin_call&) const = default;
};

struct expr {
    enum class kind { literal, variable };
    kind k = kind::literal;
    bool value = false;
    std::string var;

    static expr lit(bool v) { expr e; e.k = kind::literal; e.value = v; return e; }
    static expr ref(std::string name) {
        expr e; e.k = kind::variable; e.var = std::move(name); return e;
    }
    bool operator==(const expr&) const = default;
};

struct cond {
    enum class kind { var_ref, expr_ref, conj, disj, neg, eq, ne };
    kind k = kind::expr_ref;
    std::string var;         // var_ref and the lhs of eq / ne
    expr e;                  // expr_ref and the rhs of eq / ne
    std::vector<cond> kids;  // conj / disj: two, neg: one

    static cond of_var(std::string v) {
        cond c; c.k = kind::var_ref; c.var = std::move(v); return c;
    }
    static cond of_expr(expr x) { cond c; c.k = kind::expr_ref; c.e = std::move(x); return c; }
    static cond binary(kind k, cond l, cond r) {
        cond c; c.k = k; c.kids.push_back(std::move(l)); c.kids.push_back(std::move(r)); return c;
    }
    static cond negate(cond x) {
        cond c; c.k = kind::neg; c.kids.push_back(std::move(x)); return c;
    }
    static cond compare(kind k, std::string v, expr rhs) {
        cond c; c.k = k; c.var = std::move(v); c.e = std::move(rhs); return c;
    }
    bool operator==(const cond&) const = default;
};

struct assign {
    enum class source_kind { plugin, flag, expression };
    source_kind k = source_kind::expression;
    std::string var;
    plugin_call call;   // plugin source
    std::string flag;   // flag source (GlobalFlag.IsSet)
    expr e;             // expression source
    int line = 0, col = 0;

    // source positions are not part of the term
    bool operator==(const assign& o) const {
        return k == o.k && var == o.var && call == o.call && flag == o.flag && e == o.e;
    }
};

/// `block ::= assign ; block | stmt` — assignments followed by one final
/// statement.  An absent tail stands for the implicit skip of an omitted
/// ELSE branch.
struct block {
    std::vector<assign> assigns;
    enum class tail_kind { none, action, conditional };
    tail_kind tail = tail_kind::none;
    std::string action_flag;      // action: the flag being set
    cond condition;               // conditional
    std::vector<block> branches;  // conditional: exactly {then, else}

    bool operator==(const block&) const = default;
};

struct gtdl_rule {
    std::string name;
    std::string apply_when;
    block body;

    bool operator==(const gtdl_rule&) const = default;
};

// ---------------------------------------------------------------------------
// Concrete syntax
// ---------------------------------------------------------------------------
//
//   [DETECTION] Detection_name = 'D'  Apply_when = "tag"
//   [RULE]
//   v := inPluginCall(f, "arg");      (plain `=` is accepted as well)
//   w = GlobalFlag.IsSet("F");
//   IF v AND w THEN
//       GlobalFlag.Set("D");
//   END IF

namespace detail {

struct token {
    enum class kind { ident, string, number, section, symbol, eof };
    kind k;
    std::string text;
    int line, col;
};

class gtdl_lexer {
public:
    explicit gtdl_lexer(std::string_view text) : text_(text) { advance(); }

    const token& peek() const { return tok_; }
    token take() {
        token t = tok_;
        advance();
        return t;
    }

private:
    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    token tok_;

    char cur() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void bump() {
        if (cur() == '\n') { ++line_; col_ = 1; } else { ++col_; }
        ++pos_;
    }

    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(cur()))) bump();
        int line = line_, col = col_;
        if (pos_ >= text_.size()) {
            tok_ = {token::kind::eof, "", line, col};
            return;
        }
        char c = cur();
        if (c == '[') {
            size_t end = text_.find(']', pos_);
            if (end == std::string_view::npos) throw parse_error("unterminated '[' section", line, col);
            std::string name(text_.substr(pos_ + 1, end - pos_ - 1));
            while (pos_ <= end) bump();
            tok_ = {token::kind::section, name, line, col};
            return;
        }
        if (c == '\'' || c == '"') {
            char q = c;
            bump();
            std::string body;
            while (cur() != q) {
                if (cur() == '\0' || cur() == '\n')
                    throw parse_error("unterminated string literal", line, col);
                body += cur();
                bump();
            }
            bump();
            tok_ = {token::kind::string, body, line, col};
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_') {
                word += cur();
                bump();
            }
            tok_ = {token::kind::ident, word, line, col};
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '.') {
                num += cur();
                bump();
            }
            tok_ = {token::kind::number, num, line, col};
            return;
        }
        auto two = [&](const char* s) {
            return pos_ + 1 < text_.size() && text_[pos_] == s[0] && text_[pos_ + 1] == s[1];
        };
        if (two(":=") || two("==") || two("!=")) {
            std::string sym{text_.substr(pos_, 2)};
            bump(); bump();
            tok_ = {token::kind::symbol, sym, line, col};
            return;
        }
        if (std::string("=;,().").find(c) != std::string::npos) {
            bump();
            tok_ = {token::kind::symbol, std::string(1, c), line, col};
            return;
        }
        throw parse_error(std::string("unexpected character '") + c + "'", line, col);
    }
};

class gtdl_parser {
public:
    explicit gtdl_parser(std::string_view text) : lex_(text) {}

    std::vector<gtdl_rule> parse() {
        std::vector<gtdl_rule> rules;
        expect_section("DETECTION");
        while (true) {
            rules.push_back(parse_rule());
            if (lex_.peek().k == token::kind::eof) break;
            expect_section("DETECTION");
        }
        return rules;
    }

private:
    gtdl_lexer lex_;

    [[noreturn]] void fail(const std::string& msg, const token& t) {
        throw parse_error(msg, t.line, t.col);
    }

    bool peek_ident(const char* word) {
        return lex_.peek().k == token::kind::ident && lex_.peek().text == word;
    }
    bool peek_symbol(const char* sym) {
        return lex_.peek().k == token::kind::symbol && lex_.peek().text == sym;
    }
    token expect_ident(const char* word) {
        token t = lex_.take();
        if (t.k != token::kind::ident || t.text != word)
            fail(std::string("expected '") + word + "', found '" + t.text + "'", t);
        return t;
    }
    token expect_symbol(const char* sym) {
        token t = lex_.take();
        if (t.k != token::kind::symbol || t.text != sym)
            fail(std::string("expected '") + sym + "', found '" + t.text + "'", t);
        return t;
    }
    token expect_string() {
        token t = lex_.take();
        if (t.k != token::kind::string) fail("expected a string literal", t);
        return t;
    }
    void expect_section(const char* name) {
        token t = lex_.take();
        if (t.k != token::kind::section || t.text != name)
            fail(std::string("expected [") + name + "] section", t);
    }

    gtdl_rule parse_rule() {
        gtdl_rule rule;
        expect_ident("Detection_name");
        expect_symbol("=");
        rule.name = expect_string().text;
        if (rule.name.empty()) fail("detection name must be non-empty", lex_.peek());
        if (peek_ident("Apply_when")) {
            lex_.take();
            expect_symbol("=");
            rule.apply_when = expect_string().text;
        }
        expect_section("RULE");
        rule.body = parse_block(false);
        std::set<std::string> assigned;
        check_scope(rule.body, assigned);
        return rule;
    }

    bool at_rule_end() {
        return lex_.peek().k == token::kind::eof || lex_.peek().k == token::kind::section;
    }

    // inside_if: an ELSE / END IF may legitimately terminate the block
    bool at_block_end(bool inside_if) {
        if (at_rule_end()) return true;
        return inside_if && (peek_ident("ELSE") || peek_ident("END"));
    }

    block parse_block(bool inside_if) {
        block b;
        while (true) {
            if (at_block_end(inside_if)) {
                if (!inside_if && b.assigns.empty() && b.tail == block::tail_kind::none)
                    fail("rule body must contain a statement", lex_.peek());
                return b;  // omitted tail reads as skip
            }
            token t = lex_.peek();
            if (t.k == token::kind::ident && t.text == "IF") {
                b.tail = block::tail_kind::conditional;
                parse_if(b);
                if (peek_symbol(";")) lex_.take();
                if (!at_block_end(inside_if))
                    fail("a conditional terminates its block; unexpected trailing statement",
                         lex_.peek());
                return b;
            }
            if (t.k == token::kind::ident && t.text == "GlobalFlag") {
                b.tail = block::tail_kind::action;
                b.action_flag = parse_action();
                if (!at_block_end(inside_if))
                    fail("a detection action terminates its block; unexpected trailing statement",
                         lex_.peek());
                return b;
            }
            if (t.k == token::kind::ident) {
                b.assigns.push_back(parse_assign());
                continue;
            }
            fail("expected an assignment, IF, or GlobalFlag.Set", t);
        }
    }

    void parse_if(block& b) {
        expect_ident("IF");
        b.condition = parse_cond();
        expect_ident("THEN");
        b.branches.push_back(parse_block(true));
        block else_branch;
        if (peek_ident("ELSE")) {
            lex_.take();
            else_branch = parse_block(true);
        }
        b.branches.push_back(std::move(else_branch));
        expect_ident("END");
        expect_ident("IF");
    }

    std::string parse_action() {
        expect_ident("GlobalFlag");
        expect_symbol(".");
        token which = lex_.take();
        if (which.k != token::kind::ident || which.text != "Set")
            fail("expected GlobalFlag.Set(...)", which);
        expect_symbol("(");
        std::string flag = expect_string().text;
        if (flag.empty()) fail("flag name must be non-empty", which);
        expect_symbol(")");
        expect_symbol(";");
        return flag;
    }

    assign parse_assign() {
        token var = lex_.take();
        assign a;
        a.var = var.text;
        a.line = var.line;
        a.col = var.col;
        token op = lex_.take();
        if (op.k != token::kind::symbol || (op.text != "=" && op.text != ":="))
            fail("expected ':=' or '=' in assignment", op);
        token src = lex_.peek();
        if (src.k == token::kind::ident && src.text == "inPluginCall") {
            lex_.take();
            expect_symbol("(");
            token fn = lex_.take();
            if (fn.k != token::kind::ident) fail("expected plugin function name", fn);
            expect_symbol(",");
            std::string arg = expect_string().text;
            expect_symbol(")");
            a.k = assign::source_kind::plugin;
            a.call = {fn.text, arg};
        } else if (src.k == token::kind::ident && src.text == "GlobalFlag") {
            lex_.take();
            expect_symbol(".");
            token which = lex_.take();
            if (which.k != token::kind::ident || which.text != "IsSet")
                fail("expected GlobalFlag.IsSet(...)", which);
            expect_symbol("(");
            a.k = assign::source_kind::flag;
            a.flag = expect_string().text;
            if (a.flag.empty()) fail("flag name must be non-empty", which);
            expect_symbol(")");
        } else {
            a.k = assign::source_kind::expression;
            a.e = parse_expr_atom();
        }
        expect_symbol(";");
        return a;
    }

    expr parse_expr_atom() {
        token t = lex_.take();
        if (t.k == token::kind::number)
            fail("non-Boolean literal '" + t.text + "'", t);
        if (t.k != token::kind::ident) fail("expected true, false, or a variable", t);
        if (t.text == "true") return expr::lit(true);
        if (t.text == "false") return expr::lit(false);
        return expr::ref(t.text);
    }

    // precedence: NOT binds tighter than AND, AND tighter than OR
    cond parse_cond() { return parse_or(); }

    cond parse_or() {
        cond left = parse_and();
        while (peek_ident("OR")) {
            lex_.take();
            left = cond::binary(cond::kind::disj, std::move(left), parse_and());
        }
        return left;
    }

    cond parse_and() {
        cond left = parse_not();
        while (peek_ident("AND")) {
            lex_.take();
            left = cond::binary(cond::kind::conj, std::move(left), parse_not());
        }
        return left;
    }

    cond parse_not() {
        if (peek_ident("NOT")) {
            lex_.take();
            return cond::negate(parse_not());
        }
        return parse_primary();
    }

    cond parse_primary() {
        token t = lex_.take();
        if (t.k == token::kind::number) fail("non-Boolean literal '" + t.text + "'", t);
        if (t.k != token::kind::ident) fail("expected a condition", t);
        if (t.text == "true") return cond::of_expr(expr::lit(true));
        if (t.text == "false") return cond::of_expr(expr::lit(false));
        if (peek_symbol("==") || peek_symbol("!=")) {
            token op = lex_.take();
            expr rhs = parse_expr_atom();
            return cond::compare(op.text == "==" ? cond::kind::eq : cond::kind::ne, t.text,
                                 std::move(rhs));
        }
        return cond::of_var(t.text);
    }

    // every variable read must be assigned earlier in the rule
    void check_scope(const block& b, std::set<std::string> assigned) {
        for (const assign& a : b.assigns) {
            if (a.k == assign::source_kind::expression && a.e.k == expr::kind::variable &&
                !assigned.count(a.e.var))
                throw parse_error("use of unassigned variable '" + a.e.var + "'", a.line, a.col);
            assigned.insert(a.var);
        }
        if (b.tail == block::tail_kind::conditional) {
            check_cond_scope(b.condition, assigned);
            for (const block& br : b.branches) check_scope(br, assigned);
        }
    }

    void check_cond_scope(const cond& c, const std::set<std::string>& assigned) {
        switch (c.k) {
            case cond::kind::var_ref:
                if (!assigned.count(c.var))
                    throw parse_error("use of unassigned variable '" + c.var + "'", 0, 0);
                break;
            case cond::kind::expr_ref:
                if (c.e.k == expr::kind::variable && !assigned.count(c.e.var))
                    throw parse_error("use of unassigned variable '" + c.e.var + "'", 0, 0);
                break;
            case cond::kind::eq:
            case cond::kind::ne:
                if (!assigned.count(c.var))
                    throw parse_error("use of unassigned variable '" + c.var + "'", 0, 0);
                if (c.e.k == expr::kind::variable && !assigned.count(c.e.var))
                    throw parse_error("use of unassigned variable '" + c.e.var + "'", 0, 0);
                break;
            default:
                for (const cond& kid : c.kids) check_cond_scope(kid, assigned);
        }
    }
};

}  // namespace detail

/// Parses a GTDL document into its rules, preserving order.
inline std::vector<gtdl_rule> parse_gtdl(std::string_view text) {
    return detail::gtdl_parser(text).parse();
}

// ---------------------------------------------------------------------------
// Valuation and stores
// ---------------------------------------------------------------------------

using store = std::map<std::string, bool>;

/// External inputs of a rule: the Boolean results of its plugin calls and of
/// its flag reads.
struct valuation {
    std::map<plugin_call, bool> plugins;
    std::map<std::string, bool> flags;

    bool plugin(const plugin_call& c) const {
        auto it = plugins.find(c);
        if (it == plugins.end())
            throw lts_error("valuation is missing plugin call " + c.function + "(" + c.argument + ")");
        return it->second;
    }
    bool flag(const std::string& name) const {
        auto it = flags.find(name);
        if (it == flags.end()) throw lts_error("valuation is missing flag " + name);
        return it->second;
    }
};

inline bool eval(const expr& e, const store& st) {
    if (e.k == expr::kind::literal) return e.value;
    auto it = st.find(e.var);
    if (it == st.end()) throw lts_error("unbound variable '" + e.var + "'");
    return it->second;
}

/// The valuation of conditions: variables through the store, Boolean
/// connectives and (in)equality as expected.
inline bool eval(const cond& c, const store& st) {
    switch (c.k) {
        case cond::kind::var_ref: {
            auto it = st.find(c.var);
            if (it == st.end()) throw lts_error("unbound variable '" + c.var + "'");
            return it->second;
        }
        case cond::kind::expr_ref: return eval(c.e, st);
        case cond::kind::conj: return eval(c.kids[0], st) && eval(c.kids[1], st);
        case cond::kind::disj: return eval(c.kids[0], st) || eval(c.kids[1], st);
        case cond::kind::neg: return !eval(c.kids[0], st);
        case cond::kind::eq: return eval(cond::of_var(c.var), st) == eval(c.e, st);
        case cond::kind::ne: return eval(cond::of_var(c.var), st) != eval(c.e, st);
    }
    throw lts_error("unreachable");
}

// ---------------------------------------------------------------------------
// Flattened programs and the small-step semantics
// ---------------------------------------------------------------------------

struct prog_node {
    enum class op { assign_plugin, assign_flag, assign_expr, branch, emit, done };
    op k = op::done;
    std::string var;
    plugin_call call;
    std::string flag;  // assign_flag: flag read; emit: flag set
    expr e;
    cond condition;
    int next = -1;       // successor (branch: then-successor)
    int else_next = -1;  // branch: else-successor
};

struct program {
    std::vector<prog_node> nodes;  // node 0 is the shared completion state
    int entry = 0;
    int statement_count = 0;

    const prog_node& at(int i) const { return nodes.at(i); }
};

namespace detail {

inline int compile_block(const block& b, program& p);

inline int compile_tail(const block& b, program& p) {
    switch (b.tail) {
        case block::tail_kind::none:
            return 0;  // implicit skip completes the run
        case block::tail_kind::action: {
            prog_node n;
            n.k = prog_node::op::emit;
            n.flag = b.action_flag;
            n.next = 0;  // a detection action halts the rule
            p.nodes.push_back(std::move(n));
            p.statement_count++;
            return static_cast<int>(p.nodes.size()) - 1;
        }
        case block::tail_kind::conditional: {
            int then_e = compile_block(b.branches[0], p);
            int else_e = compile_block(b.branches[1], p);
            prog_node n;
            n.k = prog_node::op::branch;
            n.condition = b.condition;
            n.next = then_e;
            n.else_next = else_e;
            p.nodes.push_back(std::move(n));
            p.statement_count++;
            return static_cast<int>(p.nodes.size()) - 1;
        }
    }
    throw lts_error("unreachable");
}

inline int compile_block(const block& b, program& p) {
    int entry = compile_tail(b, p);
    for (auto it = b.assigns.rbegin(); it != b.assigns.rend(); ++it) {
        prog_node n;
        switch (it->k) {
            case assign::source_kind::plugin: n.k = prog_node::op::assign_plugin; n.call = it->call; break;
            case assign::source_kind::flag: n.k = prog_node::op::assign_flag; n.flag = it->flag; break;
            case assign::source_kind::expression: n.k = prog_node::op::assign_expr; n.e = it->e; break;
        }
        n.var = it->var;
        n.next = entry;
        p.nodes.push_back(std::move(n));
        p.statement_count++;
        entry = static_cast<int>(p.nodes.size()) - 1;
    }
    return entry;
}

}  // namespace detail

inline program compile_rule(const gtdl_rule& rule) {
    program p;
    p.nodes.push_back({});  // node 0: halt / completion
    p.entry = detail::compile_block(rule.body, p);
    return p;
}

/// A configuration pairs the remaining command with the variable store.
struct configuration {
    int node = 0;
    store st;
};

inline bool complete(const program& p, const configuration& c) {
    (void)p;
    return c.node == 0;
}

struct sos_step {
    std::string label;  // empty for a silent step, otherwise the emitted flag
    configuration next;
    bool silent() const { return label.empty(); }
};

/// One small step of a single rule under a fixed valuation of its inputs.
/// Exactly one rule applies to every non-completed configuration; completed
/// configurations have no successor and yield nullopt.
inline std::optional<sos_step> step(const program& p, const configuration& c, const valuation& val) {
    const prog_node& n = p.at(c.node);
    sos_step out;
    out.next.st = c.st;
    switch (n.k) {
        case prog_node::op::done:
            return std::nullopt;
        case prog_node::op::assign_plugin:
            out.next.st[n.var] = val.plugin(n.call);
            out.next.node = n.next;
            return out;
        case prog_node::op::assign_flag:
            out.next.st[n.var] = val.flag(n.flag);
            out.next.node = n.next;
            return out;
        case prog_node::op::assign_expr:
            out.next.st[n.var] = eval(n.e, c.st);
            out.next.node = n.next;
            return out;
        case prog_node::op::branch:
            out.next.node = eval(n.condition, c.st) ? n.next : n.else_next;
            return out;
        case prog_node::op::emit:
            out.label = n.flag;
            out.next.node = n.next;
            return out;
    }
    throw lts_error("unreachable");
}

struct rule_run {
    std::vector<std::string> labels;  // one entry per step, "" for silent
    int steps = 0;
    std::optional<std::string> detection() const {
        for (const std::string& l : labels)
            if (!l.empty()) return l;
        return std::nullopt;
    }
};

/// Runs a rule to completion under the valuation.
inline rule_run run_rule(const program& p, const valuation& val) {
    rule_run run;
    configuration c{p.entry, {}};
    while (auto s = step(p, c, val)) {
        run.labels.push_back(s->label);
        run.steps++;
        c = s->next;
        if (run.steps > p.statement_count + 1)
            throw lts_error("rule run exceeded its statement count");  // cannot happen
    }
    return run;
}

// ---------------------------------------------------------------------------
// Rule inputs
// ---------------------------------------------------------------------------

struct rule_inputs {
    std::vector<plugin_call> plugins;     // first-appearance order, unique
    std::vector<std::string> flag_reads;  // first-appearance order, unique

    int count() const { return static_cast<int>(plugins.size() + flag_reads.size()); }

    bool covers(const rule_inputs& other) const {
        for (const plugin_call& c : other.plugins)
            if (std::find(plugins.begin(), plugins.end(), c) == plugins.end()) return false;
        for (const std::string& f : other.flag_reads)
            if (std::find(flag_reads.begin(), flag_reads.end(), f) == flag_reads.end()) return false;
        return true;
    }
};

namespace detail {

inline void collect_inputs_block(const block& b, rule_inputs& out) {
    for (const assign& a : b.assigns) {
        if (a.k == assign::source_kind::plugin &&
            std::find(out.plugins.begin(), out.plugins.end(), a.call) == out.plugins.end())
            out.plugins.push_back(a.call);
        if (a.k == assign::source_kind::flag &&
            std::find(out.flag_reads.begin(), out.flag_reads.end(), a.flag) == out.flag_reads.end())
            out.flag_reads.push_back(a.flag);
    }
    if (b.tail == block::tail_kind::conditional)
        for (const block& br : b.branches) collect_inputs_block(br, out);
}

inline void collect_flags_set(const block& b, std::vector<std::string>& out) {
    if (b.tail == block::tail_kind::action) {
        if (std::find(out.begin(), out.end(), b.action_flag) == out.end())
            out.push_back(b.action_flag);
    } else if (b.tail == block::tail_kind::conditional) {
        for (const block& br : b.branches) collect_flags_set(br, out);
    }
}

}  // namespace detail

inline rule_inputs collect_inputs(const gtdl_rule& rule) {
    rule_inputs out;
    detail::collect_inputs_block(rule.body, out);
    return out;
}

/// Flags this rule can set, in first-appearance order.
inline std::vector<std::string> flags_set(const gtdl_rule& rule) {
    std::vector<std::string> out;
    detail::collect_flags_set(rule.body, out);
    return out;
}

// ---------------------------------------------------------------------------
// Single-rule compilation (exhaustive input branching)
// ---------------------------------------------------------------------------

/// LTS of one rule in isolation.  The initial state branches silently over
/// every valuation of the rule's inputs; each branch is the deterministic
/// SOS run under that valuation.  Weak traces are {flag} for valuations
/// where the rule detects and {ε} otherwise.
inline lts rule_to_lts(const gtdl_rule& rule, const rule_inputs& universe) {
    rule_inputs own = collect_inputs(rule);
    if (!universe.covers(own)) {
        for (const plugin_call& c : own.plugins)
            if (std::find(universe.plugins.begin(), universe.plugins.end(), c) ==
                universe.plugins.end())
                throw lts_error("universe is missing plugin call " + c.function + "(" +
                                c.argument + ")");
        throw lts_error("universe is missing a flag read of rule " + rule.name);
    }
    int k = own.count();
    if (k > 20) throw lts_error("too many rule inputs for exhaustive branching");

    program p = compile_rule(rule);
    lts m(1);
    for (std::uint32_t v = 0; v < (1u << k); ++v) {
        valuation val;
        int bit = 0;
        for (const plugin_call& c : own.plugins) val.plugins[c] = (v >> bit++) & 1;
        for (const std::string& f : own.flag_reads) val.flags[f] = (v >> bit++) & 1;

        int cur = 0;
        if (k > 0) {
            int branch_start = m.num_states++;
            m.terminal.push_back(0);
            m.add_transition(0, tau_id, branch_start);
            cur = branch_start;
        }
        configuration c{p.entry, {}};
        while (auto s = step(p, c, val)) {
            int nxt = m.num_states++;
            m.terminal.push_back(0);
            m.add_transition(cur, s->silent() ? tau_id : m.intern(s->label), nxt);
            cur = nxt;
            c = s->next;
        }
        m.mark_terminal(cur);
    }
    m.finalize();
    return m;
}

inline lts rule_to_lts(const gtdl_rule& rule) { return rule_to_lts(rule, collect_inputs(rule)); }

// ---------------------------------------------------------------------------
// Engine composition
// ---------------------------------------------------------------------------

/// Flag wiring of an engine: optional renaming of flag names onto the shared
/// observable alphabet, plus flags declared as external (set by the
/// environment rather than by any rule in the set).
struct engine_wiring {
    std::map<std::string, std::string> rename;
    std::set<std::string> externals;

    std::string wire(const std::string& flag) const {
        auto it = rename.find(flag);
        return it == rename.end() ? flag : it->second;
    }
};

namespace detail {

// Engine-side state of one rule: flag reads awaited, flag reads already
// satisfied, the current program node and the store.  Consecutive flag-read
// assignments are gathered into one await set, so the reads synchronize in
// any order; a repeated read of an already-observed flag is immediate (the
// global flag store is monotone).
struct comp_key {
    std::vector<std::string> pending;
    std::vector<std::string> observed;
    int node = 0;
    std::vector<std::pair<std::string, bool>> vars;
    auto operator<=>(const comp_key&) const = default;
};

inline store to_store(const std::vector<std::pair<std::string, bool>>& vars) {
    return store(vars.begin(), vars.end());
}
inline std::vector<std::pair<std::string, bool>> from_store(const store& st) {
    return {st.begin(), st.end()};
}

inline void insert_sorted(std::vector<std::string>& v, const std::string& s) {
    auto it = std::lower_bound(v.begin(), v.end(), s);
    if (it == v.end() || *it != s) v.insert(it, s);
}

inline comp_key normalize_key(comp_key key, const program& p, const engine_wiring& wiring) {
    store st = to_store(key.vars);
    while (p.at(key.node).k == prog_node::op::assign_flag) {
        const prog_node& n = p.at(key.node);
        std::string wire = wiring.wire(n.flag);
        st[n.var] = true;  // the await completes exactly when the flag is set
        if (std::find(key.observed.begin(), key.observed.end(), wire) == key.observed.end()) {
            insert_sorted(key.pending, wire);
            insert_sorted(key.observed, wire);
        }
        key.node = n.next;
    }
    if (p.at(key.node).k == prog_node::op::done && key.pending.empty()) {
        key.observed.clear();  // completed states are indistinguishable
        st.clear();
    }
    key.vars = from_store(st);
    return key;
}

/// Engine-side LTS of one rule: plugin inputs branch silently at their
/// assignment, flag reads become synchronization actions, everything else
/// is a silent step.
inline lts engine_component(const gtdl_rule& rule, const engine_wiring& wiring) {
    program p = compile_rule(rule);
    std::map<comp_key, int> index;
    std::vector<comp_key> keys;
    auto state_of = [&](comp_key key) {
        auto [it, inserted] = index.try_emplace(std::move(key), static_cast<int>(keys.size()));
        if (inserted) keys.push_back(it->first);
        return it->second;
    };

    lts m(1);
    m.num_states = 0;
    m.terminal.clear();
    state_of(normalize_key({{}, {}, p.entry, {}}, p, wiring));

    for (int cur = 0; cur < static_cast<int>(keys.size()); ++cur) {
        const comp_key key = keys[cur];
        while (static_cast<int>(m.terminal.size()) <= cur) m.terminal.push_back(0);

        if (!key.pending.empty()) {
            for (const std::string& f : key.pending) {
                comp_key nxt = key;
                nxt.pending.erase(std::find(nxt.pending.begin(), nxt.pending.end(), f));
                nxt = normalize_key(std::move(nxt), p, wiring);
                m.add_transition(cur, m.intern(f), state_of(std::move(nxt)));
            }
            continue;
        }

        const prog_node& n = p.at(key.node);
        store st = to_store(key.vars);
        switch (n.k) {
            case prog_node::op::done:
                m.terminal[cur] = 1;
                break;
            case prog_node::op::assign_plugin:
                for (bool value : {false, true}) {
                    store nst = st;
                    nst[n.var] = value;
                    comp_key nxt{{}, key.observed, n.next, from_store(nst)};
                    m.add_transition(cur, tau_id, state_of(normalize_key(std::move(nxt), p, wiring)));
                }
                break;
            case prog_node::op::assign_expr: {
                store nst = st;
                nst[n.var] = eval(n.e, st);
                comp_key nxt{{}, key.observed, n.next, from_store(nst)};
                m.add_transition(cur, tau_id, state_of(normalize_key(std::move(nxt), p, wiring)));
                break;
            }
            case prog_node::op::branch: {
                comp_key nxt{{}, key.observed, eval(n.condition, st) ? n.next : n.else_next,
                             key.vars};
                m.add_transition(cur, tau_id, state_of(normalize_key(std::move(nxt), p, wiring)));
                break;
            }
            case prog_node::op::emit: {
                comp_key nxt{{}, key.observed, n.next, key.vars};
                m.add_transition(cur, m.intern(wiring.wire(n.flag)),
                                 state_of(normalize_key(std::move(nxt), p, wiring)));
                break;
            }
            case prog_node::op::assign_flag:
                throw lts_error("unreachable: flag reads are normalized away");
        }
    }
    m.num_states = static_cast<int>(keys.size());
    m.terminal.resize(m.num_states, 0);
    m.finalize();
    return m;
}

}  // namespace detail

/// Composes a rule set the way the detection engine runs it: rules in
/// parallel, with a flag writer and all its readers joined in a multiway
/// rendezvous on the flag's observable action.  Externally declared flags
/// contribute an environment component that performs the flag once.  States
/// that cannot reach completion are pruned; the whole composition is
/// unrolled `loop_bound` times, gluing each round's completion states to the
/// next round.
inline lts engine_to_lts(const std::vector<gtdl_rule>& rules, const engine_wiring& wiring = {},
                         int loop_bound = 1) {
    if (rules.empty()) throw lts_error("engine requires at least one rule");
    if (loop_bound < 1) throw lts_error("loop bound must be at least 1");

    std::vector<lts> components;
    components.reserve(rules.size() + wiring.externals.size());
    std::map<std::string, std::vector<int>> readers, writers;
    for (size_t i = 0; i < rules.size(); ++i) {
        components.push_back(detail::engine_component(rules[i], wiring));
        for (const std::string& f : collect_inputs(rules[i]).flag_reads)
            readers[wiring.wire(f)].push_back(static_cast<int>(i));
        for (const std::string& f : flags_set(rules[i]))
            writers[wiring.wire(f)].push_back(static_cast<int>(i));
    }
    for (const std::string& f : wiring.externals) {
        lts env(2);
        env.add_transition(0, wiring.wire(f), 1);
        env.mark_terminal(1);
        env.finalize();
        writers[wiring.wire(f)].push_back(static_cast<int>(components.size()));
        components.push_back(std::move(env));
    }

    sync_table sync;
    for (const auto& [wire, reading] : readers) {
        auto wit = writers.find(wire);
        if (wit == writers.end())
            throw lts_error("flag '" + wire +
                            "' is read but never set and not declared external");
        std::vector<int> group = reading;
        group.insert(group.end(), wit->second.begin(), wit->second.end());
        sync.groups[wire] = std::move(group);
    }

    lts round = prune_dead_states(parallel(components, sync));
    if (loop_bound == 1) return round;
    return sequence(std::vector<lts>(loop_bound, round));
}

// ---------------------------------------------------------------------------
// Concrete-syntax printer
// ---------------------------------------------------------------------------

namespace detail {

inline std::string quoted_arg(const std::string& s) {
    if (s.find('"') != std::string::npos || s.find('\n') != std::string::npos)
        throw lts_error("string '" + s + "' is not expressible in the rule syntax");
    return "\"" + s + "\"";
}

// 0 = disjunction, 1 = conjunction, 2 = negation / atoms; the grammar has no
// parentheses, so a condition nesting a looser operator under a tighter one
// cannot be printed
inline int cond_rank(const cond& c) {
    switch (c.k) {
        case cond::kind::disj: return 0;
        case cond::kind::conj: return 1;
        default: return 2;
    }
}

inline std::string print_expr(const expr& e) {
    if (e.k == expr::kind::variable) return e.var;
    return e.value ? "true" : "false";
}

inline std::string print_cond(const cond& c) {
    auto child = [](const cond& kid, int min_rank) {
        if (cond_rank(kid) < min_rank)
            throw lts_error("condition is not expressible without parentheses");
        return print_cond(kid);
    };
    switch (c.k) {
        case cond::kind::var_ref: return c.var;
        case cond::kind::expr_ref: return print_expr(c.e);
        case cond::kind::conj: return child(c.kids[0], 1) + " AND " + child(c.kids[1], 2);
        case cond::kind::disj: return child(c.kids[0], 0) + " OR " + child(c.kids[1], 1);
        case cond::kind::neg: return "NOT " + child(c.kids[0], 2);
        case cond::kind::eq: return c.var + " == " + print_expr(c.e);
        case cond::kind::ne: return c.var + " != " + print_expr(c.e);
    }
    throw lts_error("unreachable");
}

inline void print_block(const block& b, std::string& out, int indent) {
    std::string pad(indent, ' ');
    for (const assign& a : b.assigns) {
        out += pad + a.var + " := ";
        switch (a.k) {
            case assign::source_kind::plugin:
                out += "inPluginCall(" + a.call.function + ", " + quoted_arg(a.call.argument) + ")";
                break;
            case assign::source_kind::flag:
                out += "GlobalFlag.IsSet(" + quoted_arg(a.flag) + ")";
                break;
            case assign::source_kind::expression:
                out += print_expr(a.e);
                break;
        }
        out += ";\n";
    }
    switch (b.tail) {
        case block::tail_kind::none:
            break;
        case block::tail_kind::action:
            out += pad + "GlobalFlag.Set(" + quoted_arg(b.action_flag) + ");\n";
            break;
        case block::tail_kind::conditional: {
            out += pad + "IF " + print_cond(b.condition) + " THEN\n";
            print_block(b.branches[0], out, indent + 4);
            const block& els = b.branches[1];
            if (!els.assigns.empty() || els.tail != block::tail_kind::none) {
                out += pad + "ELSE\n";
                print_block(els, out, indent + 4);
            }
            out += pad + "END IF\n";
            break;
        }
    }
}

}  // namespace detail

/// Renders rules back to concrete syntax; `parse_gtdl . print_gtdl` is the
/// identity on the term.  Conditions that the parenthesis-free grammar
/// cannot express are rejected.
inline std::string print_gtdl(const std::vector<gtdl_rule>& rules) {
    std::string out;
    for (size_t i = 0; i < rules.size(); ++i) {
        if (i) out += "\n";
        out += "[DETECTION] Detection_name = '" + rules[i].name + "'";
        if (!rules[i].apply_when.empty())
            out += " Apply_when = " + detail::quoted_arg(rules[i].apply_when);
        out += "\n[RULE]\n";
        detail::print_block(rules[i].body, out, 0);
    }
    return out;
}

}  // namespace ltscheck
