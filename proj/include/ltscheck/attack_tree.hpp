// attack_tree.hpp — attack trees: file format, LTS compilation, trace oracle.
//
// Trees are finite terms over LEAF / OR / AND / SAND.  Two independent
// semantics are provided: `tree_to_lts` compiles through the LTS composition
// operators, while `oracle_traces` computes the trace set purely
// set-theoretically (union / interleaving / concatenation) without touching
// any LTS code.  The two must agree on every tree; the test suites check
// exactly that.

#pragma once

#include "ltscheck/lts.hpp"

#include <cctype>
#include <memory>

namespace ltscheck {

// ---------------------------------------------------------------------------
// Tree terms
// ---------------------------------------------------------------------------

enum class node_kind { leaf, or_node, and_node, sand_node };

struct attack_tree {
    node_kind kind = node_kind::leaf;
    std::string action;                 // leaf nodes only
    std::vector<attack_tree> children;  // composite nodes, ordered (SAND cares)

    static attack_tree leaf(std::string action) {
        if (action.empty()) throw lts_error("leaf action must be non-empty");
        attack_tree t;
        t.kind = node_kind::leaf;
        t.action = std::move(action);
        return t;
    }
    static attack_tree composite(node_kind kind, std::vector<attack_tree> children) {
        if (kind == node_kind::leaf) throw lts_error("composite node kind expected");
        if (children.size() < 2)
            throw lts_error("composite nodes require at least 2 children");
        attack_tree t;
        t.kind = kind;
        t.children = std::move(children);
        return t;
    }
    static attack_tree any_of(std::vector<attack_tree> c) { return composite(node_kind::or_node, std::move(c)); }
    static attack_tree all_of(std::vector<attack_tree> c) { return composite(node_kind::and_node, std::move(c)); }
    static attack_tree ordered(std::vector<attack_tree> c) { return composite(node_kind::sand_node, std::move(c)); }

    int leaf_count() const {
        if (kind == node_kind::leaf) return 1;
        int n = 0;
        for (const attack_tree& c : children) n += c.leaf_count();
        return n;
    }
};

struct tree_document {
    attack_tree root;
    std::string name;  // optional top-level name
};

// ---------------------------------------------------------------------------
// Tree file reader
// ---------------------------------------------------------------------------
//
// The format is a small structured-text schema: every node is a mapping with
// exactly one key among `leaf` (string), `or` / `and` / `sand` (list of
// nodes); the top level may additionally carry `name`.  Both block style
// (indentation, `- ` list items) and inline flow style (`{leaf: a}`,
// `[{leaf: a}, {leaf: b}]`) are accepted.  This is a schema-specific reader,
// not a general YAML implementation.

namespace detail {

struct doc_value {
    enum class kind { scalar, mapping, sequence } k = kind::scalar;
    std::string scalar;
    std::vector<std::pair<std::string, doc_value>> entries;
    std::vector<doc_value> items;
    int line = 0;
};

struct doc_line {
    int indent;
    std::string text;  // content without indentation
    int line_no;
};

class doc_parser {
public:
    explicit doc_parser(std::string_view text) {
        int line_no = 0;
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            std::string_view raw = text.substr(pos, eol - pos);
            ++line_no;
            pos = eol + 1;
            std::string cooked = strip_comment(raw);
            size_t first = cooked.find_first_not_of(' ');
            if (first == std::string::npos) {
                if (pos > text.size()) break;
                continue;
            }
            if (cooked.find('\t') != std::string::npos && cooked.find('\t') < first + 1)
                throw parse_error("tab characters are not allowed in indentation", line_no);
            lines_.push_back({static_cast<int>(first), trim(cooked.substr(first)), line_no});
            if (pos > text.size()) break;
        }
    }

    doc_value parse_document() {
        if (lines_.empty()) throw parse_error("empty document", 1);
        doc_value v = parse_value(lines_.front().indent);
        if (cur_ < lines_.size())
            throw parse_error("unexpected trailing content", lines_[cur_].line_no);
        return v;
    }

private:
    std::vector<doc_line> lines_;
    size_t cur_ = 0;

    static std::string trim(std::string s) {
        size_t b = s.find_first_not_of(" \r");
        size_t e = s.find_last_not_of(" \r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }

    // strips a '#' comment that is not inside quotes
    static std::string strip_comment(std::string_view raw) {
        std::string out;
        char quote = 0;
        for (char c : raw) {
            if (quote) {
                if (c == quote) quote = 0;
            } else if (c == '\'' || c == '"') {
                quote = c;
            } else if (c == '#') {
                break;
            }
            out += c;
        }
        return out;
    }

    bool at_end() const { return cur_ >= lines_.size(); }
    const doc_line& here() const { return lines_[cur_]; }

    doc_value parse_value(int indent) {
        const doc_line& l = here();
        if (l.text[0] == '{' || l.text[0] == '[') {
            doc_value v = parse_flow_line(l.text, l.line_no);
            ++cur_;
            return v;
        }
        if (l.text == "-" || l.text.rfind("- ", 0) == 0) return parse_sequence(indent);
        return parse_mapping(indent);
    }

    doc_value parse_sequence(int indent) {
        doc_value seq;
        seq.k = doc_value::kind::sequence;
        seq.line = here().line_no;
        while (!at_end() && here().indent == indent &&
               (here().text == "-" || here().text.rfind("- ", 0) == 0)) {
            doc_line item = here();
            if (item.text == "-") {
                ++cur_;
                if (at_end() || here().indent <= indent)
                    throw parse_error("empty sequence item", item.line_no);
                seq.items.push_back(parse_value(here().indent));
            } else {
                // rewrite the dash line as content two columns deeper
                lines_[cur_].indent = indent + 2;
                lines_[cur_].text = trim(item.text.substr(2));
                seq.items.push_back(parse_value(indent + 2));
            }
        }
        return seq;
    }

    doc_value parse_mapping(int indent) {
        doc_value map;
        map.k = doc_value::kind::mapping;
        map.line = here().line_no;
        while (!at_end() && here().indent == indent) {
            const doc_line l = here();
            if (l.text == "-" || l.text.rfind("- ", 0) == 0) break;
            auto [key, rest] = split_entry(l.text, l.line_no);
            ++cur_;
            doc_value val;
            if (!rest.empty()) {
                if (rest[0] == '{' || rest[0] == '[') {
                    val = parse_flow_line(rest, l.line_no);
                } else {
                    val.k = doc_value::kind::scalar;
                    val.scalar = unquote(rest, l.line_no);
                    val.line = l.line_no;
                }
            } else {
                if (at_end() || here().indent <= indent)
                    throw parse_error("key '" + key + "' has no value", l.line_no);
                val = parse_value(here().indent);
            }
            map.entries.emplace_back(key, std::move(val));
        }
        if (map.entries.empty())
            throw parse_error("expected a 'key:' mapping entry", here().line_no);
        return map;
    }

    static std::pair<std::string, std::string> split_entry(const std::string& text, int line_no) {
        size_t colon = std::string::npos;
        char quote = 0;
        for (size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (quote) {
                if (c == quote) quote = 0;
            } else if (c == '\'' || c == '"') {
                quote = c;
            } else if (c == ':' && (i + 1 == text.size() || text[i + 1] == ' ')) {
                colon = i;
                break;
            }
        }
        if (colon == std::string::npos)
            throw parse_error("expected 'key: value'", line_no);
        std::string key = trim(text.substr(0, colon));
        std::string rest = colon + 1 < text.size() ? trim(text.substr(colon + 1)) : std::string();
        if (key.empty()) throw parse_error("empty mapping key", line_no);
        return {unquote(key, line_no), rest};
    }

    static std::string unquote(const std::string& s, int line_no) {
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'')) {
            if (s.back() != s.front())
                throw parse_error("unterminated quoted string", line_no);
            std::string body = s.substr(1, s.size() - 2);
            if (s.front() == '"') {
                std::string out;
                for (size_t i = 0; i < body.size(); ++i) {
                    if (body[i] == '\\' && i + 1 < body.size()) out += body[++i];
                    else out += body[i];
                }
                return out;
            }
            return body;
        }
        return s;
    }

    // flow syntax: {k: v, ...} / [v, ...] / scalar, complete on one line
    doc_value parse_flow_line(const std::string& text, int line_no) {
        size_t pos = 0;
        doc_value v = parse_flow(text, pos, line_no);
        skip_spaces(text, pos);
        if (pos != text.size())
            throw parse_error("trailing characters after flow value", line_no);
        return v;
    }

    static void skip_spaces(const std::string& s, size_t& pos) {
        while (pos < s.size() && s[pos] == ' ') ++pos;
    }

    doc_value parse_flow(const std::string& s, size_t& pos, int line_no) {
        skip_spaces(s, pos);
        if (pos >= s.size()) throw parse_error("unexpected end of flow value", line_no);
        doc_value v;
        v.line = line_no;
        if (s[pos] == '{') {
            ++pos;
            v.k = doc_value::kind::mapping;
            skip_spaces(s, pos);
            if (pos < s.size() && s[pos] == '}') { ++pos; return v; }
            while (true) {
                std::string key = parse_flow_scalar(s, pos, line_no, true);
                skip_spaces(s, pos);
                if (pos >= s.size() || s[pos] != ':')
                    throw parse_error("expected ':' in flow mapping", line_no);
                ++pos;
                doc_value val = parse_flow(s, pos, line_no);
                v.entries.emplace_back(key, std::move(val));
                skip_spaces(s, pos);
                if (pos < s.size() && s[pos] == ',') { ++pos; continue; }
                if (pos < s.size() && s[pos] == '}') { ++pos; break; }
                throw parse_error("expected ',' or '}' in flow mapping", line_no);
            }
            return v;
        }
        if (s[pos] == '[') {
            ++pos;
            v.k = doc_value::kind::sequence;
            skip_spaces(s, pos);
            if (pos < s.size() && s[pos] == ']') { ++pos; return v; }
            while (true) {
                v.items.push_back(parse_flow(s, pos, line_no));
                skip_spaces(s, pos);
                if (pos < s.size() && s[pos] == ',') { ++pos; continue; }
                if (pos < s.size() && s[pos] == ']') { ++pos; break; }
                throw parse_error("expected ',' or ']' in flow sequence", line_no);
            }
            return v;
        }
        v.k = doc_value::kind::scalar;
        v.scalar = parse_flow_scalar(s, pos, line_no, false);
        return v;
    }

    static std::string parse_flow_scalar(const std::string& s, size_t& pos, int line_no, bool key) {
        skip_spaces(s, pos);
        if (pos < s.size() && (s[pos] == '"' || s[pos] == '\'')) {
            char q = s[pos++];
            std::string out;
            while (pos < s.size() && s[pos] != q) {
                if (q == '"' && s[pos] == '\\' && pos + 1 < s.size()) ++pos;
                out += s[pos++];
            }
            if (pos >= s.size()) throw parse_error("unterminated quoted string", line_no);
            ++pos;
            return out;
        }
        size_t start = pos;
        while (pos < s.size() && s[pos] != ',' && s[pos] != '}' && s[pos] != ']' &&
               !(key && s[pos] == ':'))
            ++pos;
        std::string out = s.substr(start, pos - start);
        while (!out.empty() && out.back() == ' ') out.pop_back();
        if (out.empty()) throw parse_error("empty flow scalar", line_no);
        return out;
    }
};

inline attack_tree interpret_tree_node(const doc_value& v) {
    if (v.k != doc_value::kind::mapping)
        throw parse_error("tree node must be a mapping with one key", v.line);
    if (v.entries.size() != 1)
        throw parse_error("tree node must have exactly one key", v.line);
    const auto& [key, val] = v.entries.front();
    if (key == "leaf") {
        if (val.k != doc_value::kind::scalar || val.scalar.empty())
            throw parse_error("leaf requires a non-empty action name", val.line);
        return attack_tree::leaf(val.scalar);
    }
    node_kind kind;
    if (key == "or") kind = node_kind::or_node;
    else if (key == "and") kind = node_kind::and_node;
    else if (key == "sand") kind = node_kind::sand_node;
    else throw parse_error("unknown node kind '" + key + "'", v.line);
    if (val.k != doc_value::kind::sequence)
        throw parse_error("'" + key + "' requires a list of child nodes", val.line);
    if (val.items.size() < 2)
        throw parse_error("'" + key + "' requires at least 2 children", val.line);
    std::vector<attack_tree> children;
    children.reserve(val.items.size());
    for (const doc_value& item : val.items) children.push_back(interpret_tree_node(item));
    return attack_tree::composite(kind, std::move(children));
}

}  // namespace detail

/// Parses a tree document.  Child order is preserved (SAND is
/// order-sensitive).
inline tree_document parse_tree(std::string_view text) {
    detail::doc_parser p(text);
    detail::doc_value doc = p.parse_document();
    tree_document out;
    if (doc.k == detail::doc_value::kind::mapping) {
        detail::doc_value node = doc;
        node.entries.clear();
        for (auto& [key, val] : doc.entries) {
            if (key == "name") {
                if (val.k != detail::doc_value::kind::scalar)
                    throw parse_error("'name' must be a string", val.line);
                out.name = val.scalar;
            } else {
                node.entries.emplace_back(key, val);
            }
        }
        out.root = detail::interpret_tree_node(node);
    } else {
        out.root = detail::interpret_tree_node(doc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical printer (parse ∘ pretty_print = identity on the term)
// ---------------------------------------------------------------------------

namespace detail {

inline bool plain_scalar_ok(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
              c == '.' || c == '%'))
            return false;
    return true;
}

inline std::string quote_scalar(const std::string& s) {
    if (plain_scalar_ok(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

inline void print_node(const attack_tree& t, std::string& out, int indent) {
    std::string pad(indent, ' ');
    switch (t.kind) {
        case node_kind::leaf:
            out += "leaf: " + quote_scalar(t.action) + "\n";
            return;
        case node_kind::or_node: out += "or:\n"; break;
        case node_kind::and_node: out += "and:\n"; break;
        case node_kind::sand_node: out += "sand:\n"; break;
    }
    for (const attack_tree& c : t.children) {
        out += pad + "  - ";
        print_node(c, out, indent + 4);
    }
}

}  // namespace detail

inline std::string pretty_print(const attack_tree& t, const std::string& name = {}) {
    std::string out;
    if (!name.empty()) out += "name: " + detail::quote_scalar(name) + "\n";
    detail::print_node(t, out, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Compilation to an LTS
// ---------------------------------------------------------------------------

/// LEAF -> make_leaf, OR -> choice, AND -> shuffle, SAND -> sequence,
/// recursively.  The result never contains a silent step.
inline lts tree_to_lts(const attack_tree& t) {
    switch (t.kind) {
        case node_kind::leaf: return make_leaf(t.action);
        default: break;
    }
    std::vector<lts> parts;
    parts.reserve(t.children.size());
    for (const attack_tree& c : t.children) parts.push_back(tree_to_lts(c));
    switch (t.kind) {
        case node_kind::or_node: return choice(parts);
        case node_kind::and_node: return shuffle(parts);
        case node_kind::sand_node: return sequence(parts);
        default: throw lts_error("unreachable");
    }
}

// ---------------------------------------------------------------------------
// Independent trace oracle
// ---------------------------------------------------------------------------

namespace detail {

inline void merge_traces(const trace& u, size_t i, const trace& v, size_t j, trace& cur,
                         trace_set& out) {
    if (i == u.size() && j == v.size()) {
        out.insert(cur);
        return;
    }
    if (i < u.size()) {
        cur.push_back(u[i]);
        merge_traces(u, i + 1, v, j, cur, out);
        cur.pop_back();
    }
    if (j < v.size()) {
        cur.push_back(v[j]);
        merge_traces(u, i, v, j + 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

/// All interleavings of two traces that preserve each trace's internal order.
inline trace_set shuffle_traces(const trace& u, const trace& v) {
    trace_set out;
    trace cur;
    cur.reserve(u.size() + v.size());
    detail::merge_traces(u, 0, v, 0, cur, out);
    return out;
}

inline trace_set shuffle_trace_sets(const trace_set& a, const trace_set& b) {
    trace_set out;
    for (const trace& u : a)
        for (const trace& v : b) {
            trace_set merged = shuffle_traces(u, v);
            out.insert(merged.begin(), merged.end());
        }
    return out;
}

inline trace_set concat_trace_sets(const trace_set& a, const trace_set& b) {
    trace_set out;
    for (const trace& u : a)
        for (const trace& v : b) {
            trace w = u;
            w.insert(w.end(), v.begin(), v.end());
            out.insert(std::move(w));
        }
    return out;
}

/// The trace set of a tree computed directly from the inductive definition:
/// union for OR, pairwise interleaving closure folded left for AND,
/// concatenation for SAND.  Never touches LTS code; serves as the
/// independent oracle for `tree_to_lts`.
inline trace_set oracle_traces(const attack_tree& t) {
    switch (t.kind) {
        case node_kind::leaf:
            return {trace{t.action}};
        case node_kind::or_node: {
            trace_set out;
            for (const attack_tree& c : t.children) {
                trace_set s = oracle_traces(c);
                out.insert(s.begin(), s.end());
            }
            return out;
        }
        case node_kind::and_node: {
            trace_set acc = oracle_traces(t.children.front());
            for (size_t i = 1; i < t.children.size(); ++i)
                acc = shuffle_trace_sets(acc, oracle_traces(t.children[i]));
            return acc;
        }
        case node_kind::sand_node: {
            trace_set acc = oracle_traces(t.children.front());
            for (size_t i = 1; i < t.children.size(); ++i)
                acc = concat_trace_sets(acc, oracle_traces(t.children[i]));
            return acc;
        }
    }
    throw lts_error("unreachable");
}

}  // namespace ltscheck
