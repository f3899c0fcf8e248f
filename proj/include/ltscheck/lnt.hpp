// lnt.hpp — LNT source emission for attack trees and detection rules.
//
// Text generation only: the output is meant for optional cross-checking with
// external process-algebra tooling and is never executed or validated here.
// Trees translate one process per node (leaves carry the observable gate,
// composites only combine their children).  Rules translate with plugin
// inputs as process parameters, flag reads as gate receptions, and the
// detection action as an output on the flag's gate.  Variable declarations
// are hoisted into a single `var ... in` block, the one canonical scoping
// form this emitter uses.  Emission is deterministic: identical input yields
// identical bytes.

#pragma once

#include "ltscheck/attack_tree.hpp"
#include "ltscheck/gtdl.hpp"

namespace ltscheck {

struct lnt_document {
    std::string text;
    std::vector<std::string> process_names;
};

namespace detail {

inline std::string sanitize_ident(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "x_" + out;
    return out;
}

/// Gate carrying flag F is named `fSet` (first letter lowered).
inline std::string flag_gate(const std::string& flag) {
    std::string out = sanitize_ident(flag);
    out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
    return out + "Set";
}

// -- tree emission -----------------------------------------------------------

struct tree_emitter {
    std::string body;
    std::vector<std::string> names;
    std::set<std::string> emitted_leaves;

    std::string emit(const attack_tree& t, const std::string& path) {
        if (t.kind == node_kind::leaf) {
            std::string gate = sanitize_ident(t.action);
            std::string name = "LEAF_" + gate;
            if (emitted_leaves.insert(name).second) {
                body += "process " + name + " [" + gate + ": any] is " + gate + " end process\n\n";
                names.push_back(name);
            }
            return name;
        }
        std::vector<std::string> kids;
        for (size_t i = 0; i < t.children.size(); ++i)
            kids.push_back(emit(t.children[i], path + "_" + std::to_string(i + 1)));

        const char* op = t.kind == node_kind::or_node ? "OR"
                        : t.kind == node_kind::and_node ? "AND" : "SAND";
        std::string name = std::string(op) + path;
        body += "process " + name + " is\n";
        switch (t.kind) {
            case node_kind::or_node:
                body += "  select\n    ";
                for (size_t i = 0; i < kids.size(); ++i)
                    body += (i ? " [] " : "") + kids[i];
                body += "\n  end select\n";
                break;
            case node_kind::and_node:
                body += "  par\n    ";
                for (size_t i = 0; i < kids.size(); ++i)
                    body += (i ? " || " : "") + kids[i];
                body += "\n  end par\n";
                break;
            default:
                body += "  ";
                for (size_t i = 0; i < kids.size(); ++i)
                    body += (i ? " ; " : "") + kids[i];
                body += "\n";
                break;
        }
        body += "end process\n\n";
        names.push_back(name);
        return name;
    }
};

// -- rule emission -----------------------------------------------------------

inline std::string emit_expr(const expr& e) {
    if (e.k == expr::kind::variable) return sanitize_ident(e.var);
    return e.value ? "true" : "false";
}

inline std::string emit_cond(const cond& c) {
    switch (c.k) {
        case cond::kind::var_ref: return sanitize_ident(c.var);
        case cond::kind::expr_ref: return emit_expr(c.e);
        case cond::kind::conj: return emit_cond(c.kids[0]) + " and " + emit_cond(c.kids[1]);
        case cond::kind::disj: return emit_cond(c.kids[0]) + " or " + emit_cond(c.kids[1]);
        case cond::kind::neg: return "not " + emit_cond(c.kids[0]);
        case cond::kind::eq: return sanitize_ident(c.var) + " == " + emit_expr(c.e);
        case cond::kind::ne: return sanitize_ident(c.var) + " <> " + emit_expr(c.e);
    }
    return "false";
}

inline void emit_block_items(const block& b, std::vector<std::string>& items,
                             const std::string& indent);

inline void emit_block(const block& b, std::string& out, const std::string& indent) {
    std::vector<std::string> items;
    emit_block_items(b, items, indent);
    if (items.empty()) items.push_back(indent + "null");
    for (size_t i = 0; i < items.size(); ++i)
        out += items[i] + (i + 1 < items.size() ? ";\n" : "\n");
}

inline void emit_block_items(const block& b, std::vector<std::string>& items,
                             const std::string& indent) {
    for (size_t i = 0; i < b.assigns.size(); ++i) {
        const assign& a = b.assigns[i];
        switch (a.k) {
            case assign::source_kind::plugin:
                break;  // plugin inputs are process parameters
            case assign::source_kind::expression:
                items.push_back(indent + sanitize_ident(a.var) + " := " + emit_expr(a.e));
                break;
            case assign::source_kind::flag: {
                // a run of consecutive flag reads synchronizes in any order
                size_t j = i;
                while (j + 1 < b.assigns.size() &&
                       b.assigns[j + 1].k == assign::source_kind::flag)
                    ++j;
                if (j == i) {
                    items.push_back(indent + flag_gate(a.flag) + " (?" + sanitize_ident(a.var) +
                                    ")");
                } else {
                    std::string par = indent + "par\n";
                    for (size_t r = i; r <= j; ++r) {
                        par += indent + "  " + (r > i ? "|| " : "   ") +
                               flag_gate(b.assigns[r].flag) + " (?" +
                               sanitize_ident(b.assigns[r].var) + ")\n";
                    }
                    par += indent + "end par";
                    items.push_back(std::move(par));
                    i = j;
                }
                break;
            }
        }
    }
    switch (b.tail) {
        case block::tail_kind::none:
            break;
        case block::tail_kind::action:
            items.push_back(indent + flag_gate(b.action_flag) + "(TRUE)");
            break;
        case block::tail_kind::conditional: {
            std::string text = indent + "if " + emit_cond(b.condition) + " then\n";
            emit_block(b.branches[0], text, indent + "  ");
            const block& els = b.branches[1];
            if (!els.assigns.empty() || els.tail != block::tail_kind::none) {
                text += indent + "else\n";
                emit_block(els, text, indent + "  ");
            }
            text += indent + "end if";
            items.push_back(std::move(text));
            break;
        }
    }
}

struct rule_gates {
    std::vector<std::string> gates;   // read gates first, then set gates
    std::vector<std::string> params;  // plugin-assigned variables
    std::vector<std::string> locals;  // remaining assigned variables
};

inline void collect_rule_vars(const block& b, rule_gates& g) {
    for (const assign& a : b.assigns) {
        auto& dst = (a.k == assign::source_kind::plugin) ? g.params : g.locals;
        std::string v = sanitize_ident(a.var);
        if (std::find(dst.begin(), dst.end(), v) == dst.end()) dst.push_back(v);
    }
    if (b.tail == block::tail_kind::conditional)
        for (const block& br : b.branches) collect_rule_vars(br, g);
}

inline rule_gates analyze_rule(const gtdl_rule& rule) {
    rule_gates g;
    for (const std::string& f : collect_inputs(rule).flag_reads) g.gates.push_back(flag_gate(f));
    for (const std::string& f : flags_set(rule)) {
        std::string gate = flag_gate(f);
        if (std::find(g.gates.begin(), g.gates.end(), gate) == g.gates.end())
            g.gates.push_back(gate);
    }
    collect_rule_vars(rule.body, g);
    return g;
}

inline std::string emit_rule_process(const gtdl_rule& rule, std::string* name_out) {
    rule_gates g = analyze_rule(rule);
    std::string name = sanitize_ident(rule.name);
    if (name_out) *name_out = name;

    std::string out = "process " + name + " [";
    for (size_t i = 0; i < g.gates.size(); ++i) out += (i ? ", " : "") + g.gates[i];
    out += ": FLAG_CHANNEL]";
    if (!g.params.empty()) {
        out += " (in var ";
        for (size_t i = 0; i < g.params.size(); ++i) out += (i ? ", " : "") + g.params[i];
        out += ": Bool)";
    }
    out += " is\n";
    std::string indent = "  ";
    if (!g.locals.empty()) {
        out += "  var ";
        for (size_t i = 0; i < g.locals.size(); ++i) out += (i ? ", " : "") + g.locals[i];
        out += ": Bool in\n";
        indent = "    ";
    }
    emit_block(rule.body, out, indent);
    if (!g.locals.empty()) out += "  end var\n";
    out += "end process\n";
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public emitters
// ---------------------------------------------------------------------------

/// Full module for one attack tree: one process per node, named by its path
/// from the root, children emitted before their parents.
inline lnt_document emit_tree(const attack_tree& t, const std::string& module_name = "attack_tree") {
    detail::tree_emitter em;
    em.emit(t, "_root");
    lnt_document doc;
    doc.process_names = std::move(em.names);
    doc.text = "module " + detail::sanitize_ident(module_name) + " is\n\n" + em.body + "end module\n";
    return doc;
}

/// Single-rule translation: one process with the rule's flag gates and its
/// plugin inputs as parameters.
inline lnt_document emit_gtdl(const gtdl_rule& rule) {
    lnt_document doc;
    std::string name;
    doc.text = detail::emit_rule_process(rule, &name);
    doc.process_names.push_back(name);
    return doc;
}

/// Full module for a rule set: every rule process plus an Engine process
/// composing them in parallel, synchronized on the gates some rule reads.
inline lnt_document emit_gtdl(const std::vector<gtdl_rule>& rules,
                              const std::string& module_name = "detection") {
    if (rules.empty()) throw lts_error("cannot emit an empty rule set");
    lnt_document doc;
    std::string body = "channel FLAG_CHANNEL is (flag: Bool) end channel\n\n";

    std::vector<std::string> all_gates, sync_gates;
    for (const gtdl_rule& rule : rules) {
        std::string name;
        body += detail::emit_rule_process(rule, &name) + "\n";
        doc.process_names.push_back(name);
        for (const std::string& g : detail::analyze_rule(rule).gates)
            if (std::find(all_gates.begin(), all_gates.end(), g) == all_gates.end())
                all_gates.push_back(g);
        for (const std::string& f : collect_inputs(rule).flag_reads) {
            std::string g = detail::flag_gate(f);
            if (std::find(sync_gates.begin(), sync_gates.end(), g) == sync_gates.end())
                sync_gates.push_back(g);
        }
    }

    body += "process Engine [";
    for (size_t i = 0; i < all_gates.size(); ++i) body += (i ? ", " : "") + all_gates[i];
    body += ": FLAG_CHANNEL] is\n";
    if (sync_gates.empty()) {
        body += "  par\n";
    } else {
        body += "  par ";
        for (size_t i = 0; i < sync_gates.size(); ++i) body += (i ? ", " : "") + sync_gates[i];
        body += " in\n";
    }
    for (size_t i = 0; i < rules.size(); ++i) {
        detail::rule_gates g = detail::analyze_rule(rules[i]);
        body += std::string("    ") + (i ? "|| " : "   ") + doc.process_names[i] + " [";
        for (size_t j = 0; j < g.gates.size(); ++j) body += (j ? ", " : "") + g.gates[j];
        body += "]\n";
    }
    body += "  end par\nend process\n";
    doc.process_names.push_back("Engine");

    doc.text = "module " + detail::sanitize_ident(module_name) + " is\n\n" + body + "\nend module\n";
    return doc;
}

/// Whitespace-insensitive token stream of an LNT text, for golden-file
/// comparison.
inline std::vector<std::string> lnt_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

}  // namespace ltscheck
