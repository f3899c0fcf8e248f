// support.hpp — shared test utilities: quick LTS construction, seeded random
// generators, and the independent oracles the implementation is checked
// against.  The oracles here deliberately avoid the production algorithms:
// relation verdicts come from a naive greatest-fixpoint computation, and
// rule detection outcomes from a big-step evaluation of the rule body.

#pragma once

#include "ltscheck/attack_tree.hpp"
#include "ltscheck/equivalence.hpp"
#include "ltscheck/gtdl.hpp"

#include <fstream>
#include <functional>
#include <random>

namespace ltscheck::testing {

// ---------------------------------------------------------------------------
// Construction helpers
// ---------------------------------------------------------------------------

inline lts build(int states, int initial,
                 const std::vector<std::tuple<int, std::string, int>>& transitions,
                 const std::vector<int>& terminals) {
    lts m(states);
    m.initial = initial;
    for (const auto& [src, label, dst] : transitions)
        m.add_transition(src, label == "tau" ? tau_id : m.intern(label), dst);
    for (int t : terminals) m.mark_terminal(t);
    m.finalize();
    return m;
}

inline trace t(std::initializer_list<const char*> labels) {
    trace out;
    for (const char* l : labels) out.emplace_back(l);
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw std::runtime_error("cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// Signature-removal surgery (detection-gap experiments)
// ---------------------------------------------------------------------------

namespace detail_mut {

inline bool mentions(const expr& e, const std::string& var) {
    return e.k == expr::kind::variable && e.var == var;
}

inline bool mentions(const cond& c, const std::string& var) {
    switch (c.k) {
        case cond::kind::var_ref: return c.var == var;
        case cond::kind::expr_ref: return mentions(c.e, var);
        case cond::kind::eq:
        case cond::kind::ne: return c.var == var || mentions(c.e, var);
        default:
            for (const cond& kid : c.kids)
                if (mentions(kid, var)) return true;
            return false;
    }
}

/// Drops conjuncts mentioning the variable; nullopt means nothing is left.
inline std::optional<cond> prune_conjunct(const cond& c, const std::string& var) {
    if (c.k == cond::kind::conj) {
        auto l = prune_conjunct(c.kids[0], var);
        auto r = prune_conjunct(c.kids[1], var);
        if (l && r) return cond::binary(cond::kind::conj, std::move(*l), std::move(*r));
        if (l) return l;
        return r;
    }
    if (mentions(c, var)) return std::nullopt;
    return c;
}

inline void drop_flag_read(block& b, const std::string& flag) {
    for (auto it = b.assigns.begin(); it != b.assigns.end();) {
        if (it->k == assign::source_kind::flag && it->flag == flag) {
            std::string var = it->var;
            it = b.assigns.erase(it);
            if (b.tail == block::tail_kind::conditional) {
                auto pruned = prune_conjunct(b.condition, var);
                b.condition = pruned ? *pruned : cond::of_expr(expr::lit(true));
            }
        } else {
            ++it;
        }
    }
    if (b.tail == block::tail_kind::conditional)
        for (block& br : b.branches) drop_flag_read(br, flag);
}

}  // namespace detail_mut

/// Removes one signature rule and every aggregation reference to its flag —
/// the shape of a detection gap where a signature was never written.
inline std::vector<gtdl_rule> remove_signature(const std::vector<gtdl_rule>& rules,
                                               const std::string& rule_name) {
    std::vector<gtdl_rule> out;
    std::vector<std::string> removed_flags;
    for (const gtdl_rule& r : rules) {
        if (r.name == rule_name) {
            removed_flags = flags_set(r);
            continue;
        }
        out.push_back(r);
    }
    if (out.size() == rules.size())
        throw std::runtime_error("no rule named " + rule_name);
    for (gtdl_rule& r : out)
        for (const std::string& f : removed_flags) detail_mut::drop_flag_read(r.body, f);
    return out;
}

// ---------------------------------------------------------------------------
// Random generators (all seeded by the caller for reproducibility)
// ---------------------------------------------------------------------------

/// Random acyclic LTS: edges only go forward in state order, so every
/// generated system satisfies the toolkit's acyclicity invariant.
inline lts random_lts(std::mt19937_64& rng, int max_states, int num_labels, double tau_density) {
    int n = 1 + static_cast<int>(rng() % max_states);
    lts m(n);
    int edges = static_cast<int>(rng() % (2 * n + 2));
    for (int i = 0; i < edges && n > 1; ++i) {
        int src = static_cast<int>(rng() % (n - 1));
        int dst = src + 1 + static_cast<int>(rng() % (n - src - 1));
        bool tau = std::uniform_real_distribution<double>(0, 1)(rng) < tau_density;
        if (tau)
            m.add_transition(src, tau_id, dst);
        else
            m.add_transition(src, "l" + std::to_string(rng() % num_labels), dst);
    }
    for (int s = 0; s < n; ++s)
        if (rng() % 3 == 0) m.mark_terminal(s);
    if (n > 0 && rng() % 2 == 0) m.mark_terminal(n - 1);
    m.finalize();
    return m;
}

inline attack_tree random_tree(std::mt19937_64& rng, int max_leaves, int max_depth,
                               int num_actions) {
    auto action = [&] { return "a" + std::to_string(rng() % num_actions); };
    if (max_depth == 0 || max_leaves < 2 || rng() % 3 == 0)
        return attack_tree::leaf(action());
    int arity = 2 + static_cast<int>(rng() % std::min(3, std::max(1, max_leaves - 1)));
    arity = std::min(arity, max_leaves);
    std::vector<attack_tree> children;
    int remaining = max_leaves;
    for (int i = 0; i < arity; ++i) {
        int budget = std::max(1, remaining - (arity - 1 - i));
        int share = 1 + static_cast<int>(rng() % budget);
        children.push_back(random_tree(rng, share, max_depth - 1, num_actions));
        remaining -= children.back().leaf_count();
    }
    node_kind kinds[] = {node_kind::or_node, node_kind::and_node, node_kind::sand_node};
    return attack_tree::composite(kinds[rng() % 3], std::move(children));
}

/// Random single rule over small pools of plugin calls, flag reads and
/// variables; the body always ends in a statement, as the grammar demands.
inline gtdl_rule random_rule(std::mt19937_64& rng, int max_assigns = 4, int max_if_depth = 2) {
    gtdl_rule rule;
    rule.name = "R" + std::to_string(rng() % 1000);
    std::vector<std::string> assigned;

    auto random_expr = [&]() {
        if (!assigned.empty() && rng() % 2 == 0)
            return expr::ref(assigned[rng() % assigned.size()]);
        return expr::lit(rng() % 2 == 0);
    };
    std::function<cond(int)> random_cond = [&](int depth) -> cond {
        int pick = static_cast<int>(rng() % (depth > 0 ? 6 : 3));
        switch (pick) {
            case 0: return cond::of_expr(random_expr());
            case 1:
                if (!assigned.empty()) return cond::of_var(assigned[rng() % assigned.size()]);
                return cond::of_expr(expr::lit(true));
            case 2:
                if (!assigned.empty())
                    return cond::compare(rng() % 2 ? cond::kind::eq : cond::kind::ne,
                                         assigned[rng() % assigned.size()], random_expr());
                return cond::of_expr(expr::lit(false));
            case 3: return cond::negate(random_cond(depth - 1));
            case 4:
                return cond::binary(cond::kind::conj, random_cond(depth - 1),
                                    random_cond(depth - 1));
            default:
                return cond::binary(cond::kind::disj, random_cond(depth - 1),
                                    random_cond(depth - 1));
        }
    };

    std::function<block(int)> random_block = [&](int if_depth) -> block {
        size_t outer_vars = assigned.size();
        block b;
        int assigns = static_cast<int>(rng() % (max_assigns + 1));
        for (int i = 0; i < assigns; ++i) {
            assign a;
            a.var = "v" + std::to_string(assigned.size());
            switch (rng() % 3) {
                case 0:
                    a.k = assign::source_kind::plugin;
                    a.call = {"P" + std::to_string(rng() % 3), "arg" + std::to_string(rng() % 2)};
                    break;
                case 1:
                    a.k = assign::source_kind::flag;
                    a.flag = "F" + std::to_string(rng() % 3);
                    break;
                default:
                    a.k = assign::source_kind::expression;
                    a.e = random_expr();
                    break;
            }
            assigned.push_back(a.var);
            b.assigns.push_back(std::move(a));
        }
        int tail = static_cast<int>(rng() % (if_depth > 0 ? 3 : 2));
        if (tail == 0) {
            b.tail = block::tail_kind::action;
            b.action_flag = "D" + std::to_string(rng() % 2);
        } else if (tail == 2) {
            b.tail = block::tail_kind::conditional;
            b.condition = random_cond(1);
            size_t scope = assigned.size();  // branch-local names stay local
            b.branches.push_back(random_block(if_depth - 1));
            assigned.resize(scope);
            b.branches.push_back(random_block(if_depth - 1));
            assigned.resize(scope);
        }  // tail == 1: skip (only inside branches)
        if (b.tail == block::tail_kind::none && if_depth == max_if_depth) {
            b.tail = block::tail_kind::action;
            b.action_flag = "D0";
        }
        assigned.resize(outer_vars);
        return b;
    };
    rule.body = random_block(max_if_depth);
    return rule;
}

inline valuation random_valuation(std::mt19937_64& rng, const rule_inputs& inputs) {
    valuation v;
    for (const plugin_call& c : inputs.plugins) v.plugins[c] = rng() % 2 == 0;
    for (const std::string& f : inputs.flag_reads) v.flags[f] = rng() % 2 == 0;
    return v;
}

// ---------------------------------------------------------------------------
// Naive relation oracles (greatest fixpoint over the explicit relation)
// ---------------------------------------------------------------------------

namespace oracle {

struct pair_system {
    std::vector<std::map<int, std::vector<int>>> out_a, out_b;  // label -> successors
    std::vector<char> mark_a, mark_b;
    int na, nb, ia, ib;
};

inline pair_system prepare(const lts& a, const lts& b, bool weak) {
    lts wa = weak ? saturate(a) : a;
    lts wb = weak ? saturate(b) : b;
    pair_system p;
    p.na = wa.num_states;
    p.nb = wb.num_states;
    p.ia = wa.initial;
    p.ib = wb.initial;
    p.mark_a.assign(wa.terminal.begin(), wa.terminal.end());
    p.mark_b.assign(wb.terminal.begin(), wb.terminal.end());
    p.out_a.resize(p.na);
    p.out_b.resize(p.nb);
    // align label ids by name: use wa's table as reference
    for (const transition& t : wa.transitions) p.out_a[t.src][t.label].push_back(t.dst);
    std::vector<int> remap(wb.labels.size(), -1);
    for (int l = 0; l < static_cast<int>(wb.labels.size()); ++l) {
        int id = wa.find_label(wb.labels[l]);
        remap[l] = id >= 0 ? id : 1000000 + l;  // unmatched labels get fresh ids
    }
    for (const transition& t : wb.transitions) p.out_b[t.src][remap[t.label]].push_back(t.dst);
    return p;
}

inline bool transfer(const std::map<int, std::vector<int>>& from,
                     const std::map<int, std::vector<int>>& into,
                     const std::vector<std::vector<char>>& rel, bool swap) {
    for (const auto& [label, succs] : from) {
        auto it = into.find(label);
        for (int s2 : succs) {
            bool matched = false;
            if (it != into.end())
                for (int t2 : it->second)
                    if (swap ? rel[t2][s2] : rel[s2][t2]) {
                        matched = true;
                        break;
                    }
            if (!matched) return false;
        }
    }
    return true;
}

/// Greatest bisimulation: start from the full relation and delete pairs
/// violating either transfer direction or completion-marker equality.
inline bool naive_bisim(const lts& a, const lts& b, bool weak) {
    pair_system p = prepare(a, b, weak);
    std::vector<std::vector<char>> rel(p.na, std::vector<char>(p.nb, 1));
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < p.na; ++s)
            for (int t = 0; t < p.nb; ++t) {
                if (!rel[s][t]) continue;
                bool ok = (p.mark_a[s] != 0) == (p.mark_b[t] != 0) &&
                          transfer(p.out_a[s], p.out_b[t], rel, false) &&
                          transfer(p.out_b[t], p.out_a[s], rel, true);
                if (!ok) {
                    rel[s][t] = 0;
                    changed = true;
                }
            }
    }
    return rel[p.ia][p.ib] != 0;
}

/// Greatest simulation of a by b (a ⪯ b) with completion transfer.
inline bool naive_sim(const lts& a, const lts& b, bool weak) {
    pair_system p = prepare(a, b, weak);
    std::vector<std::vector<char>> rel(p.na, std::vector<char>(p.nb, 1));
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < p.na; ++s)
            for (int t = 0; t < p.nb; ++t) {
                if (!rel[s][t]) continue;
                bool ok = !(p.mark_a[s] && !p.mark_b[t]) &&
                          transfer(p.out_a[s], p.out_b[t], rel, false);
                if (!ok) {
                    rel[s][t] = 0;
                    changed = true;
                }
            }
    }
    return rel[p.ia][p.ib] != 0;
}

}  // namespace oracle

// ---------------------------------------------------------------------------
// Rule detection oracle (big-step, no SOS machinery)
// ---------------------------------------------------------------------------

/// Evaluates a rule body as a Boolean function of its inputs and returns the
/// flag it sets under the given valuation, if any.
inline std::optional<std::string> rule_detection_oracle(const block& b, store st,
                                                        const valuation& val) {
    for (const assign& a : b.assigns) {
        switch (a.k) {
            case assign::source_kind::plugin: st[a.var] = val.plugin(a.call); break;
            case assign::source_kind::flag: st[a.var] = val.flag(a.flag); break;
            case assign::source_kind::expression: st[a.var] = eval(a.e, st); break;
        }
    }
    switch (b.tail) {
        case block::tail_kind::none: return std::nullopt;
        case block::tail_kind::action: return b.action_flag;
        case block::tail_kind::conditional: {
            bool taken = eval(b.condition, st);
            return rule_detection_oracle(b.branches[taken ? 0 : 1], std::move(st), val);
        }
    }
    return std::nullopt;
}

inline std::optional<std::string> rule_detection_oracle(const gtdl_rule& rule,
                                                        const valuation& val) {
    return rule_detection_oracle(rule.body, {}, val);
}

// ---------------------------------------------------------------------------
// Trace helpers
// ---------------------------------------------------------------------------

/// Set of all interleavings of the given traces followed by nothing else;
/// convenience for expected-value construction in engine tests.
inline trace_set permutations_of(std::vector<std::string> actions) {
    std::sort(actions.begin(), actions.end());
    trace_set out;
    do {
        out.insert(trace(actions.begin(), actions.end()));
    } while (std::next_permutation(actions.begin(), actions.end()));
    return out;
}

inline trace_set append_to_all(const trace_set& set, const std::string& action) {
    trace_set out;
    for (trace t : set) {
        t.push_back(action);
        out.insert(std::move(t));
    }
    return out;
}

}  // namespace ltscheck::testing
