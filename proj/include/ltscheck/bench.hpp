// bench.hpp — parametric model families and timing harness.
//
// Generates matched (attack tree, rule set) pairs for six families
// parameterized by leaf count, runs conformance checks over them, and
// reports timings as CSV and as a per-family markdown table.  Absolute
// wall-clock numbers are machine-dependent; the harness is built to compare
// relation kinds and growth shapes, not to reproduce any fixed seconds.
//
// Family shapes (n = number of leaves):
//   AndOnly    AND over n distinct actions; one unconditional single-flag
//              rule per leaf.
//   AndNonDet  as AndOnly but one action appears on two leaves (two rules
//              emit the same flag).
//   SandOnly   SAND chain; rule i awaits flag i-1 before setting flag i, so
//              the engine enforces the same order through flag rendezvous.
//   OrOnly     OR over n actions; a single rule picks exactly one flag via a
//              nested conditional over plugin inputs.  The engine commits to
//              its branch silently, so the pair is weak-trace-equivalent but
//              deliberately not weakly bisimilar for n >= 2.
//   AndOr      AND root with two 3-leaf OR groups plus free leaves (n >= 6).
//   AndSand    AND root with two 3-leaf SAND chains plus free leaves
//              (n >= 6); checked with the simulation preorder.
//
// All families satisfy weak trace inclusion tree ⊆ engine; AndOnly,
// AndNonDet and SandOnly additionally satisfy weak bisimilarity.

#pragma once

#include "ltscheck/attack_tree.hpp"
#include "ltscheck/equivalence.hpp"
#include "ltscheck/gtdl.hpp"

namespace ltscheck {

enum class bench_family { and_only, and_nondet, sand_only, or_only, and_or, and_sand };

inline constexpr std::array<bench_family, 6> all_bench_families{
    bench_family::and_only, bench_family::and_nondet, bench_family::sand_only,
    bench_family::or_only,  bench_family::and_or,     bench_family::and_sand,
};

inline constexpr const char* family_name(bench_family f) {
    switch (f) {
        case bench_family::and_only: return "AndOnly";
        case bench_family::and_nondet: return "AndNonDet";
        case bench_family::sand_only: return "SandOnly";
        case bench_family::or_only: return "OrOnly";
        case bench_family::and_or: return "AndOr";
        case bench_family::and_sand: return "AndSand";
    }
    return "?";
}

inline std::optional<bench_family> parse_bench_family(std::string_view name) {
    for (bench_family f : all_bench_families)
        if (name == family_name(f)) return f;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Model generation
// ---------------------------------------------------------------------------

struct bench_model {
    attack_tree tree;
    std::vector<gtdl_rule> rules;
    engine_wiring wiring;
};

namespace detail {

inline gtdl_rule emitter_rule(const std::string& name, const std::string& flag) {
    gtdl_rule r;
    r.name = name;
    r.body.tail = block::tail_kind::action;
    r.body.action_flag = flag;
    return r;
}

/// Awaits `prev` (flag rendezvous), then sets `flag`.
inline gtdl_rule chained_rule(const std::string& name, const std::string& prev,
                              const std::string& flag) {
    gtdl_rule r;
    r.name = name;
    assign a;
    a.k = assign::source_kind::flag;
    a.var = "prev";
    a.flag = prev;
    r.body.assigns.push_back(std::move(a));
    r.body.tail = block::tail_kind::conditional;
    r.body.condition = cond::of_var("prev");
    block then_branch;
    then_branch.tail = block::tail_kind::action;
    then_branch.action_flag = flag;
    r.body.branches.push_back(std::move(then_branch));
    r.body.branches.push_back({});
    return r;
}

/// Sets exactly one of the given flags, chosen by a cascade of plugin
/// inputs: IF c1 THEN f1 ELSE (c2 ? f2 : ...) with the last flag as the
/// final ELSE.
inline block choice_body(const std::vector<std::string>& flags, size_t i) {
    block b;
    if (i + 1 == flags.size()) {
        b.tail = block::tail_kind::action;
        b.action_flag = flags[i];
        return b;
    }
    assign a;
    a.k = assign::source_kind::plugin;
    a.var = "c" + std::to_string(i + 1);
    a.call = {"SelectBranch", std::to_string(i + 1)};
    b.assigns.push_back(std::move(a));
    b.tail = block::tail_kind::conditional;
    b.condition = cond::of_var("c" + std::to_string(i + 1));
    block then_branch;
    then_branch.tail = block::tail_kind::action;
    then_branch.action_flag = flags[i];
    b.branches.push_back(std::move(then_branch));
    b.branches.push_back(choice_body(flags, i + 1));
    return b;
}

inline gtdl_rule choice_rule(const std::string& name, const std::vector<std::string>& flags) {
    gtdl_rule r;
    r.name = name;
    r.body = choice_body(flags, 0);
    return r;
}

inline std::vector<std::string> flag_names(const std::string& stem, int count) {
    std::vector<std::string> out;
    for (int i = 1; i <= count; ++i) out.push_back(stem + std::to_string(i));
    return out;
}

inline attack_tree tree_over(node_kind kind, const std::vector<std::string>& actions) {
    if (actions.size() == 1) return attack_tree::leaf(actions.front());
    std::vector<attack_tree> leaves;
    for (const std::string& a : actions) leaves.push_back(attack_tree::leaf(a));
    return attack_tree::composite(kind, std::move(leaves));
}

inline std::vector<gtdl_rule> sand_chain_rules(const std::string& stem,
                                               const std::vector<std::string>& flags) {
    std::vector<gtdl_rule> rules;
    rules.push_back(emitter_rule(stem + "1", flags[0]));
    for (size_t i = 1; i < flags.size(); ++i)
        rules.push_back(chained_rule(stem + std::to_string(i + 1), flags[i - 1], flags[i]));
    return rules;
}

}  // namespace detail

/// Builds the tree and the matching rule set for one family instance.
inline bench_model generate(bench_family family, int leaves) {
    if (leaves < 1) throw lts_error("benchmark model needs at least one leaf");
    bench_model m;
    switch (family) {
        case bench_family::and_only: {
            auto flags = detail::flag_names("f", leaves);
            m.tree = detail::tree_over(node_kind::and_node, flags);
            for (int i = 0; i < leaves; ++i)
                m.rules.push_back(detail::emitter_rule(
                    "SignatureDetectionFlag" + std::to_string(i + 1), flags[i]));
            break;
        }
        case bench_family::and_nondet: {
            if (leaves < 2) throw lts_error("AndNonDet requires at least 2 leaves");
            // the first action appears on two leaves
            std::vector<std::string> actions{"f1"};
            auto rest = detail::flag_names("f", leaves - 1);
            actions.insert(actions.end(), rest.begin(), rest.end());
            m.tree = detail::tree_over(node_kind::and_node, actions);
            for (size_t i = 0; i < actions.size(); ++i)
                m.rules.push_back(detail::emitter_rule(
                    "SignatureDetectionFlag" + std::to_string(i + 1), actions[i]));
            break;
        }
        case bench_family::sand_only: {
            auto flags = detail::flag_names("f", leaves);
            m.tree = detail::tree_over(node_kind::sand_node, flags);
            m.rules = detail::sand_chain_rules("SignatureDetectionFlag", flags);
            break;
        }
        case bench_family::or_only: {
            auto flags = detail::flag_names("f", leaves);
            m.tree = detail::tree_over(node_kind::or_node, flags);
            m.rules.push_back(detail::choice_rule("ChoiceDetection", flags));
            break;
        }
        case bench_family::and_or:
        case bench_family::and_sand: {
            if (leaves < 6)
                throw lts_error(std::string(family_name(family)) +
                                " requires at least 6 leaves (two 3-leaf groups)");
            node_kind inner =
                family == bench_family::and_or ? node_kind::or_node : node_kind::sand_node;
            std::vector<attack_tree> children;
            for (int g = 1; g <= 2; ++g) {
                std::vector<std::string> group;
                for (int i = 1; i <= 3; ++i)
                    group.push_back("g" + std::to_string(g) + "_" + std::to_string(i));
                children.push_back(detail::tree_over(inner, group));
                if (family == bench_family::and_or) {
                    m.rules.push_back(detail::choice_rule("OrGroup" + std::to_string(g), group));
                } else {
                    auto rules = detail::sand_chain_rules("SandGroup" + std::to_string(g), group);
                    m.rules.insert(m.rules.end(), rules.begin(), rules.end());
                }
            }
            auto frees = detail::flag_names("f", leaves - 6);
            for (size_t i = 0; i < frees.size(); ++i) {
                children.push_back(attack_tree::leaf(frees[i]));
                m.rules.push_back(detail::emitter_rule(
                    "SignatureDetectionFlag" + std::to_string(i + 1), frees[i]));
            }
            m.tree = attack_tree::composite(node_kind::and_node, std::move(children));
            break;
        }
    }
    return m;
}

/// The relation pair reported per family: an equivalence-style check and the
/// weak-trace check.  AndSand uses the simulation preorder; the committed
/// internal choice of OrOnly/AndOr engines is compared by weak trace
/// equivalence.
inline std::vector<relation_kind> default_relations(bench_family family) {
    switch (family) {
        case bench_family::and_only:
        case bench_family::and_nondet:
        case bench_family::sand_only:
            return {relation_kind::weak_bisim, relation_kind::weak_trace_incl};
        case bench_family::or_only:
        case bench_family::and_or:
            return {relation_kind::weak_trace_eq, relation_kind::weak_trace_incl};
        case bench_family::and_sand:
            return {relation_kind::weak_sim, relation_kind::weak_trace_incl};
    }
    return {relation_kind::weak_trace_incl};
}

// ---------------------------------------------------------------------------
// Timing harness
// ---------------------------------------------------------------------------

struct bench_case {
    bench_family family = bench_family::and_only;
    int leaves = 1;
    std::vector<relation_kind> relations;  // empty: family defaults
};

struct bench_entry {
    bench_family family;
    int leaves;
    relation_kind relation;
    double millis = 0;
    int states_lhs = 0;
    int states_rhs = 0;
    bool holds = false;
    bool timed_out = false;
};

struct bench_options {
    int repetitions = 3;            // median over this many measurements
    double timeout_secs = 7200;     // per single check
    double min_measure_millis = 2;  // sub-millisecond checks repeat until this
};

/// One measurement: the check runs repeatedly until `min_measure_millis` of
/// wall clock accumulate, and the mean per-run time is returned.  This keeps
/// microsecond-scale checks measurable without distorting slow ones.
inline bench_entry measure_check(const lts& lhs, const lts& rhs, relation_kind kind,
                                 const bench_options& opt) {
    bench_entry e{};
    e.relation = kind;
    e.states_lhs = lhs.num_states;
    e.states_rhs = rhs.num_states;

    std::vector<double> samples;
    for (int rep = 0; rep <= std::max(1, opt.repetitions); ++rep) {
        deadline limit = deadline::in_seconds(opt.timeout_secs);
        try {
            auto t0 = std::chrono::steady_clock::now();
            int runs = 0;
            double elapsed = 0;
            do {
                verdict v = check(lhs, rhs, kind, &limit);
                e.holds = v.holds;
                ++runs;
                elapsed = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            } while (elapsed < opt.min_measure_millis && runs < 100000);
            if (rep > 0) samples.push_back(elapsed / runs);  // first pass warms up
        } catch (const timeout_error&) {
            e.timed_out = true;
            e.millis = opt.timeout_secs * 1000.0;
            return e;
        }
    }
    std::sort(samples.begin(), samples.end());
    e.millis = samples[samples.size() / 2];
    return e;
}

/// Runs every case: the tree compiles through `tree_to_lts`, the rules
/// through `engine_to_lts`, and each requested relation is measured with the
/// tree on the left-hand side (tree ⊆ engine for the directional kinds).
inline std::vector<bench_entry> run_bench(const std::vector<bench_case>& cases,
                                          const bench_options& opt = {}) {
    std::vector<bench_entry> out;
    for (const bench_case& c : cases) {
        bench_model model = generate(c.family, c.leaves);
        lts tree = tree_to_lts(model.tree);
        lts engine = engine_to_lts(model.rules, model.wiring, 1);
        std::vector<relation_kind> relations =
            c.relations.empty() ? default_relations(c.family) : c.relations;
        for (relation_kind kind : relations) {
            bench_entry e = measure_check(tree, engine, kind, opt);
            e.family = c.family;
            e.leaves = c.leaves;
            out.push_back(e);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline std::string bench_csv(const std::vector<bench_entry>& entries) {
    std::string out = "family,leaves,relation,millis,states_lhs,states_rhs,verdict\n";
    char buf[64];
    for (const bench_entry& e : entries) {
        std::snprintf(buf, sizeof buf, "%.3f", e.millis);
        out += std::string(family_name(e.family)) + "," + std::to_string(e.leaves) + "," +
               kind_name(e.relation) + "," + buf + "," + std::to_string(e.states_lhs) + "," +
               std::to_string(e.states_rhs) + "," +
               (e.timed_out ? "timeout" : (e.holds ? "true" : "false")) + "\n";
    }
    return out;
}

/// Per-family table with one column per relation, leaf counts as rows.
inline std::string bench_markdown(const std::vector<bench_entry>& entries) {
    std::string out;
    for (bench_family f : all_bench_families) {
        std::vector<relation_kind> cols;
        std::vector<int> rows;
        for (const bench_entry& e : entries) {
            if (e.family != f) continue;
            if (std::find(cols.begin(), cols.end(), e.relation) == cols.end())
                cols.push_back(e.relation);
            if (std::find(rows.begin(), rows.end(), e.leaves) == rows.end())
                rows.push_back(e.leaves);
        }
        if (rows.empty()) continue;
        std::sort(rows.begin(), rows.end());

        out += std::string("## ") + family_name(f) + "\n\n| leaves |";
        for (relation_kind k : cols) out += std::string(" ") + kind_name(k) + " (ms) |";
        out += "\n|---|";
        for (size_t i = 0; i < cols.size(); ++i) out += "---|";
        out += "\n";
        char buf[64];
        for (int n : rows) {
            out += "| " + std::to_string(n) + " |";
            for (relation_kind k : cols) {
                const bench_entry* found = nullptr;
                for (const bench_entry& e : entries)
                    if (e.family == f && e.leaves == n && e.relation == k) found = &e;
                if (!found) {
                    out += " - |";
                } else if (found->timed_out) {
                    out += " timeout |";
                } else {
                    std::snprintf(buf, sizeof buf, "%.3f", found->millis);
                    out += std::string(" ") + buf + " |";
                }
            }
            out += "\n";
        }
        out += "\n";
    }
    return out;
}

}  // namespace ltscheck
