// equivalence.hpp — conformance relations between two LTSs.
//
// Decides strong/weak simulation and bisimulation, plus (weak) trace
// inclusion and equivalence over completed traces, and extracts a shortest
// distinguishing trace where one exists.  All relations respect completion
// markers, which keeps the expected hierarchy sound on arbitrary systems:
//
//   StrongBisim => WeakBisim => WeakTraceEq => WeakTraceIncl
//   StrongBisim => TraceEq   => TraceIncl   => WeakTraceIncl
//   StrongSim   => WeakSim   => WeakTraceIncl
//
// Weak variants are reduced to their strong counterparts on the saturated
// systems (materialized tau*-a-tau* transitions plus a silent self-loop, and
// completion widened to "completable via tau*").  Strong trace relations
// read tau as an ordinary letter.

#pragma once

#include "ltscheck/lts.hpp"

#include <array>

namespace ltscheck {

// ---------------------------------------------------------------------------
// Relation kinds and verdicts
// ---------------------------------------------------------------------------

enum class relation_kind {
    strong_bisim,
    weak_bisim,
    strong_sim,
    weak_sim,
    trace_eq,
    trace_incl,
    weak_trace_eq,
    weak_trace_incl,
};

inline constexpr std::array<relation_kind, 8> all_relation_kinds{
    relation_kind::strong_bisim, relation_kind::weak_bisim,   relation_kind::strong_sim,
    relation_kind::weak_sim,     relation_kind::trace_eq,     relation_kind::trace_incl,
    relation_kind::weak_trace_eq, relation_kind::weak_trace_incl,
};

inline constexpr const char* kind_name(relation_kind k) {
    switch (k) {
        case relation_kind::strong_bisim: return "StrongBisim";
        case relation_kind::weak_bisim: return "WeakBisim";
        case relation_kind::strong_sim: return "StrongSim";
        case relation_kind::weak_sim: return "WeakSim";
        case relation_kind::trace_eq: return "TraceEq";
        case relation_kind::trace_incl: return "TraceIncl";
        case relation_kind::weak_trace_eq: return "WeakTraceEq";
        case relation_kind::weak_trace_incl: return "WeakTraceIncl";
    }
    return "?";
}

inline std::optional<relation_kind> parse_relation_kind(std::string_view name) {
    for (relation_kind k : all_relation_kinds)
        if (name == kind_name(k)) return k;
    return std::nullopt;
}

inline constexpr bool is_weak(relation_kind k) {
    return k == relation_kind::weak_bisim || k == relation_kind::weak_sim ||
           k == relation_kind::weak_trace_eq || k == relation_kind::weak_trace_incl;
}

/// Directional kinds relate lhs into rhs; the rest are symmetric.
inline constexpr bool is_directional(relation_kind k) {
    return k == relation_kind::strong_sim || k == relation_kind::weak_sim ||
           k == relation_kind::trace_incl || k == relation_kind::weak_trace_incl;
}

struct check_stats {
    int states_lhs = 0;
    int states_rhs = 0;
    int iterations = 0;  // refinement rounds, fixpoint rounds, or product states
    double millis = 0;
};

struct verdict {
    relation_kind kind = relation_kind::strong_bisim;
    bool holds = false;
    std::optional<std::vector<std::string>> counterexample;  // may contain "tau" for strong kinds
    check_stats stats;
};

// ---------------------------------------------------------------------------
// Internal machinery
// ---------------------------------------------------------------------------

namespace detail {

struct union_system {
    int num_states = 0;
    int init_lhs = 0, init_rhs = 0;
    std::vector<transition> transitions;
    std::vector<char> marks;
};

inline union_system disjoint_union(const lts& a, const lts& b) {
    union_system u;
    u.num_states = a.num_states + b.num_states;
    u.init_lhs = a.initial;
    u.init_rhs = a.num_states + b.initial;
    u.transitions = a.transitions;

    lts table;  // shared label interning
    table.labels = a.labels;
    std::vector<int> remap(b.labels.size());
    remap[tau_id] = tau_id;
    for (int l = 1; l < static_cast<int>(b.labels.size()); ++l)
        remap[l] = table.intern(b.labels[l]);

    for (const transition& t : b.transitions)
        u.transitions.push_back({t.src + a.num_states, remap[t.label], t.dst + a.num_states});
    u.marks.assign(u.num_states, 0);
    for (int s = 0; s < a.num_states; ++s) u.marks[s] = a.terminal[s];
    for (int s = 0; s < b.num_states; ++s) u.marks[a.num_states + s] = b.terminal[s];
    return u;
}

struct bool_result {
    bool holds;
    int iterations;
};

inline bool_result bisim_core(const lts& a, const lts& b, const deadline* limit) {
    union_system u = disjoint_union(a, b);
    refinement r = refine_blocks(u.num_states, u.transitions, u.marks, limit);
    return {r.block[u.init_lhs] == r.block[u.init_rhs], r.iterations};
}

// outgoing transitions grouped by label id for one side of a simulation
struct grouped_adjacency {
    std::vector<std::map<int, std::vector<int>>> out;  // state -> label -> targets

    explicit grouped_adjacency(const lts& m) : out(m.num_states) {
        for (const transition& t : m.transitions) out[t.src][t.label].push_back(t.dst);
    }
};

/// Greatest simulation relation, computed by removing violating pairs from
/// the full relation until stable.  Pair (s, t) survives iff t can match
/// every move of s within the remaining relation and completion transfers.
inline bool_result sim_core(const lts& a, const lts& b, const std::vector<int>& label_map,
                            const deadline* limit) {
    grouped_adjacency oa(a), ob(b);
    std::vector<char> rel(static_cast<size_t>(a.num_states) * b.num_states, 1);
    auto at = [&](int s, int t) -> char& {
        return rel[static_cast<size_t>(s) * b.num_states + t];
    };

    int rounds = 0;
    bool changed = true;
    while (changed) {
        if (limit) limit->enforce();
        changed = false;
        ++rounds;
        for (int s = 0; s < a.num_states; ++s) {
            for (int t = 0; t < b.num_states; ++t) {
                if (!at(s, t)) continue;
                bool ok = !(a.terminal[s] && !b.terminal[t]);
                if (ok) {
                    for (const auto& [lab, succs] : oa.out[s]) {
                        int blab = label_map[lab];
                        const std::vector<int>* matches = nullptr;
                        if (blab >= 0) {
                            auto it = ob.out[t].find(blab);
                            if (it != ob.out[t].end()) matches = &it->second;
                        }
                        for (int s2 : succs) {
                            bool found = false;
                            if (matches)
                                for (int t2 : *matches)
                                    if (at(s2, t2)) { found = true; break; }
                            if (!found) { ok = false; break; }
                        }
                        if (!ok) break;
                    }
                }
                if (!ok) {
                    at(s, t) = 0;
                    changed = true;
                }
            }
        }
    }
    return {at(a.initial, b.initial) != 0, rounds};
}

/// Maps lhs label ids onto rhs label ids by name (-1 when absent: such moves
/// can never be matched).
inline std::vector<int> map_labels(const lts& a, const lts& b) {
    std::vector<int> map(a.labels.size(), -1);
    map[tau_id] = tau_id;
    for (int l = 1; l < static_cast<int>(a.labels.size()); ++l) map[l] = b.find_label(a.labels[l]);
    return map;
}

// -- determinization over completed-trace acceptance ------------------------

// DFA label ids are name-ordered, so row order, binary search, and the
// lexicographic tie-break of counterexamples all coincide.
struct dfa {
    std::vector<std::vector<std::pair<int, int>>> delta;  // per state, sorted by label id
    std::vector<char> accept;
    std::vector<std::string> labels;  // sorted by name
    int initial = 0;

    int move(int state, int label) const {
        const auto& row = delta[state];
        auto it = std::lower_bound(row.begin(), row.end(), std::pair<int, int>{label, -1});
        return (it != row.end() && it->first == label) ? it->second : -1;
    }
};

inline dfa determinize(const lts& m, bool weak, const deadline* limit) {
    dfa d;
    std::vector<int> by_name(m.labels.size());
    for (size_t i = 0; i < by_name.size(); ++i) by_name[i] = static_cast<int>(i);
    std::sort(by_name.begin(), by_name.end(),
              [&](int a, int b) { return m.labels[a] < m.labels[b]; });
    std::vector<int> new_id(m.labels.size());
    for (size_t rank = 0; rank < by_name.size(); ++rank) {
        new_id[by_name[rank]] = static_cast<int>(rank);
        d.labels.push_back(m.labels[by_name[rank]]);
    }

    adjacency adj(m);
    std::vector<std::vector<int>> closure;
    if (weak) closure = tau_closure(m);

    std::vector<int> scratch;
    auto close = [&](std::vector<int>& set) {
        if (weak) {
            scratch.clear();
            for (int s : set) scratch.insert(scratch.end(), closure[s].begin(), closure[s].end());
            set.swap(scratch);
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    };

    // singleton subsets (the common, deterministic case) intern through a
    // plain array; larger subsets go through the hash map
    std::vector<std::vector<int>> subsets;
    std::vector<int> singleton_id(m.num_states, -1);
    std::unordered_map<std::vector<int>, int, detail::int_vector_hash> index;
    auto state_of = [&](const std::vector<int>& subset) {
        if (subset.size() == 1) {
            int& slot = singleton_id[subset[0]];
            if (slot < 0) {
                slot = static_cast<int>(subsets.size());
                subsets.push_back(subset);
            }
            return slot;
        }
        auto it = index.find(subset);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(subsets.size());
        index.emplace(subset, id);
        subsets.push_back(subset);
        return id;
    };

    std::vector<int> start{m.initial};
    close(start);
    state_of(start);

    std::vector<std::pair<int, int>> moves;  // (label, dst) over the whole subset
    std::vector<int> targets;
    for (int cur = 0; cur < static_cast<int>(subsets.size()); ++cur) {
        if (limit && (cur & 0x3ff) == 0) limit->enforce();
        const std::vector<int> subset = subsets[cur];  // subsets may grow below
        moves.clear();
        bool acc = false;
        for (int s : subset) {
            if (m.terminal[s]) acc = true;
            auto [b, e] = adj.range(s);
            moves.insert(moves.end(), b, e);
        }
        if (subset.size() > 1) std::sort(moves.begin(), moves.end());
        d.delta.emplace_back();
        d.accept.push_back(acc ? 1 : 0);
        auto& row = d.delta[cur];
        for (size_t i = 0; i < moves.size();) {
            int lab = moves[i].first;
            if (weak && lab == tau_id) {  // folded into the closure
                ++i;
                continue;
            }
            targets.clear();
            while (i < moves.size() && moves[i].first == lab) targets.push_back(moves[i++].second);
            close(targets);
            row.push_back({new_id[lab], state_of(targets)});
        }
        std::sort(row.begin(), row.end());
    }
    return d;
}

struct inclusion_result {
    bool holds;
    int explored;
    std::vector<std::string> counterexample;  // meaningful when !holds
};

/// Decides L(A) ⊆ L(B) on the determinized systems; on failure returns the
/// shortest distinguishing trace, breaking length ties by lexicographic
/// label order (DFA rows are name-ordered, so row order is witness order).
inline inclusion_result check_inclusion(const dfa& a, const dfa& b, const deadline* limit) {
    std::vector<int> to_b(a.labels.size(), -1);
    for (int l = 0; l < static_cast<int>(a.labels.size()); ++l) {
        auto it = std::lower_bound(b.labels.begin(), b.labels.end(), a.labels[l]);
        if (it != b.labels.end() && *it == a.labels[l])
            to_b[l] = static_cast<int>(it - b.labels.begin());
    }

    struct node { int da, db; };  // db == -1: B is stuck
    const long long stride = static_cast<long long>(b.accept.size()) + 2;
    std::unordered_map<long long, int> seen;
    std::vector<node> nodes;
    std::vector<std::pair<int, int>> parent;  // (node index, a-label)
    std::queue<int> queue;

    auto visit = [&](int da, int db, int from, int lab) {
        long long key = static_cast<long long>(da) * stride + (db + 1);
        auto [it, inserted] = seen.try_emplace(key, static_cast<int>(nodes.size()));
        if (!inserted) return;
        nodes.push_back({da, db});
        parent.push_back({from, lab});
        queue.push(it->second);
    };
    visit(a.initial, b.initial, -1, -1);

    int explored = 0;
    while (!queue.empty()) {
        if (limit && (explored & 0x3ff) == 0) limit->enforce();
        int cur = queue.front();
        queue.pop();
        ++explored;
        auto [da, db] = nodes[cur];
        bool b_accepts = db >= 0 && b.accept[db];
        if (a.accept[da] && !b_accepts) {
            std::vector<std::string> trace;
            for (int n = cur; parent[n].first >= 0; n = parent[n].first)
                trace.push_back(a.labels[parent[n].second]);
            std::reverse(trace.begin(), trace.end());
            return {false, explored, std::move(trace)};
        }
        for (const auto& [lab, na] : a.delta[da]) {
            int nb = (db >= 0 && to_b[lab] >= 0) ? b.move(db, to_b[lab]) : -1;
            visit(na, nb, cur, lab);
        }
    }
    return {true, explored, {}};
}

inline bool lex_less(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The relation checkers
// ---------------------------------------------------------------------------

/// Decides (weak) trace inclusion or equivalence of completed traces.
/// Inclusion is directional: lhs ⊆ rhs.
inline verdict trace_relation(const lts& lhs, const lts& rhs, bool equality, bool weak,
                              const deadline* limit = nullptr) {
    verdict v;
    v.kind = equality ? (weak ? relation_kind::weak_trace_eq : relation_kind::trace_eq)
                      : (weak ? relation_kind::weak_trace_incl : relation_kind::trace_incl);
    v.stats.states_lhs = lhs.num_states;
    v.stats.states_rhs = rhs.num_states;
    auto t0 = std::chrono::steady_clock::now();

    detail::dfa dl = detail::determinize(lhs, weak, limit);
    detail::dfa dr = detail::determinize(rhs, weak, limit);
    detail::inclusion_result fwd = detail::check_inclusion(dl, dr, limit);
    v.stats.iterations = fwd.explored;
    if (equality) {
        detail::inclusion_result bwd = detail::check_inclusion(dr, dl, limit);
        v.stats.iterations += bwd.explored;
        v.holds = fwd.holds && bwd.holds;
        if (!v.holds) {
            if (!fwd.holds && (!bwd.holds ? detail::lex_less(fwd.counterexample, bwd.counterexample)
                                          : true))
                v.counterexample = fwd.counterexample;
            else
                v.counterexample = bwd.counterexample;
        }
    } else {
        v.holds = fwd.holds;
        if (!v.holds) v.counterexample = fwd.counterexample;
    }
    v.stats.millis =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

/// Decides strong or weak bisimilarity by partition refinement on the
/// disjoint union (weak: on the saturated systems).  When the verdict is
/// negative and the two completed-trace languages differ, the shortest
/// distinguishing trace is attached.
inline verdict bisimulation(const lts& lhs, const lts& rhs, bool weak,
                            const deadline* limit = nullptr) {
    verdict v;
    v.kind = weak ? relation_kind::weak_bisim : relation_kind::strong_bisim;
    v.stats.states_lhs = lhs.num_states;
    v.stats.states_rhs = rhs.num_states;
    auto t0 = std::chrono::steady_clock::now();

    detail::bool_result r = weak ? detail::bisim_core(saturate(lhs), saturate(rhs), limit)
                                 : detail::bisim_core(lhs, rhs, limit);
    v.holds = r.holds;
    v.stats.iterations = r.iterations;
    if (!v.holds) {
        verdict langs = trace_relation(lhs, rhs, true, weak, limit);
        if (!langs.holds) v.counterexample = langs.counterexample;
    }
    v.stats.millis =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

inline verdict strong_bisim(const lts& lhs, const lts& rhs, const deadline* limit = nullptr) {
    return bisimulation(lhs, rhs, false, limit);
}
inline verdict weak_bisim(const lts& lhs, const lts& rhs, const deadline* limit = nullptr) {
    return bisimulation(lhs, rhs, true, limit);
}

/// Decides whether rhs (weakly) simulates lhs, i.e. lhs ⪯ rhs: every move of
/// lhs can be matched by rhs, transitively, and completion transfers.
inline verdict simulation(const lts& lhs, const lts& rhs, bool weak,
                          const deadline* limit = nullptr) {
    verdict v;
    v.kind = weak ? relation_kind::weak_sim : relation_kind::strong_sim;
    v.stats.states_lhs = lhs.num_states;
    v.stats.states_rhs = rhs.num_states;
    auto t0 = std::chrono::steady_clock::now();

    detail::bool_result r;
    if (weak) {
        lts sl = saturate(lhs), sr = saturate(rhs);
        r = detail::sim_core(sl, sr, detail::map_labels(sl, sr), limit);
    } else {
        r = detail::sim_core(lhs, rhs, detail::map_labels(lhs, rhs), limit);
    }
    v.holds = r.holds;
    v.stats.iterations = r.iterations;
    if (!v.holds) {
        verdict langs = trace_relation(lhs, rhs, false, weak, limit);
        if (!langs.holds) v.counterexample = langs.counterexample;
    }
    v.stats.millis =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return v;
}

/// Dispatch over all relation kinds.
inline verdict check(const lts& lhs, const lts& rhs, relation_kind kind,
                     const deadline* limit = nullptr) {
    switch (kind) {
        case relation_kind::strong_bisim: return bisimulation(lhs, rhs, false, limit);
        case relation_kind::weak_bisim: return bisimulation(lhs, rhs, true, limit);
        case relation_kind::strong_sim: return simulation(lhs, rhs, false, limit);
        case relation_kind::weak_sim: return simulation(lhs, rhs, true, limit);
        case relation_kind::trace_eq: return trace_relation(lhs, rhs, true, false, limit);
        case relation_kind::trace_incl: return trace_relation(lhs, rhs, false, false, limit);
        case relation_kind::weak_trace_eq: return trace_relation(lhs, rhs, true, true, limit);
        case relation_kind::weak_trace_incl: return trace_relation(lhs, rhs, false, true, limit);
    }
    throw lts_error("unknown relation kind");
}

// ---------------------------------------------------------------------------
// Verdict serialization
// ---------------------------------------------------------------------------

inline std::string format_trace(const std::vector<std::string>& t) {
    if (t.empty()) return "(empty)";
    std::string out;
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) out += ',';
        out += t[i];
    }
    return out;
}

/// Single-line machine-readable record:
///   kind=<K> holds=<bool> cex=<trace-or-none> states=<n1>,<n2> millis=<t>
inline std::string verdict_line(const verdict& v) {
    char millis[32];
    std::snprintf(millis, sizeof millis, "%.3f", v.stats.millis);
    std::string out = "kind=";
    out += kind_name(v.kind);
    out += " holds=";
    out += v.holds ? "true" : "false";
    out += " cex=";
    out += v.counterexample ? format_trace(*v.counterexample) : "none";
    out += " states=" + std::to_string(v.stats.states_lhs) + "," +
           std::to_string(v.stats.states_rhs);
    out += " millis=";
    out += millis;
    return out;
}

inline std::string verdict_report(const verdict& v) {
    char millis[32];
    std::snprintf(millis, sizeof millis, "%.3f", v.stats.millis);
    std::string out;
    out += std::string("relation:        ") + kind_name(v.kind) + "\n";
    out += std::string("holds:           ") + (v.holds ? "yes" : "no") + "\n";
    out += "counterexample:  " +
           (v.counterexample ? format_trace(*v.counterexample) : std::string("none")) + "\n";
    out += "states:          " + std::to_string(v.stats.states_lhs) + " vs " +
           std::to_string(v.stats.states_rhs) + "\n";
    out += "iterations:      " + std::to_string(v.stats.iterations) + "\n";
    out += std::string("time:            ") + millis + " ms\n";
    return out;
}

}  // namespace ltscheck
