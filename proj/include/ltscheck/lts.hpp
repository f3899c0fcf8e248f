// lts.hpp — finite labeled transition systems and their composition operators.
//
// The LTS is the common semantic domain of the toolkit: attack trees and
// detection rule sets both compile into it, and the equivalence module
// decides conformance relations over it.  All systems built here are finite;
// the composition operators keep them acyclic.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ltscheck {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct lts_error : std::runtime_error {
    explicit lts_error(const std::string& what) : std::runtime_error(what) {}
};

/// Error raised by the text-format parsers (tree files, GTDL files, LTS dumps).
struct parse_error : std::runtime_error {
    int line;
    int column;
    parse_error(const std::string& what, int line_, int column_ = 0)
        : std::runtime_error("line " + std::to_string(line_) +
                             (column_ > 0 ? ":" + std::to_string(column_) : "") + ": " + what),
          line(line_), column(column_) {}
};

/// Raised when a cooperative deadline expires inside a long-running check.
struct timeout_error : std::runtime_error {
    timeout_error() : std::runtime_error("operation timed out") {}
};

/// Cooperative deadline checked periodically by the long-running algorithms.
struct deadline {
    std::chrono::steady_clock::time_point at;

    static deadline in_seconds(double secs) {
        return {std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(secs))};
    }
    bool expired() const { return std::chrono::steady_clock::now() >= at; }
    void enforce() const {
        if (expired()) throw timeout_error();
    }
};

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------
//
// Transition labels are interned per LTS.  Index 0 is always the silent
// action, spelled "tau"; that name is reserved and cannot be used for an
// observable action.  Observable names are non-empty.

inline constexpr int tau_id = 0;
inline constexpr const char* tau_name = "tau";

struct transition {
    int src;
    int label;
    int dst;
    auto operator<=>(const transition&) const = default;
};

// ---------------------------------------------------------------------------
// The LTS itself
// ---------------------------------------------------------------------------

struct lts {
    int num_states = 1;
    int initial = 0;
    std::vector<std::string> labels{tau_name};  // label id -> name, id 0 = tau
    std::vector<transition> transitions;        // kept sorted and duplicate-free
    std::vector<char> terminal;                 // successful-completion markers

    lts() : terminal(1, 0) {}
    explicit lts(int states) : num_states(states), terminal(states, 0) {
        if (states <= 0) throw lts_error("an LTS needs at least one state");
    }

    /// Interns an observable label name, returning its id.
    int intern(std::string_view name) {
        if (name.empty()) throw lts_error("observable labels must have a non-empty name");
        if (name == tau_name) return tau_id;
        for (int i = 1; i < static_cast<int>(labels.size()); ++i)
            if (labels[i] == name) return i;
        labels.emplace_back(name);
        return static_cast<int>(labels.size()) - 1;
    }

    int find_label(std::string_view name) const {
        for (int i = 0; i < static_cast<int>(labels.size()); ++i)
            if (labels[i] == name) return i;
        return -1;
    }

    const std::string& label_name(int id) const { return labels.at(id); }

    void add_transition(int src, int label, int dst) {
        transitions.push_back({src, label, dst});
    }
    void add_transition(int src, std::string_view name, int dst) {
        transitions.push_back({src, intern(name), dst});
    }

    void mark_terminal(int state) { terminal.at(state) = 1; }
    bool is_terminal(int state) const { return terminal.at(state) != 0; }

    bool has_tau() const {
        return std::any_of(transitions.begin(), transitions.end(),
                           [](const transition& t) { return t.label == tau_id; });
    }

    /// Sorts transitions, drops duplicates (set semantics of the transition
    /// relation) and checks the structural invariants.
    void finalize() {
        std::sort(transitions.begin(), transitions.end());
        transitions.erase(std::unique(transitions.begin(), transitions.end()), transitions.end());
        if (initial < 0 || initial >= num_states) throw lts_error("initial state out of range");
        if (static_cast<int>(terminal.size()) != num_states)
            terminal.resize(num_states, 0);
        for (const transition& t : transitions) {
            if (t.src < 0 || t.src >= num_states || t.dst < 0 || t.dst >= num_states)
                throw lts_error("transition endpoint out of range");
            if (t.label < 0 || t.label >= static_cast<int>(labels.size()))
                throw lts_error("transition label out of range");
        }
    }

    std::vector<int> terminal_states() const {
        std::vector<int> out;
        for (int s = 0; s < num_states; ++s)
            if (terminal[s]) out.push_back(s);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Adjacency helper (per-state outgoing transitions, CSR layout)
// ---------------------------------------------------------------------------

struct adjacency {
    std::vector<int> offsets;              // num_states + 1
    std::vector<std::pair<int, int>> out;  // (label, dst), sorted per state

    explicit adjacency(const lts& m) {
        offsets.assign(m.num_states + 1, 0);
        for (const transition& t : m.transitions) offsets[t.src + 1]++;
        for (int s = 0; s < m.num_states; ++s) offsets[s + 1] += offsets[s];
        out.resize(m.transitions.size());
        std::vector<int> fill(offsets.begin(), offsets.end() - 1);
        for (const transition& t : m.transitions) out[fill[t.src]++] = {t.label, t.dst};
        // transitions are sorted by (src, label, dst), so each span is sorted
    }

    std::pair<const std::pair<int, int>*, const std::pair<int, int>*> range(int s) const {
        return {out.data() + offsets[s], out.data() + offsets[s + 1]};
    }
};

// ---------------------------------------------------------------------------
// Label table merging for compositions
// ---------------------------------------------------------------------------

namespace detail {

/// Maps each part's label ids into the result's table; returns one remap
/// vector per part.
inline std::vector<std::vector<int>> merge_labels(lts& result,
                                                  const std::vector<const lts*>& parts) {
    std::vector<std::vector<int>> remap(parts.size());
    for (size_t p = 0; p < parts.size(); ++p) {
        remap[p].resize(parts[p]->labels.size());
        remap[p][tau_id] = tau_id;
        for (int l = 1; l < static_cast<int>(parts[p]->labels.size()); ++l)
            remap[p][l] = result.intern(parts[p]->labels[l]);
    }
    return remap;
}

inline std::vector<const lts*> part_pointers(const std::vector<lts>& parts) {
    std::vector<const lts*> out;
    out.reserve(parts.size());
    for (const lts& p : parts) out.push_back(&p);
    return out;
}

inline void require_nonempty(const std::vector<lts>& parts, const char* op) {
    if (parts.empty()) throw lts_error(std::string(op) + " requires at least one operand");
}

/// The gluing compositions assume no transition re-enters a part's initial
/// state.  Reachable acyclic systems satisfy this by construction.
inline void require_fresh_initial(const lts& part, const char* op) {
    for (const transition& t : part.transitions)
        if (t.dst == part.initial)
            throw lts_error(std::string(op) + ": operand initial state has incoming transitions");
}

struct int_vector_hash {
    size_t operator()(const std::vector<int>& v) const {
        size_t h = 1469598103934665603ull;
        for (int x : v) {
            h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Basic constructions
// ---------------------------------------------------------------------------

/// Two-state LTS performing a single observable action and completing.
inline lts make_leaf(const std::string& action) {
    if (action.empty() || action == tau_name)
        throw lts_error("silent action not allowed at leaf");
    lts m(2);
    m.add_transition(0, action, 1);
    m.mark_terminal(1);
    m.finalize();
    return m;
}

/// Alternative composition: the trace set of the result is the union of the
/// parts' trace sets.  Implemented by gluing all part initial states into a
/// fresh initial state, so no silent step is introduced.  Terminal states of
/// different parts stay distinct.
inline lts choice(const std::vector<lts>& parts) {
    detail::require_nonempty(parts, "choice");
    lts result;
    auto remap = detail::merge_labels(result, detail::part_pointers(parts));

    int next = 1;  // state 0 is the shared initial
    std::vector<std::vector<int>> state_map(parts.size());
    bool initial_terminal = false;
    for (size_t p = 0; p < parts.size(); ++p) {
        detail::require_fresh_initial(parts[p], "choice");
        state_map[p].assign(parts[p].num_states, -1);
        state_map[p][parts[p].initial] = 0;
        for (int s = 0; s < parts[p].num_states; ++s)
            if (s != parts[p].initial) state_map[p][s] = next++;
        if (parts[p].is_terminal(parts[p].initial)) initial_terminal = true;
    }

    result.num_states = next;
    result.terminal.assign(next, 0);
    if (initial_terminal) result.mark_terminal(0);
    for (size_t p = 0; p < parts.size(); ++p) {
        for (const transition& t : parts[p].transitions)
            result.add_transition(state_map[p][t.src], remap[p][t.label], state_map[p][t.dst]);
        for (int s = 0; s < parts[p].num_states; ++s)
            if (parts[p].is_terminal(s) && s != parts[p].initial)
                result.mark_terminal(state_map[p][s]);
    }
    result.finalize();
    return result;
}

/// Sequential composition: trace sets concatenate.  Each part's terminal
/// states are glued to the next part's initial state (again, no silent step).
inline lts sequence(const std::vector<lts>& parts) {
    detail::require_nonempty(parts, "sequence");
    lts acc = parts.front();
    for (size_t p = 1; p < parts.size(); ++p) {
        const lts& nxt = parts[p];
        detail::require_fresh_initial(nxt, "sequence");
        lts result;
        auto remap = detail::merge_labels(result, {&acc, &nxt});

        result.num_states = acc.num_states + nxt.num_states - 1;
        result.initial = acc.initial;
        result.terminal.assign(result.num_states, 0);

        // next-part states keep their order, with the initial dropped
        std::vector<int> nxt_map(nxt.num_states, -1);
        int id = acc.num_states;
        for (int s = 0; s < nxt.num_states; ++s)
            if (s != nxt.initial) nxt_map[s] = id++;

        for (const transition& t : acc.transitions)
            result.add_transition(t.src, remap[0][t.label], t.dst);
        for (const transition& t : nxt.transitions)
            if (t.src != nxt.initial)
                result.add_transition(nxt_map[t.src], remap[1][t.label], nxt_map[t.dst]);

        std::vector<int> glue = acc.terminal_states();
        for (const transition& t : nxt.transitions)
            if (t.src == nxt.initial)
                for (int g : glue)
                    result.add_transition(g, remap[1][t.label], nxt_map[t.dst]);

        for (int s = 0; s < nxt.num_states; ++s)
            if (nxt.is_terminal(s) && s != nxt.initial) result.mark_terminal(nxt_map[s]);
        // an accepting next-initial means the next part may contribute the
        // empty trace, so the glue points stay terminal
        if (nxt.is_terminal(nxt.initial))
            for (int g : glue) result.mark_terminal(g);

        result.finalize();
        acc = std::move(result);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Parallel composition
// ---------------------------------------------------------------------------

/// Synchronization table for `parallel`: maps a label name to the set of
/// component indices that must all move together on that label.  Labels that
/// do not appear here (and tau) interleave freely.
struct sync_table {
    std::map<std::string, std::vector<int>> groups;
};

/// Asynchronous product with optional multiway rendezvous.  The state space
/// is the cartesian product of the parts' state spaces restricted to what is
/// reachable; a product state is terminal when every component is terminal.
inline lts parallel(const std::vector<lts>& parts, const sync_table& sync = {}) {
    detail::require_nonempty(parts, "parallel");
    lts result;
    auto remap = detail::merge_labels(result, detail::part_pointers(parts));

    // which components synchronize on which result-label
    std::vector<std::vector<int>> sync_of_label(result.labels.size());
    for (const auto& [name, members] : sync.groups) {
        int id = result.find_label(name);
        if (id <= 0) continue;  // label never occurs, nothing to constrain
        std::vector<int> sorted = members;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (int m : sorted)
            if (m < 0 || m >= static_cast<int>(parts.size()))
                throw lts_error("sync group member out of range");
        sync_of_label[id] = std::move(sorted);
    }
    // per-part membership test
    std::vector<std::vector<char>> in_group(result.labels.size());
    for (size_t l = 0; l < sync_of_label.size(); ++l) {
        if (sync_of_label[l].empty()) continue;
        in_group[l].assign(parts.size(), 0);
        for (int m : sync_of_label[l]) in_group[l][m] = 1;
    }

    std::vector<adjacency> adj;
    adj.reserve(parts.size());
    for (const lts& p : parts) adj.emplace_back(p);

    std::unordered_map<std::vector<int>, int, detail::int_vector_hash> index;
    std::vector<std::vector<int>> tuples;
    auto state_of = [&](const std::vector<int>& tuple) {
        auto [it, inserted] = index.try_emplace(tuple, static_cast<int>(tuples.size()));
        if (inserted) tuples.push_back(tuple);
        return it->second;
    };

    std::vector<int> init(parts.size());
    for (size_t p = 0; p < parts.size(); ++p) init[p] = parts[p].initial;
    state_of(init);

    std::vector<transition> trans;
    for (int cur = 0; cur < static_cast<int>(tuples.size()); ++cur) {
        const std::vector<int> tuple = tuples[cur];  // copy: tuples may grow

        // free moves: one component advances alone
        for (size_t p = 0; p < parts.size(); ++p) {
            auto [b, e] = adj[p].range(tuple[p]);
            for (auto it = b; it != e; ++it) {
                int lab = remap[p][it->first];
                if (!in_group[lab].empty() && in_group[lab][p]) continue;  // synced elsewhere
                std::vector<int> nxt = tuple;
                nxt[p] = it->second;
                trans.push_back({cur, lab, state_of(nxt)});
            }
        }

        // rendezvous moves: every group member takes the label simultaneously
        for (int lab = 1; lab < static_cast<int>(result.labels.size()); ++lab) {
            const std::vector<int>& group = sync_of_label[lab];
            if (group.empty()) continue;
            std::vector<std::vector<int>> moves(group.size());
            bool enabled = true;
            for (size_t g = 0; g < group.size() && enabled; ++g) {
                int p = group[g];
                auto [b, e] = adj[p].range(tuple[p]);
                for (auto it = b; it != e; ++it)
                    if (remap[p][it->first] == lab) moves[g].push_back(it->second);
                enabled = !moves[g].empty();
            }
            if (!enabled) continue;
            // cartesian product over each member's candidate moves
            std::vector<size_t> pick(group.size(), 0);
            while (true) {
                std::vector<int> nxt = tuple;
                for (size_t g = 0; g < group.size(); ++g) nxt[group[g]] = moves[g][pick[g]];
                trans.push_back({cur, lab, state_of(nxt)});
                size_t g = 0;
                while (g < group.size() && ++pick[g] == moves[g].size()) pick[g++] = 0;
                if (g == group.size()) break;
            }
        }
    }

    result.num_states = static_cast<int>(tuples.size());
    result.terminal.assign(result.num_states, 0);
    for (int s = 0; s < result.num_states; ++s) {
        bool all = true;
        for (size_t p = 0; p < parts.size() && all; ++p)
            all = parts[p].is_terminal(tuples[s][p]);
        if (all) result.mark_terminal(s);
    }
    result.transitions = std::move(trans);
    result.finalize();
    return result;
}

/// Interleaving composition (the semantics of AND): a parallel product with
/// no synchronization at all.
inline lts shuffle(const std::vector<lts>& parts) { return parallel(parts, {}); }

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

using trace = std::vector<std::string>;
using trace_set = std::set<trace>;

/// All maximal traces from the initial state to a terminal-marked state.
/// With `weak` set, silent steps are erased from the result; without it the
/// input must be tau-free.  Cyclic input is rejected with the offending state.
inline trace_set enumerate_traces(const lts& m, bool weak = false) {
    if (!weak && m.has_tau())
        throw lts_error("observable trace enumeration on an LTS containing tau; use weak mode");
    adjacency adj(m);

    // iterative DFS with an explicit on-path mark for cycle detection
    trace_set out;
    std::vector<int> path_labels;
    std::vector<char> on_path(m.num_states, 0);
    struct frame {
        int state;
        const std::pair<int, int>* next;
        const std::pair<int, int>* end;
    };
    std::vector<frame> stack;
    auto push = [&](int s) {
        if (on_path[s])
            throw lts_error("cycle detected through state " + std::to_string(s));
        on_path[s] = 1;
        auto [b, e] = adj.range(s);
        stack.push_back({s, b, e});
        if (m.is_terminal(s)) {
            trace t;
            t.reserve(path_labels.size());
            for (int lab : path_labels)
                if (!(weak && lab == tau_id)) t.push_back(m.label_name(lab));
            out.insert(std::move(t));
        }
    };
    push(m.initial);
    while (!stack.empty()) {
        frame& f = stack.back();
        if (f.next == f.end) {
            on_path[f.state] = 0;
            stack.pop_back();
            if (!stack.empty()) path_labels.pop_back();
            continue;
        }
        auto [lab, dst] = *f.next++;
        path_labels.push_back(lab);
        push(dst);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tau closure and dead-state pruning
// ---------------------------------------------------------------------------

/// For each state, the set of states reachable via zero or more silent steps
/// (sorted, always containing the state itself).
inline std::vector<std::vector<int>> tau_closure(const lts& m) {
    adjacency adj(m);
    std::vector<std::vector<int>> closure(m.num_states);
    std::vector<int> seen(m.num_states, -1);
    for (int s = 0; s < m.num_states; ++s) {
        std::vector<int>& reach = closure[s];
        reach.push_back(s);
        seen[s] = s;
        for (size_t i = 0; i < reach.size(); ++i) {
            auto [b, e] = adj.range(reach[i]);
            for (auto it = b; it != e; ++it)
                if (it->first == tau_id && seen[it->second] != s) {
                    seen[it->second] = s;
                    reach.push_back(it->second);
                }
        }
        std::sort(reach.begin(), reach.end());
    }
    return closure;
}

/// Removes states from which no terminal-marked state is reachable (those
/// can never contribute a completed trace).  The initial state is kept even
/// when dead, yielding an LTS with an empty completed-trace language.
inline lts prune_dead_states(const lts& m) {
    std::vector<std::vector<int>> preds(m.num_states);
    for (const transition& t : m.transitions) preds[t.dst].push_back(t.src);
    std::vector<char> alive(m.num_states, 0);
    std::vector<int> work;
    for (int s = 0; s < m.num_states; ++s)
        if (m.is_terminal(s)) {
            alive[s] = 1;
            work.push_back(s);
        }
    while (!work.empty()) {
        int s = work.back();
        work.pop_back();
        for (int p : preds[s])
            if (!alive[p]) {
                alive[p] = 1;
                work.push_back(p);
            }
    }
    alive[m.initial] = 1;

    lts result;
    result.labels = m.labels;
    std::vector<int> map(m.num_states, -1);
    int next = 0;
    for (int s = 0; s < m.num_states; ++s)
        if (alive[s]) map[s] = next++;
    result.num_states = next;
    result.initial = map[m.initial];
    result.terminal.assign(next, 0);
    for (int s = 0; s < m.num_states; ++s)
        if (alive[s] && m.is_terminal(s)) result.mark_terminal(map[s]);
    for (const transition& t : m.transitions)
        if (alive[t.src] && alive[t.dst])
            result.add_transition(map[t.src], t.label, map[t.dst]);
    result.finalize();
    return result;
}

// ---------------------------------------------------------------------------
// Weak saturation
// ---------------------------------------------------------------------------

/// Materializes the weak transition relation: s =a=> t whenever
/// s -tau*-> . -a-> . -tau*-> t, plus a silent self-loop on every state
/// (s =tau=> s).  Terminal markers are widened to "terminal reachable via
/// tau*", so completed-trace acceptance is preserved under the weak reading.
inline lts saturate(const lts& m) {
    lts result;
    result.labels = m.labels;
    result.num_states = m.num_states;
    result.initial = m.initial;
    result.terminal.assign(m.num_states, 0);

    auto closure = tau_closure(m);
    adjacency adj(m);

    for (int s = 0; s < m.num_states; ++s) {
        for (int mid : closure[s]) {
            if (m.is_terminal(mid)) result.terminal[s] = 1;
            auto [b, e] = adj.range(mid);
            for (auto it = b; it != e; ++it) {
                if (it->first == tau_id) {
                    result.add_transition(s, tau_id, it->second);
                } else {
                    for (int t : closure[it->second])
                        result.add_transition(s, it->first, t);
                }
            }
        }
        result.add_transition(s, tau_id, s);
    }
    result.finalize();
    return result;
}

// ---------------------------------------------------------------------------
// Partition refinement and quotient minimization
// ---------------------------------------------------------------------------

struct refinement {
    std::vector<int> block;  // state -> block id (dense)
    int num_blocks = 0;
    int iterations = 0;
};

/// Signature-based partition refinement computing the coarsest bisimulation
/// that respects the given initial marks (states with different marks are
/// never merged).  Blocks only split, so the loop terminates.
inline refinement refine_blocks(int num_states, const std::vector<transition>& transitions,
                                const std::vector<char>& marks,
                                const deadline* limit = nullptr) {
    refinement r;
    r.block.assign(num_states, 0);
    bool any_marked = false, any_unmarked = false;
    for (int s = 0; s < num_states; ++s) {
        r.block[s] = marks[s] ? 1 : 0;
        (marks[s] ? any_marked : any_unmarked) = true;
    }
    if (!any_unmarked)
        for (int& b : r.block) b = 0;
    r.num_blocks = (any_marked && any_unmarked) ? 2 : 1;

    std::vector<std::vector<std::pair<int, int>>> sig(num_states);
    while (true) {
        if (limit) limit->enforce();
        r.iterations++;
        for (auto& v : sig) v.clear();
        for (const transition& t : transitions) sig[t.src].push_back({t.label, r.block[t.dst]});

        std::unordered_map<std::vector<int>, int, detail::int_vector_hash> ids;
        std::vector<int> next_block(num_states);
        for (int s = 0; s < num_states; ++s) {
            auto& v = sig[s];
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            std::vector<int> key;
            key.reserve(v.size() * 2 + 1);
            key.push_back(r.block[s]);
            for (auto [l, b] : v) {
                key.push_back(l);
                key.push_back(b);
            }
            auto [it, inserted] = ids.try_emplace(std::move(key), static_cast<int>(ids.size()));
            next_block[s] = it->second;
        }
        int count = static_cast<int>(ids.size());
        bool stable = (count == r.num_blocks);
        r.block = std::move(next_block);
        r.num_blocks = count;
        if (stable) break;
    }
    return r;
}

enum class bisim_kind { strong, weak };

/// Quotient of the LTS under the greatest (strong or weak) bisimulation that
/// respects completion markers.  The result is bisimilar to the input in the
/// chosen sense and its completed-trace language is unchanged.
inline lts minimize(const lts& m, bisim_kind kind = bisim_kind::strong) {
    const lts work = (kind == bisim_kind::weak) ? saturate(m) : m;
    refinement r = refine_blocks(work.num_states, work.transitions, work.terminal);

    // renumber blocks by first occurrence for a deterministic result
    std::vector<int> order(r.num_blocks, -1);
    int next = 0;
    for (int s = 0; s < work.num_states; ++s)
        if (order[r.block[s]] < 0) order[r.block[s]] = next++;

    lts q;
    q.labels = work.labels;
    q.num_states = r.num_blocks;
    q.initial = order[r.block[work.initial]];
    q.terminal.assign(r.num_blocks, 0);
    for (int s = 0; s < work.num_states; ++s)
        if (work.is_terminal(s)) q.terminal[order[r.block[s]]] = 1;
    for (const transition& t : work.transitions) {
        int bs = order[r.block[t.src]];
        int bd = order[r.block[t.dst]];
        if (t.label == tau_id && bs == bd) continue;  // drop silent self-steps
        q.add_transition(bs, t.label, bd);
    }
    q.finalize();
    return q;
}

// ---------------------------------------------------------------------------
// Interchange format
// ---------------------------------------------------------------------------
//
//   lts <numStates> <numTransitions> <initialState>
//   <src> <label> <dst>           (one line per transition, "tau" reserved)
//   terminal <id> <id> ...

inline std::string write_lts(const lts& m) {
    for (const std::string& name : m.labels)
        if (name.find_first_of(" \t\n\r") != std::string::npos)
            throw lts_error("label '" + name + "' contains whitespace and cannot be dumped");
    std::ostringstream os;
    os << "lts " << m.num_states << ' ' << m.transitions.size() << ' ' << m.initial << '\n';
    for (const transition& t : m.transitions)
        os << t.src << ' ' << m.label_name(t.label) << ' ' << t.dst << '\n';
    os << "terminal";
    for (int s : m.terminal_states()) os << ' ' << s;
    os << '\n';
    return os.str();
}

inline lts read_lts(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line;
    int line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(is, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    };

    if (!next_line()) throw parse_error("empty LTS dump", 1);
    std::istringstream hdr(line);
    std::string tag;
    int states = 0, count = 0, initial = 0;
    if (!(hdr >> tag >> states >> count >> initial) || tag != "lts")
        throw parse_error("expected header 'lts <numStates> <numTransitions> <initialState>'", line_no);
    if (states <= 0) throw parse_error("state count must be positive", line_no);

    lts m(states);
    m.initial = initial;
    for (int i = 0; i < count; ++i) {
        if (!next_line()) throw parse_error("unexpected end of dump inside transitions", line_no);
        std::istringstream ts(line);
        int src = 0, dst = 0;
        std::string label;
        if (!(ts >> src >> label >> dst))
            throw parse_error("expected '<src> <label> <dst>'", line_no);
        if (src < 0 || src >= states || dst < 0 || dst >= states)
            throw parse_error("transition endpoint out of range", line_no);
        m.add_transition(src, label == tau_name ? tau_id : m.intern(label), dst);
    }
    if (!next_line()) throw parse_error("missing terminal line", line_no);
    std::istringstream ter(line);
    std::string tag2;
    ter >> tag2;
    if (tag2 != "terminal") throw parse_error("expected 'terminal <id>...'", line_no);
    int id;
    while (ter >> id) {
        if (id < 0 || id >= states) throw parse_error("terminal id out of range", line_no);
        m.mark_terminal(id);
    }
    m.finalize();
    return m;
}

}  // namespace ltscheck
