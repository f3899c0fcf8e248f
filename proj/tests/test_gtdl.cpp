#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace ltscheck;
using namespace ltscheck::testing;

static std::vector<gtdl_rule> lokibot_rules() {
    return parse_gtdl(read_file(std::string(FIXTURE_DIR) + "/lokibot.gtdl"));
}

static const gtdl_rule& rule_named(const std::vector<gtdl_rule>& rules, const std::string& name) {
    for (const gtdl_rule& r : rules)
        if (r.name == name) return r;
    throw std::runtime_error("missing rule " + name);
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

TEST_CASE("parse_gtdl reads the lokibot fixture") {
    std::vector<gtdl_rule> rules = lokibot_rules();
    REQUIRE(rules.size() == 5);

    const gtdl_rule& process = rule_named(rules, "LokibotProcess");
    CHECK(process.apply_when == "Process");
    REQUIRE(process.body.assigns.size() == 2);
    CHECK(process.body.assigns[0].k == assign::source_kind::plugin);
    CHECK(process.body.assigns[0].call.function == "IsProcessName");
    CHECK(process.body.assigns[0].call.argument == "ytpgwim");
    REQUIRE(process.body.tail == block::tail_kind::conditional);
    CHECK(process.body.branches[0].tail == block::tail_kind::action);
    CHECK(process.body.branches[0].action_flag == "LokibotProcess");
    CHECK(process.body.branches[1].tail == block::tail_kind::none);  // omitted ELSE

    const gtdl_rule& incident = rule_named(rules, "LokibotIncident");
    REQUIRE(incident.body.assigns.size() == 4);
    for (const assign& a : incident.body.assigns) CHECK(a.k == assign::source_kind::flag);
    rule_inputs inputs = collect_inputs(incident);
    CHECK(inputs.flag_reads ==
          std::vector<std::string>{"LokibotProcess", "BotExtensions", "TempRunKey",
                                   "KnownCCAccesed"});
    CHECK(flags_set(incident) == std::vector<std::string>{"LokibotIncidentDetected"});
    // condition is the conjunction of the four reads
    CHECK(incident.body.tail == block::tail_kind::conditional);
    CHECK(incident.body.condition.k == cond::kind::conj);
}

TEST_CASE("parse_gtdl accepts both assignment tokens") {
    auto with_colon = parse_gtdl(
        "[DETECTION] Detection_name = 'R'\n[RULE]\nv := inPluginCall(F, \"x\");\n"
        "IF v THEN GlobalFlag.Set(\"D\"); END IF\n");
    auto with_plain = parse_gtdl(
        "[DETECTION] Detection_name = 'R'\n[RULE]\nv = inPluginCall(F, \"x\");\n"
        "IF v THEN GlobalFlag.Set(\"D\"); END IF\n");
    CHECK(with_colon.size() == 1);
    CHECK(with_plain.size() == 1);
}

TEST_CASE("parse_gtdl scope and syntax errors") {
    SECTION("unassigned variable in a condition") {
        CHECK_THROWS_AS(parse_gtdl("[DETECTION] Detection_name = 'R'\n[RULE]\n"
                                   "IF x THEN GlobalFlag.Set(\"D\"); END IF\n"),
                        parse_error);
    }
    SECTION("unassigned variable in an expression source") {
        CHECK_THROWS_AS(parse_gtdl("[DETECTION] Detection_name = 'R'\n[RULE]\n"
                                   "v = w;\nGlobalFlag.Set(\"D\");\n"),
                        parse_error);
    }
    SECTION("non-Boolean literal") {
        try {
            parse_gtdl("[DETECTION] Detection_name = 'R'\n[RULE]\nv = 5;\nGlobalFlag.Set(\"D\");\n");
            FAIL("expected an error");
        } catch (const parse_error& e) {
            CHECK(std::string(e.what()).find("non-Boolean") != std::string::npos);
            CHECK(e.line == 3);
        }
    }
    SECTION("statements after a terminating action are rejected") {
        CHECK_THROWS_AS(parse_gtdl("[DETECTION] Detection_name = 'R'\n[RULE]\n"
                                   "GlobalFlag.Set(\"D\");\nv = true;\n"),
                        parse_error);
    }
    SECTION("missing section header") {
        CHECK_THROWS_AS(parse_gtdl("Detection_name = 'R'\n"), parse_error);
    }
    SECTION("empty rule body") {
        CHECK_THROWS_AS(parse_gtdl("[DETECTION] Detection_name = 'R'\n[RULE]\n"), parse_error);
    }
}

TEST_CASE("parse_gtdl handles nested conditionals and ELSE") {
    auto rules = parse_gtdl(
        "[DETECTION] Detection_name = 'Nested'\n[RULE]\n"
        "a = inPluginCall(P, \"1\");\n"
        "b = inPluginCall(Q, \"2\");\n"
        "IF a THEN\n"
        "  GlobalFlag.Set(\"X\");\n"
        "ELSE\n"
        "  IF NOT b THEN GlobalFlag.Set(\"Y\"); END IF\n"
        "END IF\n");
    REQUIRE(rules.size() == 1);
    const block& body = rules[0].body;
    REQUIRE(body.tail == block::tail_kind::conditional);
    REQUIRE(body.branches[1].tail == block::tail_kind::conditional);
    CHECK(body.branches[1].condition.k == cond::kind::neg);
    CHECK(flags_set(rules[0]) == std::vector<std::string>{"X", "Y"});
}

TEST_CASE("print_gtdl round-trips the term") {
    std::vector<gtdl_rule> rules = lokibot_rules();
    CHECK(parse_gtdl(print_gtdl(rules)) == rules);

    auto nested = parse_gtdl(
        "[DETECTION] Detection_name = 'N'\n[RULE]\n"
        "a = inPluginCall(P, \"1\");\nb = a;\n"
        "IF NOT a OR b AND a == true THEN GlobalFlag.Set(\"X\");\n"
        "ELSE IF b != false THEN GlobalFlag.Set(\"Y\"); END IF END IF\n");
    CHECK(parse_gtdl(print_gtdl(nested)) == nested);

    // conditions the parenthesis-free grammar cannot express are rejected
    gtdl_rule bad;
    bad.name = "Bad";
    bad.body.tail = block::tail_kind::conditional;
    bad.body.condition = cond::binary(
        cond::kind::conj, cond::of_var("x"),
        cond::binary(cond::kind::disj, cond::of_var("x"), cond::of_var("x")));
    bad.body.branches.resize(2);
    bad.body.branches[0].tail = block::tail_kind::action;
    bad.body.branches[0].action_flag = "D";
    CHECK_THROWS_AS(print_gtdl({bad}), lts_error);
}

// ---------------------------------------------------------------------------
// Valuation of expressions and conditions
// ---------------------------------------------------------------------------

TEST_CASE("eval matches the truth tables") {
    store st{{"v", true}, {"w", false}};
    CHECK(eval(cond::negate(cond::of_expr(expr::lit(false))), st));
    CHECK(eval(cond::compare(cond::kind::eq, "v", expr::lit(true)), st));
    CHECK_FALSE(eval(cond::compare(cond::kind::eq, "w", expr::lit(true)), st));
    CHECK(eval(cond::compare(cond::kind::ne, "w", expr::lit(true)), st));
    CHECK(eval(cond::compare(cond::kind::eq, "v", expr::ref("v")), st));

    for (bool x : {false, true})
        for (bool y : {false, true}) {
            store s{{"x", x}, {"y", y}};
            CHECK(eval(cond::binary(cond::kind::conj, cond::of_var("x"), cond::of_var("y")), s) ==
                  (x && y));
            CHECK(eval(cond::binary(cond::kind::disj, cond::of_var("x"), cond::of_var("y")), s) ==
                  (x || y));
            CHECK(eval(cond::negate(cond::of_var("x")), s) == !x);
        }

    CHECK_THROWS_AS(eval(cond::of_var("missing"), st), lts_error);
}

// ---------------------------------------------------------------------------
// Small-step semantics
// ---------------------------------------------------------------------------

TEST_CASE("a detection action steps to halt with the flag as its label") {
    gtdl_rule rule;
    rule.name = "R";
    rule.body.tail = block::tail_kind::action;
    rule.body.action_flag = "d";
    program p = compile_rule(rule);
    configuration c{p.entry, {}};
    auto s = step(p, c, {});
    REQUIRE(s.has_value());
    CHECK(s->label == "d");
    CHECK(complete(p, s->next));
    CHECK_FALSE(step(p, s->next, {}).has_value());
}

TEST_CASE("a conditional silently selects its branch") {
    auto rules = parse_gtdl(
        "[DETECTION] Detection_name = 'R'\n[RULE]\n"
        "IF true THEN GlobalFlag.Set(\"A\"); ELSE GlobalFlag.Set(\"B\"); END IF\n");
    program p = compile_rule(rules[0]);
    configuration c{p.entry, {}};
    auto s = step(p, c, {});
    REQUIRE(s.has_value());
    CHECK(s->silent());
    auto s2 = step(p, s->next, {});
    REQUIRE(s2.has_value());
    CHECK(s2->label == "A");
}

TEST_CASE("the lokibot process rule runs silent,silent,silent,flag when both inputs hold") {
    const gtdl_rule rule = rule_named(lokibot_rules(), "LokibotProcess");
    program p = compile_rule(rule);
    rule_inputs inputs = collect_inputs(rule);
    REQUIRE(inputs.plugins.size() == 2);

    valuation val;
    val.plugins[inputs.plugins[0]] = true;
    val.plugins[inputs.plugins[1]] = true;
    rule_run run = run_rule(p, val);
    CHECK(run.labels == std::vector<std::string>{"", "", "", "LokibotProcess"});

    // the other three valuations end silently
    for (int v = 0; v < 3; ++v) {
        valuation other;
        other.plugins[inputs.plugins[0]] = v & 1;
        other.plugins[inputs.plugins[1]] = v & 2;
        CHECK_FALSE(run_rule(p, other).detection().has_value());
    }
}

TEST_CASE("the semantics is deterministic and terminates within its statement count") {
    std::mt19937_64 rng(777333);
    for (int i = 0; i < 300; ++i) {
        gtdl_rule rule = random_rule(rng);
        program p = compile_rule(rule);
        valuation val = random_valuation(rng, collect_inputs(rule));

        configuration c{p.entry, {}};
        int steps = 0, observables = 0;
        while (true) {
            auto s = step(p, c, val);
            auto again = step(p, c, val);  // same configuration, same valuation
            CHECK(s.has_value() == again.has_value());
            if (!s) break;
            CHECK(s->label == again->label);
            CHECK(s->next.node == again->next.node);
            CHECK(s->next.st == again->next.st);
            if (!s->silent()) ++observables;
            c = s->next;
            ++steps;
        }
        CHECK(steps <= p.statement_count);
        CHECK(observables <= 1);
        // the run agrees with the big-step oracle
        CHECK(run_rule(p, val).detection() == rule_detection_oracle(rule, val));
    }
}

// ---------------------------------------------------------------------------
// rule_to_lts
// ---------------------------------------------------------------------------

TEST_CASE("rule_to_lts of an unconditional action") {
    auto rules = parse_gtdl("[DETECTION] Detection_name = 'R'\n[RULE]\nGlobalFlag.Set(\"D\");\n");
    lts m = rule_to_lts(rules[0]);
    CHECK(enumerate_traces(m, true) == trace_set{t({"D"})});
}

TEST_CASE("rule_to_lts branches over every valuation") {
    const gtdl_rule rule = rule_named(lokibot_rules(), "LokibotProcess");
    lts m = rule_to_lts(rule);
    int branches = 0;
    for (const transition& tr : m.transitions)
        if (tr.src == m.initial && tr.label == tau_id) ++branches;
    CHECK(branches == 4);  // two Boolean inputs
    CHECK(enumerate_traces(m, true) == trace_set{t({}), t({"LokibotProcess"})});
}

TEST_CASE("an unsatisfiable guard never detects") {
    auto rules = parse_gtdl(
        "[DETECTION] Detection_name = 'R'\n[RULE]\n"
        "a = inPluginCall(P, \"x\");\n"
        "IF a AND NOT a THEN GlobalFlag.Set(\"D\"); END IF\n");
    CHECK(enumerate_traces(rule_to_lts(rules[0]), true) == trace_set{t({})});
}

TEST_CASE("rule_to_lts weak traces match the detection oracle on random rules") {
    std::mt19937_64 rng(191817);
    int tested = 0;
    for (int i = 0; i < 200; ++i) {
        gtdl_rule rule = random_rule(rng, 3, 2);
        rule_inputs inputs = collect_inputs(rule);
        if (inputs.count() > 6) continue;
        ++tested;

        trace_set expected;
        for (std::uint32_t v = 0; v < (1u << inputs.count()); ++v) {
            valuation val;
            int bit = 0;
            for (const plugin_call& c : inputs.plugins) val.plugins[c] = (v >> bit++) & 1;
            for (const std::string& f : inputs.flag_reads) val.flags[f] = (v >> bit++) & 1;
            auto detected = rule_detection_oracle(rule, val);
            expected.insert(detected ? trace{*detected} : trace{});
        }
        CHECK(enumerate_traces(rule_to_lts(rule), true) == expected);
    }
    CHECK(tested > 100);
}

TEST_CASE("rule_to_lts validates the universe") {
    const gtdl_rule rule = rule_named(lokibot_rules(), "LokibotProcess");
    rule_inputs incomplete;  // misses both plugin calls
    CHECK_THROWS_AS(rule_to_lts(rule, incomplete), lts_error);
}

// ---------------------------------------------------------------------------
// engine_to_lts
// ---------------------------------------------------------------------------

static std::vector<gtdl_rule> guarded_emitters(int n) {
    std::string text;
    for (int i = 1; i <= n; ++i) {
        text += "[DETECTION] Detection_name = 'Sig" + std::to_string(i) + "'\n[RULE]\n";
        text += "v = inPluginCall(Sees, \"e" + std::to_string(i) + "\");\n";
        text += "IF v THEN GlobalFlag.Set(\"f" + std::to_string(i) + "\"); END IF\n";
    }
    return parse_gtdl(text);
}

TEST_CASE("independent guarded rules produce every subset in every order") {
    lts engine = engine_to_lts(guarded_emitters(3));
    trace_set expected;
    std::vector<std::string> flags{"f1", "f2", "f3"};
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<std::string> subset;
        for (int i = 0; i < 3; ++i)
            if (mask & (1 << i)) subset.push_back(flags[i]);
        trace_set perms = permutations_of(subset);
        expected.insert(perms.begin(), perms.end());
    }
    REQUIRE(expected.size() == 16);
    CHECK(enumerate_traces(engine, true) == expected);
}

TEST_CASE("an engine without flag cross-references is the shuffle of its rule LTSs") {
    std::vector<gtdl_rule> rules = guarded_emitters(2);
    rules.push_back(parse_gtdl("[DETECTION] Detection_name = 'Plain'\n[RULE]\n"
                               "GlobalFlag.Set(\"g\");\n")[0]);
    lts engine = engine_to_lts(rules);
    std::vector<lts> parts;
    for (const gtdl_rule& r : rules) parts.push_back(rule_to_lts(r));
    CHECK(weak_bisim(engine, shuffle(parts)).holds);
}

TEST_CASE("flag rendezvous sequences a chain of reader rules") {
    auto rules = parse_gtdl(
        "[DETECTION] Detection_name = 'First'\n[RULE]\nGlobalFlag.Set(\"f1\");\n"
        "[DETECTION] Detection_name = 'Second'\n[RULE]\n"
        "p = GlobalFlag.IsSet(\"f1\");\nIF p THEN GlobalFlag.Set(\"f2\"); END IF\n"
        "[DETECTION] Detection_name = 'Third'\n[RULE]\n"
        "p = GlobalFlag.IsSet(\"f2\");\nIF p THEN GlobalFlag.Set(\"f3\"); END IF\n");
    lts engine = engine_to_lts(rules);
    CHECK(enumerate_traces(engine, true) == trace_set{t({"f1", "f2", "f3"})});
}

TEST_CASE("the lokibot engine completes with every flag order followed by the incident") {
    lts engine = engine_to_lts(lokibot_rules());
    trace_set expected = append_to_all(
        permutations_of({"LokibotProcess", "BotExtensions", "TempRunKey", "KnownCCAccesed"}),
        "LokibotIncidentDetected");
    REQUIRE(expected.size() == 24);
    CHECK(enumerate_traces(engine, true) == expected);
}

TEST_CASE("removing a signature leaves the incident unreachable") {
    std::vector<gtdl_rule> mutant = remove_signature(lokibot_rules(), "BotExtensions");
    REQUIRE(mutant.size() == 4);
    lts engine = engine_to_lts(mutant);
    trace_set traces = enumerate_traces(engine, true);
    for (const trace& tr : traces)
        CHECK(std::find(tr.begin(), tr.end(), "BotExtensions") == tr.end());

    lts tree = tree_to_lts(parse_tree(read_file(std::string(FIXTURE_DIR) + "/lokibot.tree.yaml")).root);
    verdict v = trace_relation(tree, engine, false, true);
    CHECK_FALSE(v.holds);
    REQUIRE(v.counterexample.has_value());
    CHECK(std::find(v.counterexample->begin(), v.counterexample->end(), "BotExtensions") !=
          v.counterexample->end());
}

TEST_CASE("a dangling flag read is rejected") {
    auto rules = parse_gtdl(
        "[DETECTION] Detection_name = 'Reader'\n[RULE]\n"
        "p = GlobalFlag.IsSet(\"nothing\");\nIF p THEN GlobalFlag.Set(\"d\"); END IF\n");
    CHECK_THROWS_AS(engine_to_lts(rules), lts_error);
}

TEST_CASE("an external declaration supplies the missing flag") {
    auto rules = parse_gtdl(
        "[DETECTION] Detection_name = 'Reader'\n[RULE]\n"
        "p = GlobalFlag.IsSet(\"env\");\nIF p THEN GlobalFlag.Set(\"d\"); END IF\n");
    engine_wiring wiring;
    wiring.externals.insert("env");
    lts engine = engine_to_lts(rules, wiring);
    CHECK(enumerate_traces(engine, true) == trace_set{t({"env", "d"})});
}

TEST_CASE("wiring renames flags onto the shared alphabet") {
    auto rules = parse_gtdl("[DETECTION] Detection_name = 'R'\n[RULE]\nGlobalFlag.Set(\"raw\");\n");
    engine_wiring wiring;
    wiring.rename["raw"] = "wired";
    CHECK(enumerate_traces(engine_to_lts(rules, wiring), true) == trace_set{t({"wired"})});
}

TEST_CASE("loop unrolling repeats the engine round") {
    auto rules = parse_gtdl("[DETECTION] Detection_name = 'R'\n[RULE]\nGlobalFlag.Set(\"f\");\n");
    CHECK(strong_bisim(engine_to_lts(rules, {}, 1), engine_to_lts(rules)).holds);
    CHECK(enumerate_traces(engine_to_lts(rules, {}, 2), true) == trace_set{t({"f", "f"})});
    CHECK_THROWS_AS(engine_to_lts(rules, {}, 0), lts_error);
}
