#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

#include <fstream>

using namespace ltscheck;
using namespace ltscheck::testing;

static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

TEST_CASE("parse_tree handles flow style") {
    tree_document doc = parse_tree("{leaf: flag_a}");
    CHECK(doc.root.kind == node_kind::leaf);
    CHECK(doc.root.action == "flag_a");

    tree_document nested = parse_tree("{and: [{leaf: a}, {sand: [{leaf: b}, {leaf: c}]}]}");
    REQUIRE(nested.root.kind == node_kind::and_node);
    REQUIRE(nested.root.children.size() == 2);
    CHECK(nested.root.children[1].kind == node_kind::sand_node);
}

TEST_CASE("parse_tree handles block style with a name") {
    tree_document doc = parse_tree(
        "name: demo\n"
        "or:\n"
        "  - leaf: a\n"
        "  - and:\n"
        "      - leaf: b\n"
        "      - leaf: c\n");
    CHECK(doc.name == "demo");
    REQUIRE(doc.root.kind == node_kind::or_node);
    REQUIRE(doc.root.children.size() == 2);
    CHECK(doc.root.children[0].action == "a");
    REQUIRE(doc.root.children[1].kind == node_kind::and_node);
    CHECK(doc.root.children[1].children[1].action == "c");
}

TEST_CASE("parse_tree rejects bad input with positions") {
    SECTION("arity error") {
        try {
            parse_tree("{and: [ {leaf: a} ]}");
            FAIL("expected arity error");
        } catch (const parse_error& e) {
            CHECK(std::string(e.what()).find("at least 2") != std::string::npos);
        }
    }
    SECTION("unknown node kind") {
        CHECK_THROWS_AS(parse_tree("{xor: [{leaf: a}, {leaf: b}]}"), parse_error);
    }
    SECTION("syntax error carries a line number") {
        try {
            parse_tree("or:\n  - leaf: a\n  - leaf\n");
            FAIL("expected syntax error");
        } catch (const parse_error& e) {
            CHECK(e.line == 3);
        }
    }
    SECTION("arity applies to every composite") {
        CHECK_THROWS_AS(parse_tree("sand:\n  - leaf: a\n"), parse_error);
    }
}

TEST_CASE("the lokibot fixture parses to the expected shape") {
    tree_document doc = parse_tree(slurp(std::string(FIXTURE_DIR) + "/lokibot.tree.yaml"));
    CHECK(doc.name == "lokibot");
    REQUIRE(doc.root.kind == node_kind::sand_node);
    REQUIRE(doc.root.children.size() == 2);
    const attack_tree& stage = doc.root.children[0];
    REQUIRE(stage.kind == node_kind::and_node);
    REQUIRE(stage.children.size() == 4);
    CHECK(stage.children[0].action == "LokibotProcess");
    CHECK(stage.children[1].action == "BotExtensions");
    CHECK(stage.children[2].action == "TempRunKey");
    CHECK(stage.children[3].action == "KnownCCAccesed");
    CHECK(doc.root.children[1].action == "LokibotIncidentDetected");

    // the four-step stage alone compiles to the full product
    CHECK(tree_to_lts(stage).num_states == 16);
    CHECK(tree_to_lts(doc.root).num_states == 17);
}

TEST_CASE("pretty_print round-trips the term") {
    std::mt19937_64 rng(424242);
    for (int i = 0; i < 200; ++i) {
        attack_tree tree = random_tree(rng, 8, 4, 5);
        tree_document back = parse_tree(pretty_print(tree));
        CHECK(pretty_print(back.root) == pretty_print(tree));
    }
    // quoting odd action names survives the round trip
    attack_tree odd = attack_tree::ordered(
        {attack_tree::leaf("has space"), attack_tree::leaf("quote\"inside")});
    CHECK(pretty_print(parse_tree(pretty_print(odd)).root) == pretty_print(odd));
}

TEST_CASE("oracle_traces matches the inductive definition on worked examples") {
    attack_tree or_ab = attack_tree::any_of({attack_tree::leaf("a"), attack_tree::leaf("b")});
    CHECK(oracle_traces(or_ab) == trace_set{t({"a"}), t({"b"})});

    // one action interleaved with a two-step chain, expanded by hand
    attack_tree mix = attack_tree::all_of(
        {attack_tree::leaf("a"),
         attack_tree::ordered({attack_tree::leaf("b"), attack_tree::leaf("c")})});
    CHECK(oracle_traces(mix) ==
          trace_set{t({"a", "b", "c"}), t({"b", "a", "c"}), t({"b", "c", "a"})});

    attack_tree seq = attack_tree::ordered(
        {attack_tree::any_of({attack_tree::leaf("a"), attack_tree::leaf("b")}),
         attack_tree::leaf("c")});
    CHECK(oracle_traces(seq) == trace_set{t({"a", "c"}), t({"b", "c"})});
}

TEST_CASE("tree_to_lts agrees with the trace oracle") {
    SECTION("worked examples") {
        attack_tree sand_ab =
            attack_tree::ordered({attack_tree::leaf("a"), attack_tree::leaf("b")});
        lts m = tree_to_lts(sand_ab);
        CHECK(m.num_states == 3);
        CHECK(enumerate_traces(m) == trace_set{t({"a", "b"})});

        attack_tree and_ab = attack_tree::all_of({attack_tree::leaf("a"), attack_tree::leaf("b")});
        CHECK(enumerate_traces(tree_to_lts(and_ab)) == oracle_traces(and_ab));
    }
    SECTION("randomized correspondence") {
        std::mt19937_64 rng(555111);
        for (int i = 0; i < 500; ++i) {
            attack_tree tree = random_tree(rng, 8, 4, 5);
            lts m = tree_to_lts(tree);
            CHECK_FALSE(m.has_tau());
            CHECK(enumerate_traces(m) == oracle_traces(tree));
        }
    }
}

TEST_CASE("AND over distinct leaves has factorially many maximal traces") {
    for (int n = 2; n <= 7; ++n) {
        std::vector<attack_tree> leaves;
        for (int i = 0; i < n; ++i) leaves.push_back(attack_tree::leaf("x" + std::to_string(i)));
        attack_tree tree = attack_tree::all_of(std::move(leaves));
        long factorial = 1;
        for (int i = 2; i <= n; ++i) factorial *= i;
        CHECK(static_cast<long>(oracle_traces(tree).size()) == factorial);
        CHECK(static_cast<long>(enumerate_traces(tree_to_lts(tree)).size()) == factorial);
    }
}

TEST_CASE("duplicate leaf actions are allowed and yield distinct states") {
    attack_tree tree = attack_tree::all_of({attack_tree::leaf("e"), attack_tree::leaf("e")});
    lts m = tree_to_lts(tree);
    CHECK(m.num_states == 4);
    CHECK(enumerate_traces(m) == trace_set{t({"e", "e"})});
}
