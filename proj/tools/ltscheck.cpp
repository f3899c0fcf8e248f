// ltscheck — compile attack trees and GTDL rule sets into LTSs, decide
// conformance relations between them, emit LNT models, and run the
// parametric benchmark families.
//
// Exit codes: 0 the check holds (or the command succeeded), 1 the check
// fails, 2 parse error, 3 I/O error, 4 timeout.

#include "CLI11.hpp"
#include "json.hpp"

#include "ltscheck/attack_tree.hpp"
#include "ltscheck/bench.hpp"
#include "ltscheck/equivalence.hpp"
#include "ltscheck/gtdl.hpp"
#include "ltscheck/lnt.hpp"

#include <fstream>
#include <iostream>

using namespace ltscheck;

namespace {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw io_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) throw io_error("cannot write " + path);
    out << content;
}

struct options {
    std::string format = "human";
    double timeout_secs = 0;  // 0: no limit
    int loop_bound = 1;
    std::vector<std::string> externals;
};

engine_wiring wiring_from(const options& opt) {
    engine_wiring w;
    for (const std::string& f : opt.externals) w.externals.insert(f);
    return w;
}

lts load_tree_lts(const std::string& path) {
    return tree_to_lts(parse_tree(read_file(path)).root);
}

lts load_engine_lts(const std::string& path, const options& opt) {
    return engine_to_lts(parse_gtdl(read_file(path)), wiring_from(opt), opt.loop_bound);
}

nlohmann::json verdict_json(const verdict& v) {
    nlohmann::json j;
    j["kind"] = kind_name(v.kind);
    j["holds"] = v.holds;
    if (v.counterexample)
        j["counterexample"] = *v.counterexample;
    else
        j["counterexample"] = nullptr;
    j["states"] = {v.stats.states_lhs, v.stats.states_rhs};
    j["iterations"] = v.stats.iterations;
    j["millis"] = v.stats.millis;
    return j;
}

void print_verdict(const verdict& v, const std::string& format) {
    if (format == "json-lines") {
        std::cout << verdict_json(v).dump() << "\n";
    } else if (format == "csv") {
        char millis[32];
        std::snprintf(millis, sizeof millis, "%.3f", v.stats.millis);
        std::cout << "kind,holds,cex,states_lhs,states_rhs,millis\n"
                  << kind_name(v.kind) << ',' << (v.holds ? "true" : "false") << ','
                  << (v.counterexample ? format_trace(*v.counterexample) : "none") << ','
                  << v.stats.states_lhs << ',' << v.stats.states_rhs << ',' << millis << "\n";
    } else {
        std::cout << verdict_line(v) << "\n" << verdict_report(v);
    }
}

int cmd_compile(const std::string& path, bool tree, const options& opt, const std::string& out) {
    lts m = tree ? load_tree_lts(path) : load_engine_lts(path, opt);
    write_output(out, write_lts(m));
    std::cerr << "states=" << m.num_states << " transitions=" << m.transitions.size() << "\n";
    return 0;
}

int cmd_verify(const std::string& tree_path, const std::string& gtdl_path,
               const std::string& relation, const std::string& direction, const options& opt) {
    auto kind = parse_relation_kind(relation);
    if (!kind) throw CLI::ValidationError("--relation", "unknown relation " + relation);

    lts tree = load_tree_lts(tree_path);
    lts engine = load_engine_lts(gtdl_path, opt);

    bool shared = false;
    for (int l = 1; l < static_cast<int>(tree.labels.size()) && !shared; ++l)
        shared = engine.find_label(tree.labels[l]) > 0;
    if (!shared)
        std::cerr << "warning: the tree and the rule set share no observable action; "
                     "check the flag wiring\n";

    const lts& lhs = direction == "engine-in-tree" ? engine : tree;
    const lts& rhs = direction == "engine-in-tree" ? tree : engine;

    verdict v;
    if (opt.timeout_secs > 0) {
        deadline limit = deadline::in_seconds(opt.timeout_secs);
        v = check(lhs, rhs, *kind, &limit);
    } else {
        v = check(lhs, rhs, *kind);
    }
    print_verdict(v, opt.format);
    return v.holds ? 0 : 1;
}

std::vector<int> parse_leaves_spec(const std::string& spec) {
    std::vector<int> out;
    size_t pos = 0;
    while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        std::string part = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
        size_t dots = part.find("..");
        if (dots != std::string::npos) {
            int lo = std::stoi(part.substr(0, dots));
            int hi = std::stoi(part.substr(dots + 2));
            for (int n = lo; n <= hi; ++n) out.push_back(n);
        } else if (!part.empty()) {
            out.push_back(std::stoi(part));
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw CLI::ValidationError("--leaves", "empty leaf specification");
    return out;
}

int cmd_bench(const std::string& family_str, const std::string& leaves_spec,
              const std::string& relations_str, int reps, const options& opt,
              const std::string& out_csv) {
    auto family = parse_bench_family(family_str);
    if (!family) throw CLI::ValidationError("--family", "unknown family " + family_str);

    std::vector<relation_kind> relations;
    if (!relations_str.empty()) {
        size_t pos = 0;
        while (pos <= relations_str.size()) {
            size_t comma = relations_str.find(',', pos);
            std::string name = relations_str.substr(
                pos, comma == std::string::npos ? comma : comma - pos);
            auto k = parse_relation_kind(name);
            if (!k) throw CLI::ValidationError("--relations", "unknown relation " + name);
            relations.push_back(*k);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    std::vector<bench_case> cases;
    for (int n : parse_leaves_spec(leaves_spec)) cases.push_back({*family, n, relations});

    bench_options bopt;
    bopt.repetitions = reps;
    if (opt.timeout_secs > 0) bopt.timeout_secs = opt.timeout_secs;
    std::vector<bench_entry> entries = run_bench(cases, bopt);

    if (!out_csv.empty()) write_output(out_csv, bench_csv(entries));
    if (opt.format == "csv")
        std::cout << bench_csv(entries);
    else
        std::cout << bench_markdown(entries);
    return 0;
}

int cmd_emit(const std::string& tree_path, const std::string& gtdl_path, const std::string& out) {
    lnt_document doc;
    if (!tree_path.empty()) {
        tree_document tree = parse_tree(read_file(tree_path));
        doc = emit_tree(tree.root, tree.name.empty() ? "attack_tree" : tree.name + "_tree");
    } else {
        doc = emit_gtdl(parse_gtdl(read_file(gtdl_path)), "detection");
    }
    write_output(out, doc.text);
    std::cerr << "processes=" << doc.process_names.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attack-tree / detection-rule conformance toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    options opt;
    app.add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"human", "json-lines", "csv"}))
        ->capture_default_str();
    app.add_option("--timeout-secs", opt.timeout_secs, "per-check timeout in seconds (0: none)");
    app.add_option("--loop-bound", opt.loop_bound, "engine rounds to unroll")
        ->check(CLI::PositiveNumber);
    app.add_option("--external", opt.externals,
                   "flag set by the environment rather than a rule (repeatable)");

    std::string in_path, second_path, out_path;
    std::string relation = "WeakTraceIncl", direction = "tree-in-engine";
    std::string family, leaves, relations;
    int reps = 3;

    CLI::App* compile_tree = app.add_subcommand("compile-tree", "compile a tree file to an LTS dump");
    compile_tree->add_option("file", in_path)->required();
    compile_tree->add_option("-o,--out", out_path, "dump path (default stdout)");

    CLI::App* compile_gtdl =
        app.add_subcommand("compile-gtdl", "compile a rule set to the engine LTS dump");
    compile_gtdl->add_option("file", in_path)->required();
    compile_gtdl->add_option("-o,--out", out_path, "dump path (default stdout)");

    CLI::App* verify =
        app.add_subcommand("verify", "check a conformance relation between tree and rules");
    verify->add_option("tree", in_path, "attack-tree file")->required();
    verify->add_option("rules", second_path, "GTDL file")->required();
    verify->add_option("--relation", relation, "relation kind")->capture_default_str();
    verify->add_option("--direction", direction, "orientation of directional relations")
        ->check(CLI::IsMember({"tree-in-engine", "engine-in-tree"}))
        ->capture_default_str();

    CLI::App* bench = app.add_subcommand("bench", "run parametric benchmark families");
    bench->add_option("--family", family, "model family")->required();
    bench->add_option("--leaves", leaves, "leaf counts, e.g. 3 or 1..10 or 1,2,10")->required();
    bench->add_option("--relations", relations, "comma-separated relation kinds");
    bench->add_option("--reps", reps, "repetitions per measurement")->capture_default_str();
    bench->add_option("--out", out_path, "write CSV here");

    CLI::App* emit = app.add_subcommand("emit-lnt", "emit the LNT model of a tree or rule set");
    CLI::Option* emit_tree_opt = emit->add_option("--tree", in_path, "attack-tree file");
    CLI::Option* emit_gtdl_opt = emit->add_option("--gtdl", second_path, "GTDL file");
    emit->add_option("-o,--out", out_path, "output path (default stdout)");
    emit_tree_opt->excludes(emit_gtdl_opt);

    CLI11_PARSE(app, argc, argv);

    try {
        if (compile_tree->parsed()) return cmd_compile(in_path, true, opt, out_path);
        if (compile_gtdl->parsed()) return cmd_compile(in_path, false, opt, out_path);
        if (verify->parsed()) return cmd_verify(in_path, second_path, relation, direction, opt);
        if (bench->parsed()) return cmd_bench(family, leaves, relations, reps, opt, out_path);
        if (emit->parsed()) {
            if (in_path.empty() && second_path.empty())
                throw CLI::ValidationError("emit-lnt", "one of --tree or --gtdl is required");
            return cmd_emit(in_path, second_path, out_path);
        }
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const timeout_error&) {
        std::cerr << "timeout\n";
        return 4;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
