#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "mmso/corpus.hpp"
#include "mmso/decide.hpp"
#include "mmso/equiv.hpp"
#include "mmso/logic.hpp"
#include "mmso/parsetree.hpp"

namespace fs = std::filesystem;
using namespace mmso;

namespace {

logic::FormulaPtr load_sentence(const std::string& arg) {
    if (fs::exists(arg)) return logic::parse_file(arg);
    return logic::parse(arg);
}

parsetree::OracleFactory oracle_by_name(const std::string& name) {
    if (name == "brute") return parsetree::brute_oracle_factory();
    if (name == "gfq") return parsetree::gfq_oracle_factory();
    throw ValueError("unknown oracle: " + name);
}

parsetree::Builder builder_by_name(const std::string& name) {
    if (name == "auto") return parsetree::Builder::Auto;
    if (name == "decomp") return parsetree::Builder::Decomposition;
    if (name == "twosum") return parsetree::Builder::TwoSum;
    throw ValueError("unknown builder: " + name);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---- selftest ------------------------------------------------------------------

struct SuiteReport {
    int failures = 0;
    void check(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            std::cerr << "selftest failure: " << what << "\n";
        }
    }
};

void suite_matroid(SuiteReport& rep) {
    for (const auto& name : corpus::names_up_to(7)) {
        Matroid m = corpus::get(name);
        int n = m.size();
        for (Subset x = 0; x < (Subset{1} << n); ++x)
            for (Subset y = x; y < (Subset{1} << n); ++y)
                rep.check(m.rank(x) + m.rank(y) >= m.rank(x | y) + m.rank(x & y),
                          "rank submodularity on " + name);
        for (Subset u = 0; u < (Subset{1} << n); ++u) {
            rep.check(m.connectivity(u) == m.connectivity(full_set(n) & ~u),
                      "connectivity symmetry on " + name);
            rep.check(m.connectivity(u) <= m.rank(), "connectivity bound on " + name);
        }
        rep.check(dual(dual(m)).oracle_equal(m), "dual involution on " + name);
    }
}

void suite_equiv(SuiteReport& rep) {
    for (const auto& name : corpus::names_up_to(7)) {
        Matroid m = corpus::get(name);
        int n = m.size();
        for (Subset u = 0; u < (Subset{1} << n); ++u) {
            int cu = equiv::class_count(m.set_system(), u);
            int cv = equiv::class_count(m.set_system(), full_set(n) & ~u);
            rep.check(cu >= m.connectivity(u) + 1, "class count lower bound on " + name);
            rep.check(cv <= (1 << std::min(cu, 20)), "class count complement bound on " + name);
        }
    }
}

void suite_branchdec(SuiteReport& rep, std::mt19937_64& rng) {
    for (const auto& name : {"u24", "m_k3", "path6"}) {
        Matroid m = corpus::get(name);
        auto exact = branchdec::bw_exact(m);
        rep.check(branchdec::width(m, exact.witness) == exact.width,
                  std::string("bw witness width on ") + name);
        branchdec::Decomposition approx = branchdec::approx_branch_decomposition(m, exact.width);
        rep.check(branchdec::width(m, approx) <= 3 * exact.width + 1,
                  std::string("approx width bound on ") + name);
    }
    // random lambda_minimize spot checks against exhaustive search
    Matroid m = corpus::get("u25");
    int n = m.size();
    for (int trial = 0; trial < 20; ++trial) {
        Subset d1 = static_cast<Subset>(rng()) & full_set(n);
        Subset d2 = static_cast<Subset>(rng()) & full_set(n) & ~d1;
        Subset z = branchdec::lambda_minimize(m, d1, d2);
        rep.check(subset_of(d1, z) && (z & d2) == 0, "lambda_minimize window");
        int best = 1 << 20;
        for (Subset cand = 0; cand < (Subset{1} << n); ++cand) {
            if (!subset_of(d1, cand) || (cand & d2) != 0) continue;
            best = std::min(best, m.connectivity(cand));
        }
        rep.check(m.connectivity(z) == best, "lambda_minimize optimality");
    }
}

automata::TreeAutomaton random_automaton(std::mt19937_64& rng) {
    automata::TreeAutomaton a;
    int nq = 1 + static_cast<int>(rng() % 3);
    int nc = 1 + static_cast<int>(rng() % 3);
    a.num_states = nq;
    for (int c = 0; c < nc; ++c) a.base_alphabet.insert(std::string(1, static_cast<char>('a' + c)));
    for (int q = 0; q < nq; ++q)
        if (rng() % 2) a.accepting.insert(q);
    for (const auto& c : a.base_alphabet) {
        if (rng() % 4 != 0) {
            std::set<automata::State> img;
            for (int q = 0; q < nq; ++q)
                if (rng() % 2) img.insert(q);
            if (!img.empty()) a.delta0[c] = img;
        }
        for (int l = 0; l < nq; ++l)
            for (int r = 0; r < nq; ++r) {
                if (rng() % 3 == 0) continue;
                std::set<automata::State> img;
                for (int q = 0; q < nq; ++q)
                    if (rng() % 2) img.insert(q);
                if (!img.empty()) a.delta2[c][{l, r}] = img;
            }
    }
    return a;
}

// Joint run-set pairs achievable by trees with exactly k leaves; extensionally
// the same as enumerating every labeled tree of that size.
using RunPair = std::pair<std::vector<automata::State>, std::vector<automata::State>>;

std::vector<std::set<RunPair>> joint_runs(const automata::TreeAutomaton& a,
                                          const automata::TreeAutomaton& b, int max_leaves) {
    auto runset0 = [](const automata::TreeAutomaton& m, const automata::Character& c) {
        std::vector<automata::State> out;
        auto it = m.delta0.find(c);
        if (it != m.delta0.end()) out.assign(it->second.begin(), it->second.end());
        return out;
    };
    auto step = [](const automata::TreeAutomaton& m, const automata::Character& c,
                   const std::vector<automata::State>& l, const std::vector<automata::State>& r) {
        std::set<automata::State> out;
        for (automata::State x : l)
            for (automata::State y : r) {
                const std::set<mmso::automata::State>* img = m.image(c, x, y);
                if (!img) continue;
                out.insert(img->begin(), img->end());
            }
        return std::vector<automata::State>(out.begin(), out.end());
    };
    std::set<automata::Character> chars = a.base_alphabet;
    chars.insert(b.base_alphabet.begin(), b.base_alphabet.end());
    std::vector<std::set<RunPair>> by_leaves(max_leaves + 1);
    for (const auto& c : chars) by_leaves[1].insert({runset0(a, c), runset0(b, c)});
    for (int k = 2; k <= max_leaves; ++k)
        for (int l = 1; l < k; ++l)
            for (const RunPair& lp : by_leaves[l])
                for (const RunPair& rp : by_leaves[k - l])
                    for (const auto& c : chars)
                        by_leaves[k].insert({step(a, c, lp.first, rp.first), step(b, c, lp.second, rp.second)});
    return by_leaves;
}

bool accepting_in(const automata::TreeAutomaton& m, const std::vector<automata::State>& run) {
    for (automata::State q : run)
        if (m.accepting.count(q)) return true;
    return false;
}

void suite_automata(SuiteReport& rep, std::mt19937_64& rng) {
    for (int trial = 0; trial < 40; ++trial) {
        automata::TreeAutomaton a = random_automaton(rng);
        automata::TreeAutomaton det = automata::determinize(a);
        auto pairs = joint_runs(a, det, 6);
        bool ok = true;
        bool any_accept = false;
        for (int k = 1; k <= 6 && ok; ++k)
            for (const RunPair& pr : pairs[k]) {
                if (accepting_in(a, pr.first) != accepting_in(det, pr.second)) ok = false;
                if (accepting_in(a, pr.first)) any_accept = true;
            }
        rep.check(ok, "determinize language equality");
        auto witness = automata::emptiness_witness(a);
        if (witness) {
            rep.check(automata::accepts(a, *witness), "emptiness witness accepted");
        } else {
            rep.check(!any_accept, "emptiness verdict vs enumeration");
        }
    }
}

void suite_logic(SuiteReport& rep, std::mt19937_64& rng) {
    Matroid m = corpus::get("u24");
    std::vector<std::string> sentences = {
        "exists X1 Basis(X1)",
        "forall X1 (Ind(X1) -> exists X2 (Basis(X2) & X1 <= X2))",
        "exists X1 card(X1,1,2)",
        "forall X1 forall X2 ((Ind(X1) & X2 <= X1) -> Ind(X2))",
    };
    parsetree::BuildResult br =
        parsetree::build(m.set_system(), branchdec::some_decomposition(m),
                         parsetree::make_brute_oracle(m.set_system()));
    for (const auto& text : sentences) {
        logic::FormulaPtr f = logic::parse(text);
        bool direct = logic::evaluate(m.set_system(), f, {});
        automata::TreeAutomaton compiled = logic::compile(f, br.automaton);
        rep.check(automata::accepts(compiled, br.ptree.tree) == direct,
                  "compiler agreement on " + text);
        bool sugar = logic::evaluate(m.set_system(), f, {});
        bool desugared = logic::evaluate(m.set_system(), logic::desugar(f), {});
        rep.check(sugar == desugared, "desugar soundness on " + text);
    }
    // random interpretations for an open formula
    logic::FormulaPtr open = logic::parse("Ind(X1) & (X1 <= X2 | card(X2,0,2))");
    for (int trial = 0; trial < 16; ++trial) {
        std::map<int, Subset> theta{{1, static_cast<Subset>(rng()) & full_set(4)},
                                    {2, static_cast<Subset>(rng()) & full_set(4)}};
        rep.check(logic::evaluate(m.set_system(), open, theta) ==
                      logic::evaluate(m.set_system(), logic::desugar(open), theta),
                  "desugar soundness on open formula");
    }
}

void suite_parsetree(SuiteReport& rep) {
    for (const auto& name : corpus::names_up_to(7)) {
        Matroid m = corpus::get(name);
        parsetree::BuildOptions opts;  // self-check on: verifies oracle equivalence
        try {
            if (is_connected(m))
                parsetree::build_via_2sum(m, parsetree::brute_oracle_factory(), opts);
            else
                parsetree::build_disconnected(m, parsetree::brute_oracle_factory(), opts);
        } catch (const std::exception& e) {
            rep.check(false, std::string("parse tree build on ") + name + ": " + e.what());
        }
    }
}

int run_selftest(uint64_t seed) {
    std::mt19937_64 rng(seed);
    struct Suite {
        const char* name;
        std::function<void(SuiteReport&)> run;
    };
    SuiteReport total;
    std::vector<Suite> suites = {
        {"matroid", [](SuiteReport& r) { suite_matroid(r); }},
        {"equiv", [](SuiteReport& r) { suite_equiv(r); }},
        {"branchdec", [&rng](SuiteReport& r) { suite_branchdec(r, rng); }},
        {"automata", [&rng](SuiteReport& r) { suite_automata(r, rng); }},
        {"logic", [&rng](SuiteReport& r) { suite_logic(r, rng); }},
        {"parsetree", [](SuiteReport& r) { suite_parsetree(r); }},
    };
    bool all_ok = true;
    for (auto& suite : suites) {
        SuiteReport rep;
        suite.run(rep);
        std::cout << "selftest." << suite.name << "=" << (rep.failures == 0 ? "ok" : "fail") << "\n";
        if (rep.failures != 0) all_ok = false;
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model checking of counting monadic second-order sentences on matroids"};
    app.require_subcommand(1);

    std::string matroid_path, sentence_arg, out_path, oracle_name = "brute", builder_name = "auto";
    std::string set_arg, tsv_path, automaton_path, tau_arg, witness_prefix, corpus_name;
    int exact_cap = 8;
    uint64_t seed = 12345;
    int exit_status = 0;

    auto* check = app.add_subcommand("check", "model-check a sentence via parse trees");
    check->add_option("matroid", matroid_path)->required();
    check->add_option("sentence", sentence_arg)->required();
    check->add_option("--oracle", oracle_name)->check(CLI::IsMember({"brute", "gfq"}));
    check->add_option("--builder", builder_name)->check(CLI::IsMember({"auto", "decomp", "twosum"}));
    check->callback([&] {
        Matroid m = matroid_from_file(matroid_path);
        logic::FormulaPtr f = load_sentence(sentence_arg);
        parsetree::ModelCheckOptions options;
        options.builder = builder_by_name(builder_name);
        options.oracles = oracle_by_name(oracle_name);
        bool result = parsetree::model_check(m, f, options);
        std::cout << "result=" << (result ? "true" : "false") << "\n";
        exit_status = result ? 0 : 1;
    });

    auto* evaluate = app.add_subcommand("evaluate", "brute-force semantics (the oracle)");
    evaluate->add_option("matroid", matroid_path)->required();
    evaluate->add_option("sentence", sentence_arg)->required();
    evaluate->callback([&] {
        Matroid m = matroid_from_file(matroid_path);
        logic::FormulaPtr f = load_sentence(sentence_arg);
        if (!logic::is_sentence(f)) throw ValueError("evaluate: the formula has free variables");
        bool result = logic::evaluate(m.set_system(), f, {});
        std::cout << "result=" << (result ? "true" : "false") << "\n";
        exit_status = result ? 0 : 1;
    });

    auto* dw_cmd = app.add_subcommand("dw", "exact decomposition-width");
    dw_cmd->add_option("matroid", matroid_path)->required();
    dw_cmd->add_option("--exact-cap", exact_cap);
    dw_cmd->callback([&] {
        Matroid m = matroid_from_file(matroid_path);
        std::cout << "dw=" << equiv::dw_exact(m.set_system(), exact_cap) << "\n";
    });

    auto* bw_cmd = app.add_subcommand("bw", "exact branch-width");
    bw_cmd->add_option("matroid", matroid_path)->required();
    bw_cmd->add_option("--exact-cap", exact_cap);
    bw_cmd->add_option("--emit", out_path, "write the witness decomposition (newick)");
    bw_cmd->callback([&] {
        Matroid m = matroid_from_file(matroid_path);
        auto exact = branchdec::bw_exact(m, exact_cap);
        std::cout << "bw=" << exact.width << "\n";
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            out << branchdec::to_newick(exact.witness, m.names()) << "\n";
        }
    });

    auto* classes_cmd = app.add_subcommand("classes", "equivalence classes relative to a subset");
    classes_cmd->add_option("matroid", matroid_path)->required();
    classes_cmd->add_option("--set", set_arg, "comma-separated element names")->required();
    classes_cmd->add_option("--tsv", tsv_path, "write the class table as TSV");
    classes_cmd->callback([&] {
        Matroid m = matroid_from_file(matroid_path);
        Subset u = m.subset_of_names(split_commas(set_arg));
        equiv::ClassTable table = equiv::classes(m.set_system(), u);
        std::cout << "classes=" << table.count() << "\n";
        if (!tsv_path.empty()) {
            std::ofstream out(tsv_path);
            for (const auto& [x, cls] : table.class_of) {
                bool first = true;
                for (const auto& nm : m.set_system().names_of(x)) {
                    out << (first ? "" : " ") << nm;
                    first = false;
                }
                if (x == 0) out << "-";
                out << "\t" << cls << "\n";
            }
        }
    });

    auto* ptree_cmd = app.add_subcommand("parsetree", "parse-tree synthesis");
    auto* ptree_build = ptree_cmd->add_subcommand("build", "emit .aut and .ptree files");
    ptree_build->add_option("matroid", matroid_path)->required();
    ptree_build->add_option("-o,--out", out_path, "output directory")->required();
    ptree_build->add_option("--oracle", oracle_name)->check(CLI::IsMember({"brute", "gfq"}));
    ptree_build->add_option("--builder", builder_name)->check(CLI::IsMember({"auto", "decomp", "twosum"}));
    ptree_build->callback([&] {
        Matroid m = matroid_from_file(matroid_path);
        parsetree::OracleFactory oracles = oracle_by_name(oracle_name);
        parsetree::BuildResult br;
        switch (builder_by_name(builder_name)) {
            case parsetree::Builder::Decomposition:
                br = parsetree::build(m.set_system(), branchdec::some_decomposition(m), oracles(m));
                break;
            case parsetree::Builder::TwoSum:
                br = parsetree::build_via_2sum(m, oracles);
                break;
            case parsetree::Builder::Auto:
                br = is_connected(m) ? parsetree::build_via_2sum(m, oracles)
                                     : parsetree::build_disconnected(m, oracles);
                break;
        }
        fs::create_directories(out_path);
        std::string stem = fs::path(matroid_path).stem().string();
        fs::path aut = fs::path(out_path) / (stem + ".aut");
        fs::path ptree = fs::path(out_path) / (stem + ".ptree");
        std::ofstream(aut) << automata::to_text(br.automaton);
        std::ofstream(ptree) << parsetree::ptree_to_text(br.ptree);
        std::cout << "aut=" << aut.string() << "\n";
        std::cout << "ptree=" << ptree.string() << "\n";
    });

    auto* decide_cmd = app.add_subcommand("decide", "theoremhood over an automaton's language");
    decide_cmd->add_option("sentence", sentence_arg)->required();
    decide_cmd->add_option("--automaton", automaton_path)->required();
    decide_cmd->add_option("--tau", tau_arg, "defining sentence");
    decide_cmd->add_option("--witness-prefix", witness_prefix, "write PREFIX.stree and PREFIX.matroid");
    decide_cmd->callback([&] {
        std::ifstream in(automaton_path);
        if (!in) throw ValueError("cannot open automaton file: " + automaton_path);
        std::ostringstream os;
        os << in.rdbuf();
        decide::ClassPresentation presentation;
        presentation.automaton = automata::automaton_from_text(os.str());
        if (!tau_arg.empty()) presentation.tau = load_sentence(tau_arg);
        logic::FormulaPtr psi = load_sentence(sentence_arg);
        decide::Verdict verdict = decide::decide_theorem(presentation, psi);
        if (verdict.theorem) {
            std::cout << "verdict=theorem\n";
            exit_status = 0;
            return;
        }
        std::cout << "verdict=counterexample\n";
        if (!witness_prefix.empty()) {
            std::ofstream(witness_prefix + ".stree") << automata::tree_to_text(*verdict.witness_tree);
            matroid_to_file(Matroid::trusted(*verdict.counterexample), witness_prefix + ".matroid");
            std::cout << "witness=" << witness_prefix << ".stree\n";
            std::cout << "counterexample=" << witness_prefix << ".matroid\n";
        }
        exit_status = 1;
    });

    auto* dual_cmd = app.add_subcommand("dual", "dual matroid in explicit form");
    dual_cmd->add_option("matroid", matroid_path)->required();
    dual_cmd->add_option("-o,--out", out_path)->required();
    dual_cmd->callback([&] {
        Matroid m = matroid_from_file(matroid_path);
        matroid_to_file(dual(m), out_path);
        std::cout << "out=" << out_path << "\n";
    });

    auto* corpus_cmd = app.add_subcommand("corpus", "named fixture matroids");
    auto* corpus_list = corpus_cmd->add_subcommand("list", "list fixtures");
    corpus_list->callback([&] {
        for (const auto& fixture : corpus::list())
            std::cout << fixture.name << "\t" << fixture.summary << "\n";
    });
    auto* corpus_emit = corpus_cmd->add_subcommand("emit", "emit one fixture");
    corpus_emit->add_option("name", corpus_name)->required();
    corpus_emit->add_option("-o,--out", out_path);
    corpus_emit->callback([&] {
        std::string text = corpus::text(corpus_name);
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream(out_path) << text;
            std::cout << "out=" << out_path << "\n";
        }
    });

    auto* selftest_cmd = app.add_subcommand("selftest", "run the invariant suites");
    selftest_cmd->add_option("--seed", seed);
    selftest_cmd->callback([&] { exit_status = run_selftest(seed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ValueError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_status;
}
