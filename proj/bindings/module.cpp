#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmso/corpus.hpp"
#include "mmso/decide.hpp"
#include "mmso/equiv.hpp"
#include "mmso/logic.hpp"
#include "mmso/parsetree.hpp"

namespace py = pybind11;
using namespace mmso;

namespace {

Subset names_to_subset(const Matroid& m, const std::vector<std::string>& names) {
    return m.subset_of_names(names);
}

parsetree::ModelCheckOptions options_from(const std::string& builder, const std::string& oracle) {
    parsetree::ModelCheckOptions options;
    if (builder == "auto")
        options.builder = parsetree::Builder::Auto;
    else if (builder == "decomp")
        options.builder = parsetree::Builder::Decomposition;
    else if (builder == "twosum")
        options.builder = parsetree::Builder::TwoSum;
    else
        throw ValueError("unknown builder: " + builder);
    if (oracle == "brute")
        options.oracles = parsetree::brute_oracle_factory();
    else if (oracle == "gfq")
        options.oracles = parsetree::gfq_oracle_factory();
    else
        throw ValueError("unknown oracle: " + oracle);
    return options;
}

}  // namespace

PYBIND11_MODULE(_mmso, m) {
    m.doc() = "model checking of counting monadic second-order sentences on matroids";

    py::register_exception<ValueError>(m, "MmsoValueError", PyExc_ValueError);
    py::register_exception<ResourceError>(m, "MmsoResourceError", PyExc_RuntimeError);

    py::class_<Matroid>(m, "Matroid")
        .def_static("from_text", &matroid_from_text, py::arg("text"))
        .def_static("uniform", [](int rank, int n) { return uniform_matroid(rank, n); })
        .def_static("corpus", &corpus::get, py::arg("name"))
        .def("to_text", [](const Matroid& self) { return matroid_to_text(self); })
        .def_property_readonly("elements", &Matroid::names)
        .def("__len__", &Matroid::size)
        .def("independent",
             [](const Matroid& self, const std::vector<std::string>& names) {
                 return self.independent(names_to_subset(self, names));
             })
        .def("rank",
             [](const Matroid& self, const std::vector<std::string>& names) {
                 return self.rank(names_to_subset(self, names));
             })
        .def("rank", [](const Matroid& self) { return self.rank(); })
        .def("connectivity",
             [](const Matroid& self, const std::vector<std::string>& names) {
                 return self.connectivity(names_to_subset(self, names));
             })
        .def("dual", [](const Matroid& self) { return dual(self); })
        .def("minor",
             [](const Matroid& self, const std::vector<std::string>& contract,
                const std::vector<std::string>& remove) {
                 return minor(self, names_to_subset(self, contract), names_to_subset(self, remove));
             },
             py::arg("contract"), py::arg("remove"))
        .def("is_connected", [](const Matroid& self) { return is_connected(self); })
        .def("circuits", [](const Matroid& self) {
            std::vector<std::vector<std::string>> out;
            for (Subset c : circuits(self)) out.push_back(self.set_system().names_of(c));
            return out;
        });

    m.def("corpus_names", [] {
        std::vector<std::string> out;
        for (const auto& fixture : corpus::list()) out.push_back(fixture.name);
        return out;
    });

    m.def("parse_sentence", [](const std::string& text) {
        logic::FormulaPtr f = logic::parse(text);
        return logic::to_string(f);
    });

    m.def(
        "evaluate",
        [](const Matroid& matroid, const std::string& sentence) {
            logic::FormulaPtr f = logic::parse(sentence);
            if (!logic::is_sentence(f)) throw ValueError("evaluate: the formula has free variables");
            return logic::evaluate(matroid.set_system(), f, {});
        },
        py::arg("matroid"), py::arg("sentence"));

    m.def(
        "model_check",
        [](const Matroid& matroid, const std::string& sentence, const std::string& builder,
           const std::string& oracle) {
            return parsetree::model_check(matroid, logic::parse(sentence), options_from(builder, oracle));
        },
        py::arg("matroid"), py::arg("sentence"), py::arg("builder") = "auto", py::arg("oracle") = "brute");

    m.def(
        "branch_width",
        [](const Matroid& matroid, int cap) { return branchdec::bw_exact(matroid, cap).width; },
        py::arg("matroid"), py::arg("cap") = 8);

    m.def(
        "decomposition_width",
        [](const Matroid& matroid, int cap) { return equiv::dw_exact(matroid.set_system(), cap); },
        py::arg("matroid"), py::arg("cap") = 8);

    m.def(
        "class_count",
        [](const Matroid& matroid, const std::vector<std::string>& names) {
            return equiv::class_count(matroid.set_system(), matroid.subset_of_names(names));
        },
        py::arg("matroid"), py::arg("set"));

    m.def(
        "build_parse_tree",
        [](const Matroid& matroid, const std::string& builder, const std::string& oracle) {
            parsetree::ModelCheckOptions options = options_from(builder, oracle);
            parsetree::BuildResult br;
            switch (options.builder) {
                case parsetree::Builder::Decomposition:
                    br = parsetree::build(matroid.set_system(), branchdec::some_decomposition(matroid),
                                          options.oracles(matroid));
                    break;
                case parsetree::Builder::TwoSum:
                    br = parsetree::build_via_2sum(matroid, options.oracles);
                    break;
                case parsetree::Builder::Auto:
                    br = is_connected(matroid) ? parsetree::build_via_2sum(matroid, options.oracles)
                                               : parsetree::build_disconnected(matroid, options.oracles);
                    break;
            }
            return py::make_tuple(automata::to_text(br.automaton), parsetree::ptree_to_text(br.ptree));
        },
        py::arg("matroid"), py::arg("builder") = "auto", py::arg("oracle") = "brute");

    m.def(
        "decide_theorem",
        [](const std::string& automaton_text, const std::string& sentence, const std::string& tau) {
            decide::ClassPresentation presentation;
            presentation.automaton = automata::automaton_from_text(automaton_text);
            if (!tau.empty()) presentation.tau = logic::parse(tau);
            decide::Verdict verdict = decide::decide_theorem(presentation, logic::parse(sentence));
            if (verdict.theorem) return py::make_tuple(true, py::none(), py::none());
            return py::make_tuple(false, automata::tree_to_text(*verdict.witness_tree),
                                  matroid_to_text(Matroid::trusted(*verdict.counterexample)));
        },
        py::arg("automaton_text"), py::arg("sentence"), py::arg("tau") = "");
}
