#include "mmso/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mmso {

// ---- matroid text format -----------------------------------------------------

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

struct MatroidDoc {
    std::string type;
    std::vector<std::string> elements;
    std::map<std::string, std::vector<std::string>> values;  // key -> one entry per line
    bool has(const std::string& k) const { return values.count(k) != 0; }
    const std::string& one(const std::string& k) const {
        auto it = values.find(k);
        if (it == values.end() || it->second.empty())
            throw ValueError("matroid file: missing key '" + k + ":'");
        if (it->second.size() > 1) throw ValueError("matroid file: key '" + k + ":' repeated");
        return it->second.front();
    }
};

MatroidDoc parse_doc(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    bool header_seen = false;
    MatroidDoc doc;
    while (std::getline(is, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!header_seen) {
            if (t != "matroid v1") throw ValueError("matroid file: expected 'matroid v1' header");
            header_seen = true;
            continue;
        }
        size_t colon = t.find(':');
        if (colon == std::string::npos) throw ValueError("matroid file: expected 'key: value' line: " + t);
        std::string key = trim(t.substr(0, colon));
        std::string value = trim(t.substr(colon + 1));
        if (key == "type")
            doc.type = value;
        else if (key == "elements")
            doc.elements = split_ws(value);
        else
            doc.values[key].push_back(value);
    }
    if (!header_seen) throw ValueError("matroid file: empty input");
    if (doc.type.empty()) throw ValueError("matroid file: missing 'type:' line");
    return doc;
}

void require_keys(const MatroidDoc& doc, std::vector<std::string> allowed) {
    for (const auto& [key, lines] : doc.values) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValueError("matroid file: unknown key '" + key + ":' for type " + doc.type);
        (void)lines;
    }
}

std::vector<GraphEdge> parse_edges(const std::string& value) {
    std::vector<GraphEdge> edges;
    for (const auto& tok : split_ws(value)) {
        size_t dash = tok.find('-');
        if (dash == std::string::npos || dash == 0 || dash + 1 >= tok.size())
            throw ValueError("matroid file: bad edge token '" + tok + "'");
        edges.push_back({tok.substr(0, dash), tok.substr(dash + 1)});
    }
    if (edges.empty()) throw ValueError("matroid file: empty edge list");
    return edges;
}

void check_same_elements(const MatroidDoc& doc, const Matroid& m) {
    std::vector<std::string> want = doc.elements;
    std::sort(want.begin(), want.end());
    if (want != m.names())
        throw ValueError("matroid file: elements line does not match the derived ground set");
}

}  // namespace

Matroid matroid_from_text(const std::string& text) {
    MatroidDoc doc = parse_doc(text);
    const std::string& type = doc.type;

    if (type == "explicit") {
        require_keys(doc, {"indep"});
        std::vector<std::vector<std::string>> family;
        const std::string& v = doc.one("indep");
        std::string part;
        std::istringstream is(v);
        while (std::getline(is, part, ';')) {
            std::string t = trim(part);
            if (t == "-")
                family.push_back({});
            else if (!t.empty())
                family.push_back(split_ws(t));
        }
        return explicit_matroid(doc.elements, family);
    }
    if (type == "uniform") {
        require_keys(doc, {"rank"});
        int rank = std::stoi(doc.one("rank"));
        return uniform_matroid(rank, doc.elements);
    }
    if (type == "linear") {
        require_keys(doc, {"field", "rows"});
        int q = std::stoi(doc.one("field"));
        if (!gf::Field::is_prime_power(q))
            throw ValueError("matroid file: field order " + std::to_string(q) + " is not a prime power");
        std::vector<std::vector<int>> rows;
        for (const auto& raw : doc.values.at("rows")) {
            std::string r = trim(raw);
            if (r.size() >= 2 && r.front() == '"' && r.back() == '"') r = r.substr(1, r.size() - 2);
            std::vector<int> row;
            for (const auto& tok : split_ws(r)) row.push_back(std::stoi(tok));
            rows.push_back(std::move(row));
        }
        return linear_matroid(q, rows, doc.elements);
    }
    if (type == "graphic") {
        require_keys(doc, {"edges"});
        std::vector<GraphEdge> edges = parse_edges(doc.one("edges"));
        if (edges.size() != doc.elements.size())
            throw ValueError("matroid file: graphic needs one element name per edge");
        return graphic_matroid(edges, doc.elements);
    }
    if (type == "m" || type == "mplus") {
        require_keys(doc, {"edges"});
        std::vector<GraphEdge> edges = parse_edges(doc.one("edges"));
        Matroid m = type == "m" ? m_of_graph(edges) : mplus_of_graph(edges);
        check_same_elements(doc, m);
        return m;
    }
    if (type == "parallel2") {
        require_keys(doc, {"classes"});
        std::vector<std::vector<std::string>> classes;
        std::istringstream is(doc.one("classes"));
        std::string part;
        while (std::getline(is, part, ';')) {
            auto group = split_ws(trim(part));
            if (!group.empty()) classes.push_back(group);
        }
        Matroid m = rank2_with_parallel_classes(classes);
        check_same_elements(doc, m);
        return m;
    }
    if (type == "polygon") {
        require_keys(doc, {});
        if (doc.elements.size() % 2 != 0 || doc.elements.size() < 6)
            throw ValueError("matroid file: polygon needs an even ground set of size >= 6");
        Matroid m = polygon_matroid(static_cast<int>(doc.elements.size()) / 2);
        check_same_elements(doc, m);
        return m;
    }
    if (type == "path") {
        require_keys(doc, {"circuits"});
        std::vector<int> starts;
        for (const auto& tok : split_ws(doc.one("circuits"))) starts.push_back(std::stoi(tok));
        Matroid m = path_matroid(static_cast<int>(doc.elements.size()), starts);
        check_same_elements(doc, m);
        return m;
    }
    throw ValueError("matroid file: unknown type '" + type + "'");
}

std::string matroid_to_text(const Matroid& m) {
    int n = m.size();
    if (n > SetSystem::kTableCap) throw ResourceError("matroid_to_text: ground set too large");
    std::ostringstream os;
    os << "matroid v1\n";
    os << "type: explicit\n";
    os << "elements:";
    for (const auto& nm : m.names()) os << " " << nm;
    os << "\n";
    os << "indep: ";
    bool first = true;
    for (Subset s : submasks_lex(full_set(n))) {
        if (!m.independent(s)) continue;
        if (!first) os << "; ";
        first = false;
        if (s == 0) {
            os << "-";
        } else {
            bool f2 = true;
            for (const auto& nm : m.set_system().names_of(s)) {
                os << (f2 ? "" : " ") << nm;
                f2 = false;
            }
        }
    }
    os << "\n";
    return os.str();
}

Matroid matroid_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValueError("cannot open matroid file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return matroid_from_text(os.str());
}

void matroid_to_file(const Matroid& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValueError("cannot write matroid file: " + path);
    out << matroid_to_text(m);
}

// ---- direct sum ---------------------------------------------------------------

Matroid direct_sum(const Matroid& a, const Matroid& b) {
    std::vector<std::string> names = a.names();
    names.insert(names.end(), b.names().begin(), b.names().end());
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ValueError("direct sum: ground sets overlap");
    Matroid ca = a, cb = b;
    auto oracle = [ca, cb, sorted](Subset s) {
        Subset sa = 0, sb = 0;
        for (int id : subset_ids(s)) {
            const std::string& nm = sorted[id];
            bool in_a = std::binary_search(ca.names().begin(), ca.names().end(), nm);
            if (in_a)
                sa |= Subset{1} << ca.id_of(nm);
            else
                sb |= Subset{1} << cb.id_of(nm);
        }
        return ca.independent(sa) && cb.independent(sb);
    };
    return Matroid::trusted(SetSystem::from_oracle(sorted, oracle));
}

// ---- corpus ---------------------------------------------------------------------

namespace corpus {

namespace {

struct Entry {
    std::string summary;
    std::string text;  // empty when built programmatically
    std::function<Matroid()> build;
};

std::string uniform_text(int r, int n) {
    std::ostringstream os;
    os << "matroid v1\ntype: uniform\nelements:";
    Matroid u = uniform_matroid(r, n);
    for (const auto& nm : u.names()) os << " " << nm;
    os << "\nrank: " << r << "\n";
    return os.str();
}

Matroid u23_on(const std::string& a, const std::string& b, const std::string& c) {
    return uniform_matroid(2, std::vector<std::string>{a, b, c});
}

const std::map<std::string, Entry>& table() {
    static const std::map<std::string, Entry> entries = [] {
        std::map<std::string, Entry> t;
        auto add_text = [&t](const std::string& name, const std::string& summary, const std::string& text) {
            t[name] = Entry{summary, text, [text] { return matroid_from_text(text); }};
        };
        auto add_built = [&t](const std::string& name, const std::string& summary,
                              std::function<Matroid()> build) {
            t[name] = Entry{summary, "", std::move(build)};
        };

        add_text("u01", "single loop", uniform_text(0, 1));
        add_text("u11", "single coloop", uniform_text(1, 1));
        add_text("u12", "parallel pair", uniform_text(1, 2));
        add_text("u13", "three parallel elements", uniform_text(1, 3));
        add_text("u23", "three-point line", uniform_text(2, 3));
        add_text("u24", "four-point line", uniform_text(2, 4));
        add_text("u25", "five-point line", uniform_text(2, 5));
        add_text("u33", "free matroid on three elements", uniform_text(3, 3));
        add_text("u34", "rank-3 uniform on four elements", uniform_text(3, 4));
        add_text("u36", "rank-3 uniform on six elements", uniform_text(3, 6));
        add_text("u44", "free matroid on four elements", uniform_text(4, 4));

        add_text("u23plus", "U_{2,3} with every element doubled",
                 "matroid v1\ntype: parallel2\nelements: a1 a2 b1 b2 c1 c2\n"
                 "classes: a1 a2; b1 b2; c1 c2\n");
        add_text("u24plus", "U_{2,4} with every element doubled",
                 "matroid v1\ntype: parallel2\nelements: a1 a2 b1 b2 c1 c2 d1 d2\n"
                 "classes: a1 a2; b1 b2; c1 c2; d1 d2\n");

        add_text("m_p2", "m(G) for a single edge",
                 "matroid v1\ntype: m\nelements: u u-v v\nedges: u-v\n");
        add_text("m_p3", "m(G) for a two-edge path",
                 "matroid v1\ntype: m\nelements: u u-v v v-w w\nedges: u-v v-w\n");
        add_text("m_k3", "m(G) for a triangle",
                 "matroid v1\ntype: m\nelements: u u-v u-w v v-w w\nedges: u-v v-w u-w\n");
        add_text("m_star3", "m(G) for a three-edge star",
                 "matroid v1\ntype: m\nelements: c c-u c-v c-w u v w\nedges: c-u c-v c-w\n");
        add_text("mplus_p2", "m+(G) for a single edge",
                 "matroid v1\ntype: mplus\nelements: u u' u-v v v'\nedges: u-v\n");
        add_text("mplus_p3", "m+(G) for a two-edge path",
                 "matroid v1\ntype: mplus\nelements: u u' u-v v v' v-w w w'\nedges: u-v v-w\n");
        add_text("mplus_k3", "m+(G) for a triangle",
                 "matroid v1\ntype: mplus\nelements: u u' u-v u-w v v' v-w w w'\nedges: u-v v-w u-w\n");

        add_text("polygon3", "polygon matroid, three triangles",
                 "matroid v1\ntype: polygon\nelements: a b c d e f\n");
        add_text("polygon4", "polygon matroid, four triangles",
                 "matroid v1\ntype: polygon\nelements: a b c d e f g h\n");
        add_text("path6", "path matroid on six elements",
                 "matroid v1\ntype: path\nelements: a b c d e f\ncircuits: 1 4\n");
        add_text("path7", "path matroid on seven elements",
                 "matroid v1\ntype: path\nelements: a b c d e f g\ncircuits: 1 5\n");
        add_text("path8", "path matroid on eight elements",
                 "matroid v1\ntype: path\nelements: a b c d e f g h\ncircuits: 1 4 6\n");

        add_text("fano", "Fano plane over GF(2)",
                 "matroid v1\ntype: linear\nelements: a b c d e f g\nfield: 2\n"
                 "rows: \"1 0 0 1 1 0 1\"\nrows: \"0 1 0 1 0 1 1\"\nrows: \"0 0 1 0 1 1 1\"\n");
        add_text("nonfano", "Fano matrix read over GF(3)",
                 "matroid v1\ntype: linear\nelements: a b c d e f g\nfield: 3\n"
                 "rows: \"1 0 0 1 1 0 1\"\nrows: \"0 1 0 1 0 1 1\"\nrows: \"0 0 1 0 1 1 1\"\n");
        add_text("ag23", "nine points of AG(2,3) over GF(3)",
                 "matroid v1\ntype: linear\nelements: p1 p2 p3 p4 p5 p6 p7 p8 p9\nfield: 3\n"
                 "rows: \"0 1 2 0 1 2 0 1 2\"\nrows: \"0 0 0 1 1 1 2 2 2\"\nrows: \"1 1 1 1 1 1 1 1 1\"\n");
        add_text("k4", "cycle matroid of K4",
                 "matroid v1\ntype: graphic\nelements: e1 e2 e3 e4 e5 e6\n"
                 "edges: 1-2 1-3 1-4 2-3 2-4 3-4\n");
        add_text("k4_gf2", "cycle matroid of K4 as a GF(2) column space",
                 "matroid v1\ntype: linear\nelements: e1 e2 e3 e4 e5 e6\nfield: 2\n"
                 "rows: \"1 1 1 0 0 0\"\nrows: \"1 0 0 1 1 0\"\nrows: \"0 1 0 1 0 1\"\n");

        add_built("twosum_u23_u23", "2-sum of two three-point lines", [] {
            return two_sum(u23_on("a", "b", "p"), u23_on("c", "d", "p"), "p");
        });
        add_built("twosum_u24_u23", "2-sum of U_{2,4} and U_{2,3}", [] {
            return two_sum(uniform_matroid(2, {"a", "b", "c", "p"}), u23_on("d", "e", "p"), "p");
        });
        add_built("twosum_chain3", "chain of three triangles under 2-sums", [] {
            Matroid left = two_sum(u23_on("a", "b", "p"), u23_on("c", "q", "p"), "p");
            return two_sum(left, u23_on("d", "e", "q"), "q");
        });
        add_built("twosum_k4_u23", "2-sum of M(K4) and a triangle", [] {
            std::vector<GraphEdge> edges = {{"1", "2"}, {"1", "3"}, {"1", "4"},
                                            {"2", "3"}, {"2", "4"}, {"3", "4"}};
            Matroid k4 = graphic_matroid(edges, {"g1", "g2", "g3", "g4", "g5", "p"});
            return two_sum(k4, u23_on("x", "y", "p"), "p");
        });

        add_built("loop_coloop", "a loop plus a coloop",
                  [] { return direct_sum(uniform_matroid(1, {"c"}), uniform_matroid(0, {"l"})); });
        add_built("two_pairs", "direct sum of two parallel pairs", [] {
            return direct_sum(uniform_matroid(1, {"a", "b"}), uniform_matroid(1, {"c", "d"}));
        });
        add_built("u23_coloop", "three-point line plus a coloop",
                  [] { return direct_sum(u23_on("a", "b", "c"), uniform_matroid(1, {"z"})); });
        add_built("lines_apart", "two disjoint three-point lines", [] {
            return direct_sum(u23_on("a", "b", "c"), u23_on("x", "y", "z"));
        });

        return t;
    }();
    return entries;
}

}  // namespace

std::vector<Fixture> list() {
    std::vector<Fixture> out;
    for (const auto& [name, entry] : table()) out.push_back({name, entry.summary});
    return out;
}

bool has(const std::string& name) { return table().count(name) != 0; }

Matroid get(const std::string& name) {
    auto it = table().find(name);
    if (it == table().end()) throw ValueError("unknown corpus matroid: " + name);
    return it->second.build();
}

std::string text(const std::string& name) {
    auto it = table().find(name);
    if (it == table().end()) throw ValueError("unknown corpus matroid: " + name);
    if (!it->second.text.empty()) return it->second.text;
    return matroid_to_text(it->second.build());
}

std::vector<std::string> names_up_to(int max_elements) {
    std::vector<std::string> out;
    for (const auto& [name, entry] : table())
        if (entry.build().size() <= max_elements) out.push_back(name);
    return out;
}

}  // namespace corpus
}  // namespace mmso
