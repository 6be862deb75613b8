#include "mmso/logic.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

namespace mmso::logic {

// ---- constructors ----------------------------------------------------------

namespace {

std::set<int> union_free(const FormulaPtr& a, const FormulaPtr& b) {
    std::set<int> out = a->free;
    out.insert(b->free.begin(), b->free.end());
    return out;
}

FormulaPtr node(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

}  // namespace

FormulaPtr make_atom_ind(int var) {
    if (var <= 0) throw ValueError("variable index must be positive");
    Formula f;
    f.kind = Kind::Ind;
    f.var = var;
    f.free = {var};
    return node(std::move(f));
}

FormulaPtr make_atom_subseteq(int var, int var2) {
    if (var <= 0 || var2 <= 0) throw ValueError("variable index must be positive");
    Formula f;
    f.kind = Kind::Subseteq;
    f.var = var;
    f.var2 = var2;
    f.free = {var, var2};
    return node(std::move(f));
}

FormulaPtr make_atom_card(int var, int p, int q) {
    if (var <= 0) throw ValueError("variable index must be positive");
    if (!(0 <= p && p < q)) throw ValueError("card(X,p,q) requires 0 <= p < q");
    Formula f;
    f.kind = Kind::Card;
    f.var = var;
    f.p = p;
    f.q = q;
    f.free = {var};
    return node(std::move(f));
}

FormulaPtr make_not(FormulaPtr x) {
    Formula f;
    f.kind = Kind::Not;
    f.free = x->free;
    f.left = std::move(x);
    return node(std::move(f));
}

namespace {

FormulaPtr make_binary(Kind kind, FormulaPtr a, FormulaPtr b) {
    Formula f;
    f.kind = kind;
    f.free = union_free(a, b);
    f.left = std::move(a);
    f.right = std::move(b);
    return node(std::move(f));
}

}  // namespace

FormulaPtr make_and(FormulaPtr a, FormulaPtr b) { return make_binary(Kind::And, std::move(a), std::move(b)); }
FormulaPtr make_or(FormulaPtr a, FormulaPtr b) { return make_binary(Kind::Or, std::move(a), std::move(b)); }
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b) {
    return make_binary(Kind::Implies, std::move(a), std::move(b));
}
FormulaPtr make_iff(FormulaPtr a, FormulaPtr b) { return make_binary(Kind::Iff, std::move(a), std::move(b)); }

FormulaPtr make_exists(int var, FormulaPtr x) {
    if (!x->free.count(var))
        throw ValueError("quantified variable X" + std::to_string(var) + " is not free in the body");
    Formula f;
    f.kind = Kind::Exists;
    f.var = var;
    f.free = x->free;
    f.free.erase(var);
    f.left = std::move(x);
    return node(std::move(f));
}

FormulaPtr make_forall(int var, FormulaPtr x) {
    if (!x->free.count(var))
        throw ValueError("quantified variable X" + std::to_string(var) + " is not free in the body");
    Formula f;
    f.kind = Kind::Forall;
    f.var = var;
    f.free = x->free;
    f.free.erase(var);
    f.left = std::move(x);
    return node(std::move(f));
}

FormulaPtr make_named(Kind kind, int var) {
    if (kind != Kind::Empty && kind != Kind::Sing && kind != Kind::Basis && kind != Kind::Coind)
        throw ValueError("make_named: not a named predicate kind");
    if (var <= 0) throw ValueError("variable index must be positive");
    Formula f;
    f.kind = kind;
    f.var = var;
    f.free = {var};
    return node(std::move(f));
}

// ---- variable bookkeeping ---------------------------------------------------

namespace {

void collect_vars(const FormulaPtr& f, std::set<int>& bound, int& max_index) {
    max_index = std::max({max_index, f->var, f->var2});
    if (f->kind == Kind::Exists || f->kind == Kind::Forall) bound.insert(f->var);
    if (f->left) collect_vars(f->left, bound, max_index);
    if (f->right) collect_vars(f->right, bound, max_index);
}

FormulaPtr rename_var(const FormulaPtr& f, int from, int to);

FormulaPtr clone_with(const FormulaPtr& f, FormulaPtr left, FormulaPtr right) {
    Formula out = *f;
    out.left = std::move(left);
    out.right = std::move(right);
    out.free.clear();
    if (out.left) out.free.insert(out.left->free.begin(), out.left->free.end());
    if (out.right) out.free.insert(out.right->free.begin(), out.right->free.end());
    switch (out.kind) {
        case Kind::Ind:
        case Kind::Card:
        case Kind::Empty:
        case Kind::Sing:
        case Kind::Basis:
        case Kind::Coind:
            out.free = {out.var};
            break;
        case Kind::Subseteq:
            out.free = {out.var, out.var2};
            break;
        case Kind::Exists:
        case Kind::Forall:
            out.free.erase(out.var);
            break;
        default:
            break;
    }
    return node(std::move(out));
}

// Rename every occurrence (free and binding) of `from` to `to`; used only on
// subformulas where `to` is globally fresh.
FormulaPtr rename_var(const FormulaPtr& f, int from, int to) {
    Formula out = *f;
    if (out.var == from) out.var = to;
    if (out.var2 == from) out.var2 = to;
    FormulaPtr left = out.left ? rename_var(out.left, from, to) : nullptr;
    FormulaPtr right = out.right ? rename_var(out.right, from, to) : nullptr;
    out.left = nullptr;
    out.right = nullptr;
    FormulaPtr shell = node(std::move(out));
    return clone_with(shell, std::move(left), std::move(right));
}

std::set<int> bound_vars(const FormulaPtr& f) {
    std::set<int> bound;
    int ignore = 0;
    collect_vars(f, bound, ignore);
    return bound;
}

// Enforce rule (iv): no variable free in one conjunct and bound in the
// other. The right conjunct is renamed.
FormulaPtr hygiene(const FormulaPtr& f, int& fresh) {
    FormulaPtr left = f->left ? hygiene(f->left, fresh) : nullptr;
    FormulaPtr right = f->right ? hygiene(f->right, fresh) : nullptr;
    if (f->kind == Kind::And || f->kind == Kind::Or || f->kind == Kind::Implies || f->kind == Kind::Iff) {
        std::set<int> lb = bound_vars(left), rb = bound_vars(right);
        for (int v : left->free)
            if (rb.count(v)) {
                right = rename_var(right, v, fresh++);
                rb = bound_vars(right);
            }
        for (int v : right->free)
            if (lb.count(v)) {
                left = rename_var(left, v, fresh++);
                lb = bound_vars(left);
            }
    }
    if (!f->left) return f;
    return clone_with(f, std::move(left), std::move(right));
}

}  // namespace

// ---- parser -------------------------------------------------------------------

namespace {

struct Token {
    enum Type { Var, Name, Int, Punct, End } type;
    std::string text;
    int value = 0;
    size_t pos = 0;
};

struct Lexer {
    std::string src;
    size_t pos = 0;
    Token cur;

    explicit Lexer(std::string s) : src(std::move(s)) { advance(); }

    [[noreturn]] void fail(const std::string& msg, size_t at) const {
        throw ValueError("parse error at offset " + std::to_string(at) + ": " + msg);
    }

    void advance() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == '#') {
                while (pos < src.size() && src[pos] != '\n') ++pos;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                ++pos;
                continue;
            }
            break;
        }
        if (pos >= src.size()) {
            cur = {Token::End, "", 0, pos};
            return;
        }
        size_t start = pos;
        char c = src[pos];
        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
                ++pos;
            std::string word = src.substr(start, pos - start);
            if (word[0] == 'X' && word.size() > 1 &&
                std::all_of(word.begin() + 1, word.end(),
                            [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
                int idx = std::stoi(word.substr(1));
                if (idx == 0) fail("variable index 0 is not allowed", start);
                cur = {Token::Var, word, idx, start};
                return;
            }
            cur = {Token::Name, word, 0, start};
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            cur = {Token::Int, src.substr(start, pos - start), std::stoi(src.substr(start, pos - start)),
                   start};
            return;
        }
        for (const char* punct : {"<->", "->", "<=", "&", "|", "~", "(", ")", ","}) {
            size_t len = std::strlen(punct);
            if (src.compare(pos, len, punct) == 0) {
                pos += len;
                cur = {Token::Punct, punct, 0, start};
                return;
            }
        }
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    bool eat_punct(const std::string& p) {
        if (cur.type == Token::Punct && cur.text == p) {
            advance();
            return true;
        }
        return false;
    }

    void expect_punct(const std::string& p) {
        if (!eat_punct(p)) fail("expected '" + p + "'", cur.pos);
    }
};

struct Parser {
    Lexer lex;

    explicit Parser(std::string src) : lex(std::move(src)) {}

    int expect_var() {
        if (lex.cur.type != Token::Var) lex.fail("expected a variable like X1", lex.cur.pos);
        int v = lex.cur.value;
        lex.advance();
        return v;
    }

    int expect_int() {
        if (lex.cur.type != Token::Int) lex.fail("expected an integer", lex.cur.pos);
        int v = lex.cur.value;
        lex.advance();
        return v;
    }

    FormulaPtr parse_formula() { return parse_iff(); }

    FormulaPtr parse_iff() {
        FormulaPtr f = parse_implies();
        while (lex.cur.type == Token::Punct && lex.cur.text == "<->") {
            lex.advance();
            f = make_iff(std::move(f), parse_implies());
        }
        return f;
    }

    FormulaPtr parse_implies() {
        FormulaPtr f = parse_or();
        if (lex.cur.type == Token::Punct && lex.cur.text == "->") {
            lex.advance();
            return make_implies(std::move(f), parse_implies());
        }
        return f;
    }

    FormulaPtr parse_or() {
        FormulaPtr f = parse_and();
        while (lex.cur.type == Token::Punct && lex.cur.text == "|") {
            lex.advance();
            f = make_or(std::move(f), parse_and());
        }
        return f;
    }

    FormulaPtr parse_and() {
        FormulaPtr f = parse_unary();
        while (lex.cur.type == Token::Punct && lex.cur.text == "&") {
            lex.advance();
            f = make_and(std::move(f), parse_unary());
        }
        return f;
    }

    FormulaPtr parse_unary() {
        if (lex.eat_punct("~")) return make_not(parse_unary());
        if (lex.cur.type == Token::Name && (lex.cur.text == "exists" || lex.cur.text == "forall")) {
            bool exists = lex.cur.text == "exists";
            lex.advance();
            int var = expect_var();
            FormulaPtr body = parse_formula();  // binds rightward maximally
            return exists ? make_exists(var, std::move(body)) : make_forall(var, std::move(body));
        }
        return parse_atom();
    }

    FormulaPtr parse_atom() {
        if (lex.eat_punct("(")) {
            FormulaPtr f = parse_formula();
            lex.expect_punct(")");
            return maybe_subseteq_tail(std::move(f));
        }
        if (lex.cur.type == Token::Name) {
            std::string name = lex.cur.text;
            size_t at = lex.cur.pos;
            lex.advance();
            if (name == "Ind") {
                lex.expect_punct("(");
                int var = expect_var();
                lex.expect_punct(")");
                return make_atom_ind(var);
            }
            if (name == "card") {
                lex.expect_punct("(");
                int var = expect_var();
                lex.expect_punct(",");
                int p = expect_int();
                lex.expect_punct(",");
                int q = expect_int();
                lex.expect_punct(")");
                return make_atom_card(var, p, q);
            }
            if (name == "Empty" || name == "Sing" || name == "Basis" || name == "Coind") {
                lex.expect_punct("(");
                int var = expect_var();
                lex.expect_punct(")");
                Kind kind = name == "Empty"  ? Kind::Empty
                            : name == "Sing" ? Kind::Sing
                            : name == "Basis" ? Kind::Basis
                                              : Kind::Coind;
                return make_named(kind, var);
            }
            lex.fail("unknown predicate '" + name + "'", at);
        }
        if (lex.cur.type == Token::Var) {
            int var = expect_var();
            lex.expect_punct("<=");
            int var2 = expect_var();
            return make_atom_subseteq(var, var2);
        }
        lex.fail("expected a formula", lex.cur.pos);
    }

    // no chained <= on parenthesized formulas; kept for symmetry
    FormulaPtr maybe_subseteq_tail(FormulaPtr f) { return f; }
};

}  // namespace

FormulaPtr parse(const std::string& text) {
    Parser parser(text);
    FormulaPtr f = parser.parse_formula();
    if (parser.lex.cur.type != Token::End) parser.lex.fail("trailing input", parser.lex.cur.pos);
    std::set<int> bound;
    int max_index = 0;
    collect_vars(f, bound, max_index);
    int fresh = max_index + 1;
    return hygiene(f, fresh);
}

FormulaPtr parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValueError("cannot open sentence file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse(os.str());
}

std::string to_string(const FormulaPtr& f) {
    auto var = [](int v) { return "X" + std::to_string(v); };
    switch (f->kind) {
        case Kind::Ind:
            return "Ind(" + var(f->var) + ")";
        case Kind::Subseteq:
            return var(f->var) + " <= " + var(f->var2);
        case Kind::Card:
            return "card(" + var(f->var) + "," + std::to_string(f->p) + "," + std::to_string(f->q) + ")";
        case Kind::Not:
            return "~" + to_string(f->left);
        case Kind::And:
            return "(" + to_string(f->left) + " & " + to_string(f->right) + ")";
        case Kind::Or:
            return "(" + to_string(f->left) + " | " + to_string(f->right) + ")";
        case Kind::Implies:
            return "(" + to_string(f->left) + " -> " + to_string(f->right) + ")";
        case Kind::Iff:
            return "(" + to_string(f->left) + " <-> " + to_string(f->right) + ")";
        case Kind::Exists:
            return "exists " + var(f->var) + " " + to_string(f->left);
        case Kind::Forall:
            return "forall " + var(f->var) + " " + to_string(f->left);
        case Kind::Empty:
            return "Empty(" + var(f->var) + ")";
        case Kind::Sing:
            return "Sing(" + var(f->var) + ")";
        case Kind::Basis:
            return "Basis(" + var(f->var) + ")";
        case Kind::Coind:
            return "Coind(" + var(f->var) + ")";
    }
    throw ValueError("to_string: bad formula");
}

bool is_sentence(const FormulaPtr& f) { return f->free.empty(); }

int quantifier_depth(const FormulaPtr& f) {
    int l = f->left ? quantifier_depth(f->left) : 0;
    int r = f->right ? quantifier_depth(f->right) : 0;
    int inner = std::max(l, r);
    switch (f->kind) {
        case Kind::Exists:
        case Kind::Forall:
            return inner + 1;
        case Kind::Empty:
            return 1;
        case Kind::Sing:
            return 2;  // nested Empty
        case Kind::Basis:
            return 1;
        case Kind::Coind:
            return 4;
        default:
            return inner;
    }
}

// ---- desugar -------------------------------------------------------------------

namespace {

int fresh_base(const FormulaPtr& f) {
    std::set<int> bound;
    int max_index = 0;
    collect_vars(f, bound, max_index);
    return max_index + 1;
}

FormulaPtr smart_not(FormulaPtr x) {
    if (x->kind == Kind::Not) return x->left;
    return make_not(std::move(x));
}

FormulaPtr desugar_rec(const FormulaPtr& f, int& fresh, bool keep_counting = false) {
    switch (f->kind) {
        case Kind::Ind:
        case Kind::Subseteq:
        case Kind::Card:
            return f;
        case Kind::Not:
            return smart_not(desugar_rec(f->left, fresh, keep_counting));
        case Kind::And:
            return make_and(desugar_rec(f->left, fresh, keep_counting), desugar_rec(f->right, fresh, keep_counting));
        case Kind::Exists:
            return make_exists(f->var, desugar_rec(f->left, fresh, keep_counting));
        case Kind::Or: {
            FormulaPtr a = desugar_rec(f->left, fresh, keep_counting);
            FormulaPtr b = desugar_rec(f->right, fresh, keep_counting);
            if (keep_counting) return make_or(std::move(a), std::move(b));
            return smart_not(make_and(smart_not(std::move(a)), smart_not(std::move(b))));
        }
        case Kind::Implies: {
            FormulaPtr a = desugar_rec(f->left, fresh, keep_counting);
            FormulaPtr b = desugar_rec(f->right, fresh, keep_counting);
            if (keep_counting) return make_implies(std::move(a), std::move(b));
            return smart_not(make_and(std::move(a), smart_not(std::move(b))));
        }
        case Kind::Iff: {
            if (keep_counting)
                return make_iff(desugar_rec(f->left, fresh, keep_counting),
                                desugar_rec(f->right, fresh, keep_counting));
            FormulaPtr fwd = desugar_rec(make_implies(f->left, f->right), fresh, keep_counting);
            FormulaPtr bwd = desugar_rec(make_implies(f->right, f->left), fresh, keep_counting);
            return make_and(std::move(fwd), std::move(bwd));
        }
        case Kind::Forall:
            return smart_not(make_exists(f->var, smart_not(desugar_rec(f->left, fresh, keep_counting))));
        case Kind::Empty: {
            if (keep_counting) return f;
            // forall X (X <= Xi -> Xi <= X)
            int x = fresh++;
            return desugar_rec(
                make_forall(x, make_implies(make_atom_subseteq(x, f->var), make_atom_subseteq(f->var, x))),
                fresh, keep_counting);
        }
        case Kind::Sing: {
            if (keep_counting) return f;
            // ~Empty(Xi) & forall X (X <= Xi -> (Empty(X) | Xi <= X))
            int x = fresh++;
            FormulaPtr body = make_implies(
                make_atom_subseteq(x, f->var),
                make_or(make_named(Kind::Empty, x), make_atom_subseteq(f->var, x)));
            return desugar_rec(make_and(make_not(make_named(Kind::Empty, f->var)), make_forall(x, body)),
                               fresh, keep_counting);
        }
        case Kind::Basis: {
            // Ind(Xi) & forall X ((Ind(X) & Xi <= X) -> X <= Xi)
            int x = fresh++;
            FormulaPtr body = make_implies(make_and(make_atom_ind(x), make_atom_subseteq(f->var, x)),
                                           make_atom_subseteq(x, f->var));
            return desugar_rec(make_and(make_atom_ind(f->var), make_forall(x, body)), fresh, keep_counting);
        }
        case Kind::Coind: {
            // exists B (Basis(B) & ~exists S (Sing(S) & S <= Xi & S <= B))
            int b = fresh++;
            int s = fresh++;
            FormulaPtr clash = make_and(
                make_named(Kind::Sing, s),
                make_and(make_atom_subseteq(s, f->var), make_atom_subseteq(s, b)));
            FormulaPtr body = make_and(make_named(Kind::Basis, b), make_not(make_exists(s, clash)));
            return desugar_rec(make_exists(b, body), fresh, keep_counting);
        }
    }
    throw ValueError("desugar: bad formula");
}

}  // namespace

FormulaPtr desugar(const FormulaPtr& f) {
    int fresh = fresh_base(f);
    return desugar_rec(f, fresh);
}

namespace {

// Desugar for compilation: Empty and Sing stay as native leaf counters.
FormulaPtr desugar_keep_counting(const FormulaPtr& f) {
    int fresh = fresh_base(f);
    return desugar_rec(f, fresh, true);
}

}  // namespace

// ---- evaluate ------------------------------------------------------------------

namespace {

struct Evaluator {
    const SetSystem& sys;
    int n;

    bool is_basis(Subset x) const {
        if (!sys.independent(x)) return false;
        // no proper independent superset
        Subset rest = full_set(n) & ~x;
        for (Subset extra : submasks(rest)) {
            if (extra == 0) continue;
            if (sys.independent(x | extra)) return false;
        }
        return true;
    }

    bool eval(const FormulaPtr& f, std::map<int, Subset>& theta) const {
        switch (f->kind) {
            case Kind::Ind:
                return sys.independent(theta.at(f->var));
            case Kind::Subseteq:
                return subset_of(theta.at(f->var), theta.at(f->var2));
            case Kind::Card:
                return popcount(theta.at(f->var)) % f->q == f->p;
            case Kind::Not:
                return !eval(f->left, theta);
            case Kind::And:
                return eval(f->left, theta) && eval(f->right, theta);
            case Kind::Or:
                return eval(f->left, theta) || eval(f->right, theta);
            case Kind::Implies:
                return !eval(f->left, theta) || eval(f->right, theta);
            case Kind::Iff:
                return eval(f->left, theta) == eval(f->right, theta);
            case Kind::Exists: {
                auto saved = theta.find(f->var) != theta.end()
                                 ? std::optional<Subset>(theta.at(f->var))
                                 : std::nullopt;
                bool found = false;
                for (Subset y = 0; y < (Subset{1} << n) && !found; ++y) {
                    theta[f->var] = y;
                    found = eval(f->left, theta);
                }
                if (saved)
                    theta[f->var] = *saved;
                else
                    theta.erase(f->var);
                return found;
            }
            case Kind::Forall: {
                auto saved = theta.find(f->var) != theta.end()
                                 ? std::optional<Subset>(theta.at(f->var))
                                 : std::nullopt;
                bool holds = true;
                for (Subset y = 0; y < (Subset{1} << n) && holds; ++y) {
                    theta[f->var] = y;
                    holds = eval(f->left, theta);
                }
                if (saved)
                    theta[f->var] = *saved;
                else
                    theta.erase(f->var);
                return holds;
            }
            case Kind::Empty:
                return theta.at(f->var) == 0;
            case Kind::Sing:
                return popcount(theta.at(f->var)) == 1;
            case Kind::Basis:
                return is_basis(theta.at(f->var));
            case Kind::Coind: {
                // some basis avoids theta(var)
                Subset rest = full_set(n) & ~theta.at(f->var);
                for (Subset b : submasks(rest))
                    if (is_basis(b)) return true;
                return false;
            }
        }
        throw ValueError("evaluate: bad formula");
    }
};

}  // namespace

bool evaluate(const SetSystem& sys, const FormulaPtr& f, const std::map<int, Subset>& theta) {
    for (int v : f->free)
        if (!theta.count(v))
            throw ValueError("evaluate: interpretation misses free variable X" + std::to_string(v));
    int depth = quantifier_depth(f);
    if (sys.size() * std::max(depth, 1) > 160)
        throw ResourceError("evaluate: ground set times quantifier depth exceeds the cap");
    Evaluator ev{sys, sys.size()};
    std::map<int, Subset> th = theta;
    return ev.eval(f, th);
}

// ---- stdlib ---------------------------------------------------------------------

const std::map<std::string, FormulaPtr>& stdlib_formulas() {
    static const std::map<std::string, FormulaPtr> lib = [] {
        std::map<std::string, FormulaPtr> out;
        out["Empty"] = make_named(Kind::Empty, 1);
        out["Sing"] = make_named(Kind::Sing, 1);
        out["Basis"] = make_named(Kind::Basis, 1);
        out["Coind"] = make_named(Kind::Coind, 1);
        // Nonempty family, single-element downward steps (downward closure by
        // finite descent), and basis exchange between maximal independent
        // sets characterize matroid families. Derived sets are pinned
        // pointwise through singleton quantifiers.
        const char* axioms =
            "(exists X1 Ind(X1))"
            " & (forall X1 forall X2 ((Ind(X1) & Sing(X2) & X2 <= X1) ->"
            "     exists X3 (Ind(X3) & X3 <= X1"
            "       & ~exists X4 (Sing(X4) & X4 <= X3 & X4 <= X2)"
            "       & ~exists X5 (Sing(X5) & X5 <= X1 & ~(X5 <= X3) & ~(X5 <= X2)))))"
            " & (forall X1 forall X2 forall X3"
            "    ((Basis(X1) & Basis(X2) & Sing(X3) & X3 <= X1 & ~(X3 <= X2)) ->"
            "     exists X4 (Sing(X4) & X4 <= X2 & ~(X4 <= X1) &"
            "       exists X5 (Basis(X5) & X4 <= X5 & ~(X3 <= X5)"
            "         & ~exists X6 (Sing(X6) & X6 <= X5 & ~(X6 <= X1) & ~(X6 <= X4))"
            "         & ~exists X6 (Sing(X6) & X6 <= X1 & ~(X6 <= X3) & ~(X6 <= X5))))))";
        out["matroid-axioms"] = parse(axioms);
        return out;
    }();
    return lib;
}

// ---- compile ----------------------------------------------------------------------

namespace {

using automata::Character;
using automata::LeafChar;
using automata::TreeAutomaton;

TreeAutomaton compile_ind(const TreeAutomaton& a_ind, int target) {
    if (a_ind.index_set.size() != 1)
        throw ValueError("compile: the Ind automaton must use exactly one variable index");
    int source = *a_ind.index_set.begin();
    if (source == target) return a_ind;
    TreeAutomaton out = a_ind;
    out.index_set = {target};
    out.delta0.clear();
    for (const auto& [c, img] : a_ind.delta0) {
        LeafChar lc = automata::split_leaf_char(c);
        auto it = lc.bits.find(source);
        if (it == lc.bits.end()) throw ValueError("compile: Ind automaton leaf lacks its variable bit");
        std::map<int, int> bits{{target, it->second}};
        out.delta0[automata::make_leaf_char(lc.base, bits)] = img;
    }
    return out;
}

TreeAutomaton compile_subseteq(const TreeAutomaton& a_ind, int i, int j) {
    TreeAutomaton out;
    out.base_alphabet = a_ind.base_alphabet;
    out.index_set = {i, j};
    out.num_states = 2;  // 0 = violation seen, 1 = ok
    out.accepting = {1};
    for (const Character& base : out.base_alphabet) {
        for (int bi = 0; bi < 2; ++bi)
            for (int bj = 0; bj < 2; ++bj) {
                std::map<int, int> bits;
                bits[i] = bi;
                bits[j] = bj;  // i == j collapses to a single bit
                if (i == j && bi != bj) continue;
                bool bad = bits.at(i) == 1 && bits.at(j) == 0;
                out.delta0[automata::make_leaf_char(base, bits)] = {bad ? 0 : 1};
            }
        for (int l = 0; l < 2; ++l)
            for (int r = 0; r < 2; ++r) out.delta2[base][{l, r}] = {l & r};
    }
    return out;
}

// Leaf-bit counters: Empty accepts when no leaf carries the bit, Sing when
// exactly one does.
TreeAutomaton compile_empty(const TreeAutomaton& a_ind, int j) {
    TreeAutomaton out;
    out.base_alphabet = a_ind.base_alphabet;
    out.index_set = {j};
    out.num_states = 2;  // count of marked leaves, capped at 1
    out.accepting = {0};
    for (const Character& base : out.base_alphabet) {
        for (int b = 0; b < 2; ++b) out.delta0[automata::make_leaf_char(base, {{j, b}})] = {b};
        auto& table = out.delta2[base];
        for (int l = 0; l < 2; ++l)
            for (int r = 0; r < 2; ++r) table[{l, r}] = {std::min(l + r, 1)};
    }
    return out;
}

TreeAutomaton compile_sing(const TreeAutomaton& a_ind, int j) {
    TreeAutomaton out;
    out.base_alphabet = a_ind.base_alphabet;
    out.index_set = {j};
    out.num_states = 3;  // count of marked leaves, capped at 2
    out.accepting = {1};
    for (const Character& base : out.base_alphabet) {
        for (int b = 0; b < 2; ++b) out.delta0[automata::make_leaf_char(base, {{j, b}})] = {b};
        auto& table = out.delta2[base];
        for (int l = 0; l < 3; ++l)
            for (int r = 0; r < 3; ++r) table[{l, r}] = {std::min(l + r, 2)};
    }
    return out;
}

TreeAutomaton compile_card(const TreeAutomaton& a_ind, int j, int p, int q) {
    TreeAutomaton out;
    out.base_alphabet = a_ind.base_alphabet;
    out.index_set = {j};
    out.num_states = q;
    out.accepting = {p};
    for (const Character& base : out.base_alphabet) {
        for (int b = 0; b < 2; ++b)
            out.delta0[automata::make_leaf_char(base, {{j, b}})] = {b % q};
        for (int l = 0; l < q; ++l)
            for (int r = 0; r < q; ++r) out.delta2[base][{l, r}] = {(l + r) % q};
    }
    return out;
}

// Conjunctions and projections stay deferred (automata::Pipeline); each
// negation runs the subset construction over the deferred chain and yields
// an explicit deterministic automaton again.
automata::Pipeline compile_rec(const FormulaPtr& f, const TreeAutomaton& a_ind, std::size_t cap) {
    using automata::Pipeline;
    switch (f->kind) {
        case Kind::Ind:
            return Pipeline::wrap(compile_ind(a_ind, f->var));
        case Kind::Subseteq:
            return Pipeline::wrap(compile_subseteq(a_ind, f->var, f->var2));
        case Kind::Card:
            return Pipeline::wrap(compile_card(a_ind, f->var, f->p, f->q));
        case Kind::Empty:
            return Pipeline::wrap(compile_empty(a_ind, f->var));
        case Kind::Sing:
            return Pipeline::wrap(compile_sing(a_ind, f->var));
        case Kind::Not: {
            Pipeline inner = compile_rec(f->left, a_ind, cap);
            TreeAutomaton det;
            if (inner.wrapped() && inner.wrapped()->deterministic())
                det = *inner.wrapped();
            else
                det = inner.determinize(cap);
            TreeAutomaton out = automata::complement(det);
            if (std::getenv("MMSO_DEBUG"))
                std::fprintf(stderr, "[compile not] %s -> states=%d d2=%zu\n",
                             to_string(f).substr(0, 70).c_str(), out.num_states,
                             out.transition_count());
            return Pipeline::wrap(std::move(out));
        }
        case Kind::And: {
            Pipeline a = compile_rec(f->left, a_ind, cap);
            Pipeline b = compile_rec(f->right, a_ind, cap);
            //Small deterministic pairs merge eagerly so Boolean products above
            // them stay available.
            if (a.wrapped() && b.wrapped() && a.wrapped()->deterministic() &&
                b.wrapped()->deterministic() &&
                static_cast<long long>(a.wrapped()->num_states) * b.wrapped()->num_states <= 4096)
                return Pipeline::wrap(automata::product(*a.wrapped(), *b.wrapped(), cap));
            return Pipeline::conjoin(std::move(a), std::move(b));
        }
        case Kind::Exists:
            return Pipeline::project(compile_rec(f->left, a_ind, cap), f->var);
        case Kind::Or: {
            Pipeline a = compile_rec(f->left, a_ind, cap);
            Pipeline b = compile_rec(f->right, a_ind, cap);
            if (a.wrapped() && b.wrapped() && a.wrapped()->deterministic() &&
                b.wrapped()->deterministic())
                return Pipeline::wrap(
                    automata::bool_product(automata::BoolOp::Or, *a.wrapped(), *b.wrapped(), cap));
            return compile_rec(smart_not(make_and(smart_not(f->left), smart_not(f->right))), a_ind, cap);
        }
        case Kind::Implies:
            return compile_rec(make_or(smart_not(f->left), f->right), a_ind, cap);
        case Kind::Iff: {
            Pipeline a = compile_rec(f->left, a_ind, cap);
            Pipeline b = compile_rec(f->right, a_ind, cap);
            if (a.wrapped() && b.wrapped() && a.wrapped()->deterministic() &&
                b.wrapped()->deterministic())
                return Pipeline::wrap(
                    automata::bool_product(automata::BoolOp::Iff, *a.wrapped(), *b.wrapped(), cap));
            return compile_rec(make_and(make_implies(f->left, f->right), make_implies(f->right, f->left)),
                               a_ind, cap);
        }
        default:
            throw ValueError("compile: formula must be desugared first");
    }
}

}  // namespace

automata::TreeAutomaton compile(const FormulaPtr& f, const automata::TreeAutomaton& a_ind,
                                std::size_t state_cap) {
    if (a_ind.index_set.size() != 1)
        throw ValueError("compile: the Ind automaton must use exactly one variable index");
    return compile_rec(desugar_keep_counting(f), a_ind, state_cap).materialize(state_cap);
}

}  // namespace mmso::logic
