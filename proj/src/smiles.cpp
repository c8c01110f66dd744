#include "micon/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "micon/errors.hpp"

namespace micon::chem {

std::vector<std::vector<uint32_t>> Molecule::adjacency() const {
    std::vector<std::vector<uint32_t>> adj(atoms.size());
    for (uint32_t bi = 0; bi < bonds.size(); ++bi) {
        adj[bonds[bi].a].push_back(bi);
        adj[bonds[bi].b].push_back(bi);
    }
    return adj;
}

namespace {

const std::set<std::string> kOrganicSubset = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
const std::set<std::string> kAromaticOrganic = {"b", "c", "n", "o", "p", "s"};
// Two-letter symbols must be matched before one-letter ones.
const std::set<std::string> kBracketElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",  "S",
    "Cl", "Ar", "K",  "Ca", "Fe", "Cu", "Zn", "As", "Se", "Br", "I",  "Sn", "Te", "Pt", "Au", "Hg"};

// default valence lists for implicit hydrogen filling
const std::map<std::string, std::vector<double>> kValences = {
    {"B", {3}}, {"C", {4}}, {"N", {3, 5}}, {"O", {2}}, {"P", {3, 5}},
    {"S", {2, 4, 6}}, {"F", {1}}, {"Cl", {1}}, {"Br", {1}}, {"I", {1}}};

double bond_order_value(BondOrder o) {
    switch (o) {
        case BondOrder::single: return 1.0;
        case BondOrder::double_: return 2.0;
        case BondOrder::triple: return 3.0;
        case BondOrder::aromatic: return 1.5;
    }
    return 1.0;
}

struct Parser {
    std::string_view s;
    size_t pos = 0;
    Molecule mol;
    std::vector<std::string>* warnings;

    // parse state
    std::vector<uint32_t> branch_stack;
    int prev_atom = -1;                       // -1 = fragment start
    BondOrder pending_bond = BondOrder::single;
    bool bond_pending = false;
    size_t pending_bond_pos = 0;
    // ring closure bookkeeping: number -> (atom, bond symbol if given, offset)
    struct RingOpen {
        uint32_t atom;
        bool has_bond;
        BondOrder bond;
        size_t offset;
    };
    std::map<int, RingOpen> ring_open;
    std::vector<bool> explicit_h;  // bracket atoms: H fixed, no valence filling

    void warn(const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    }

    [[noreturn]] void fail(const std::string& msg, size_t at) { throw ParseError(msg, at); }

    char peek() const { return pos < s.size() ? s[pos] : '\0'; }

    uint32_t add_atom(Atom a, bool has_explicit_h) {
        mol.atoms.push_back(std::move(a));
        explicit_h.push_back(has_explicit_h);
        return static_cast<uint32_t>(mol.atoms.size() - 1);
    }

    void add_bond(uint32_t a, uint32_t b, BondOrder order, size_t at) {
        if (a == b) fail("ring bond to self", at);
        for (const auto& bd : mol.bonds)
            if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) fail("duplicate bond", at);
        mol.bonds.push_back({a, b, order});
    }

    BondOrder take_pending(uint32_t from, uint32_t to) {
        if (bond_pending) {
            bond_pending = false;
            return pending_bond;
        }
        // default bond: aromatic when both ends are aromatic, single otherwise
        if (mol.atoms[from].aromatic && mol.atoms[to].aromatic) return BondOrder::aromatic;
        return BondOrder::single;
    }

    void attach(uint32_t idx, size_t at) {
        if (prev_atom >= 0) {
            BondOrder o = take_pending(static_cast<uint32_t>(prev_atom), idx);
            add_bond(static_cast<uint32_t>(prev_atom), idx, o, at);
        } else if (bond_pending) {
            fail("bond with no preceding atom", pending_bond_pos);
        }
        prev_atom = static_cast<int>(idx);
    }

    void ring_closure(int num, size_t at) {
        auto it = ring_open.find(num);
        if (it == ring_open.end()) {
            if (prev_atom < 0) fail("ring closure before any atom", at);
            RingOpen ro;
            ro.atom = static_cast<uint32_t>(prev_atom);
            ro.has_bond = bond_pending;
            ro.bond = pending_bond;
            ro.offset = at;
            bond_pending = false;
            ring_open[num] = ro;
        } else {
            RingOpen ro = it->second;
            ring_open.erase(it);
            if (prev_atom < 0) fail("ring closure before any atom", at);
            BondOrder order;
            if (bond_pending) {
                order = pending_bond;
                bond_pending = false;
                if (ro.has_bond && ro.bond != order) fail("conflicting ring bond orders", at);
            } else if (ro.has_bond) {
                order = ro.bond;
            } else {
                const auto& a = mol.atoms[ro.atom];
                const auto& b = mol.atoms[static_cast<uint32_t>(prev_atom)];
                order = (a.aromatic && b.aromatic) ? BondOrder::aromatic : BondOrder::single;
            }
            add_bond(ro.atom, static_cast<uint32_t>(prev_atom), order, at);
        }
    }

    Atom parse_bracket(size_t open_at, bool& has_explicit_h) {
        Atom atom;
        has_explicit_h = true;  // bracket atoms never get valence-filled H
        ++pos;                  // consume '['
        // isotope: accepted, ignored
        size_t iso_start = pos;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
        if (pos > iso_start) warn("isotope ignored at offset " + std::to_string(iso_start));
        // element symbol, possibly aromatic lowercase
        if (peek() == '\0') fail("unterminated bracket atom", open_at);
        if (std::islower(static_cast<unsigned char>(peek()))) {
            // aromatic bracket atom, e.g. [nH]; try two-letter aromatic (se, as)
            std::string two = std::string(s.substr(pos, 2));
            if (two == "se" || two == "as") {
                atom.element = static_cast<char>(std::toupper(two[0])) + two.substr(1);
                pos += 2;
            } else {
                char c = peek();
                std::string sym(1, static_cast<char>(std::toupper(c)));
                if (kAromaticOrganic.count(std::string(1, c)) == 0)
                    fail("unknown aromatic element '" + std::string(1, c) + "'", pos);
                atom.element = sym;
                ++pos;
            }
            atom.aromatic = true;
        } else {
            std::string two = std::string(s.substr(pos, 2));
            if (two.size() == 2 && std::islower(static_cast<unsigned char>(two[1])) &&
                kBracketElements.count(two)) {
                atom.element = two;
                pos += 2;
            } else {
                std::string one(1, peek());
                if (!kBracketElements.count(one)) fail("unknown element '" + one + "'", pos);
                atom.element = one;
                ++pos;
            }
        }
        // chirality: accepted, ignored
        if (peek() == '@') {
            size_t at = pos;
            ++pos;
            if (peek() == '@') ++pos;
            // @TH1-style tags not supported; plain @/@@ only
            warn("chirality ignored at offset " + std::to_string(at));
        }
        // explicit hydrogens
        if (peek() == 'H') {
            ++pos;
            int count = 1;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                count = 0;
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    count = count * 10 + (peek() - '0');
                    ++pos;
                }
            }
            atom.hydrogens = count;
        }
        // charge
        if (peek() == '+' || peek() == '-') {
            const int sign = peek() == '+' ? 1 : -1;
            ++pos;
            int mag = 1;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                mag = 0;
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    mag = mag * 10 + (peek() - '0');
                    ++pos;
                }
            } else {
                while (peek() == (sign > 0 ? '+' : '-')) {
                    ++mag;
                    ++pos;
                }
            }
            atom.formal_charge = sign * mag;
        }
        if (peek() != ']') fail("expected ']' in bracket atom", pos);
        ++pos;
        return atom;
    }

    void parse() {
        if (s.empty()) fail("empty SMILES", 0);
        while (pos < s.size()) {
            const char c = s[pos];
            const size_t at = pos;
            if (c == '[') {
                bool he = false;
                Atom a = parse_bracket(at, he);
                attach(add_atom(std::move(a), he), at);
            } else if (std::isupper(static_cast<unsigned char>(c))) {
                std::string two = std::string(s.substr(pos, 2));
                std::string sym;
                if (two.size() == 2 && std::islower(static_cast<unsigned char>(two[1])) &&
                    kOrganicSubset.count(two)) {
                    sym = two;
                    pos += 2;
                } else if (kOrganicSubset.count(std::string(1, c))) {
                    sym = std::string(1, c);
                    ++pos;
                } else {
                    fail("unknown element '" + std::string(1, c) + "' outside brackets", at);
                }
                Atom a;
                a.element = sym;
                attach(add_atom(std::move(a), false), at);
            } else if (std::islower(static_cast<unsigned char>(c))) {
                if (!kAromaticOrganic.count(std::string(1, c)))
                    fail("unknown aromatic element '" + std::string(1, c) + "'", at);
                Atom a;
                a.element = std::string(1, static_cast<char>(std::toupper(c)));
                a.aromatic = true;
                ++pos;
                attach(add_atom(std::move(a), false), at);
            } else if (c == '-' || c == '=' || c == '#' || c == ':') {
                if (bond_pending) fail("two bond symbols in a row", at);
                bond_pending = true;
                pending_bond_pos = at;
                pending_bond = c == '-'   ? BondOrder::single
                               : c == '=' ? BondOrder::double_
                               : c == '#' ? BondOrder::triple
                                          : BondOrder::aromatic;
                ++pos;
            } else if (c == '/' || c == '\\') {
                if (bond_pending) fail("two bond symbols in a row", at);
                warn("stereo bond ignored at offset " + std::to_string(at));
                bond_pending = true;
                pending_bond_pos = at;
                pending_bond = BondOrder::single;
                ++pos;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                ring_closure(c - '0', at);
                ++pos;
            } else if (c == '%') {
                if (pos + 2 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos + 1])) ||
                    !std::isdigit(static_cast<unsigned char>(s[pos + 2])))
                    fail("'%' needs two digits", at);
                ring_closure((s[pos + 1] - '0') * 10 + (s[pos + 2] - '0'), at);
                pos += 3;
            } else if (c == '(') {
                if (prev_atom < 0) fail("branch before any atom", at);
                branch_stack.push_back(static_cast<uint32_t>(prev_atom));
                ++pos;
            } else if (c == ')') {
                if (branch_stack.empty()) fail("unbalanced ')'", at);
                prev_atom = static_cast<int>(branch_stack.back());
                branch_stack.pop_back();
                ++pos;
            } else if (c == '.') {
                if (bond_pending) fail("bond before '.'", pending_bond_pos);
                prev_atom = -1;
                ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                break;  // trailing title/whitespace terminates the SMILES proper
            } else {
                fail(std::string("unexpected character '") + c + "'", at);
            }
        }
        if (!branch_stack.empty()) fail("unbalanced '('", s.size());
        if (bond_pending) fail("dangling bond symbol", pending_bond_pos);
        if (!ring_open.empty()) fail("dangling ring closure", ring_open.begin()->second.offset);
        if (mol.atoms.empty()) fail("no atoms", 0);
    }

    // Atoms are in a ring iff they touch a non-bridge edge (found via DFS).
    void perceive_rings() {
        const size_t n = mol.atoms.size();
        auto adj = mol.adjacency();
        std::vector<int> disc(n, -1), low(n, 0);
        std::vector<bool> bridge(mol.bonds.size(), false);
        int timer = 0;
        std::function<void(uint32_t, int)> dfs = [&](uint32_t v, int parent_edge) {
            disc[v] = low[v] = timer++;
            for (uint32_t bi : adj[v]) {
                if (static_cast<int>(bi) == parent_edge) continue;
                const uint32_t u = mol.bonds[bi].a == v ? mol.bonds[bi].b : mol.bonds[bi].a;
                if (disc[u] == -1) {
                    dfs(u, static_cast<int>(bi));
                    low[v] = std::min(low[v], low[u]);
                    if (low[u] > disc[v]) bridge[bi] = true;
                } else {
                    low[v] = std::min(low[v], disc[u]);
                }
            }
        };
        for (uint32_t v = 0; v < n; ++v)
            if (disc[v] == -1) dfs(v, -1);
        for (uint32_t bi = 0; bi < mol.bonds.size(); ++bi) {
            if (!bridge[bi]) {
                mol.atoms[mol.bonds[bi].a].in_ring = true;
                mol.atoms[mol.bonds[bi].b].in_ring = true;
            }
        }
    }

    void fill_hydrogens() {
        const size_t n = mol.atoms.size();
        std::vector<double> bond_sum(n, 0.0);
        for (const auto& b : mol.bonds) {
            const double v = bond_order_value(b.order);
            bond_sum[b.a] += v;
            bond_sum[b.b] += v;
        }
        for (size_t i = 0; i < n; ++i) {
            if (explicit_h[i]) continue;  // bracket atom: H count fixed by the text
            auto it = kValences.find(mol.atoms[i].element);
            if (it == kValences.end()) {
                mol.atoms[i].hydrogens = 0;
                continue;
            }
            const double used = bond_sum[i];
            const double needed = std::ceil(used - 1e-9);
            if (mol.atoms[i].aromatic) {
                // aromatic atoms never escalate beyond their lowest valence
                const double target = it->second.front();
                mol.atoms[i].hydrogens = static_cast<int>(std::max(0.0, target - needed));
            } else {
                int h = 0;
                for (double v : it->second) {
                    if (v >= needed - 1e-9) {
                        h = static_cast<int>(v - needed);
                        break;
                    }
                }
                mol.atoms[i].hydrogens = h;
            }
        }
    }
};

}  // namespace

Molecule parse_smiles(std::string_view text, std::vector<std::string>* warnings) {
    Parser p;
    p.s = text;
    p.warnings = warnings;
    p.parse();
    p.perceive_rings();
    p.fill_hydrogens();
    return std::move(p.mol);
}

}  // namespace micon::chem
