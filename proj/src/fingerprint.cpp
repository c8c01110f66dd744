#include "micon/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>
#include <stdexcept>

namespace micon::chem {

uint32_t Fingerprint::popcount() const {
    uint32_t n = 0;
    for (uint64_t w : words) n += static_cast<uint32_t>(std::popcount(w));
    return n;
}

std::vector<uint32_t> Fingerprint::on_bits() const {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < n_bits; ++i)
        if (test(i)) out.push_back(i);
    return out;
}

int atomic_number(const std::string& element) {
    static const std::map<std::string, int> z = {
        {"H", 1},   {"He", 2},  {"Li", 3},  {"Be", 4},  {"B", 5},   {"C", 6},   {"N", 7},   {"O", 8},
        {"F", 9},   {"Ne", 10}, {"Na", 11}, {"Mg", 12}, {"Al", 13}, {"Si", 14}, {"P", 15},  {"S", 16},
        {"Cl", 17}, {"Ar", 18}, {"K", 19},  {"Ca", 20}, {"Fe", 26}, {"Cu", 29}, {"Zn", 30}, {"As", 33},
        {"Se", 34}, {"Br", 35}, {"Sn", 50}, {"Te", 52}, {"I", 53},  {"Pt", 78}, {"Au", 79}, {"Hg", 80}};
    auto it = z.find(element);
    if (it == z.end()) throw std::invalid_argument("unknown element: " + element);
    return it->second;
}

namespace {

// FNV-1a over 32-bit little-endian words
uint32_t fnv1a(const std::vector<uint32_t>& values) {
    uint32_t h = 2166136261u;
    for (uint32_t v : values) {
        for (int b = 0; b < 4; ++b) {
            h ^= (v >> (8 * b)) & 0xffu;
            h *= 16777619u;
        }
    }
    return h;
}

uint32_t bond_code(BondOrder o) { return static_cast<uint32_t>(o); }  // single 1 … aromatic 4

}  // namespace

Fingerprint ecfp(const Molecule& mol, int radius, uint32_t n_bits) {
    if (radius < 0) throw std::invalid_argument("ecfp: radius must be >= 0");
    if (n_bits == 0) throw std::invalid_argument("ecfp: n_bits must be > 0");
    const size_t n = mol.atoms.size();
    auto adj = mol.adjacency();

    // initial identifiers from atom invariants
    std::vector<uint32_t> id(n);
    for (size_t i = 0; i < n; ++i) {
        const Atom& a = mol.atoms[i];
        id[i] = fnv1a({static_cast<uint32_t>(atomic_number(a.element)),
                       static_cast<uint32_t>(adj[i].size()),
                       static_cast<uint32_t>(static_cast<int32_t>(a.formal_charge)),
                       static_cast<uint32_t>(a.hydrogens),
                       a.in_ring ? 1u : 0u,
                       a.aromatic ? 1u : 0u});
    }

    std::vector<uint32_t> emitted = id;  // all radius-0 identifiers count
    // environment of atom i = set of atoms within the current radius
    std::vector<std::set<uint32_t>> env(n);
    std::set<std::set<uint32_t>> seen_sets;
    for (uint32_t i = 0; i < n; ++i) {
        env[i] = {i};
        seen_sets.insert(env[i]);
    }

    for (int r = 1; r <= radius; ++r) {
        std::vector<uint32_t> next_id(n);
        std::vector<std::set<uint32_t>> next_env = env;
        for (uint32_t i = 0; i < n; ++i) {
            std::vector<std::pair<uint32_t, uint32_t>> nbrs;  // (bond code, neighbor id)
            for (uint32_t bi : adj[i]) {
                const Bond& b = mol.bonds[bi];
                const uint32_t j = b.a == i ? b.b : b.a;
                nbrs.emplace_back(bond_code(b.order), id[j]);
                next_env[i].insert(env[j].begin(), env[j].end());
            }
            std::sort(nbrs.begin(), nbrs.end());
            std::vector<uint32_t> tuple{static_cast<uint32_t>(r), id[i]};
            for (const auto& [bc, nid] : nbrs) {
                tuple.push_back(bc);
                tuple.push_back(nid);
            }
            next_id[i] = fnv1a(tuple);
        }
        // process candidates in identifier order so renumbering cannot change
        // which duplicate of an atom set survives
        std::vector<uint32_t> order(n);
        for (uint32_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            if (next_id[a] != next_id[b]) return next_id[a] < next_id[b];
            return next_env[a] < next_env[b];
        });
        for (uint32_t i : order) {
            if (seen_sets.insert(next_env[i]).second) emitted.push_back(next_id[i]);
        }
        id = std::move(next_id);
        env = std::move(next_env);
    }

    Fingerprint fp(n_bits);
    for (uint32_t e : emitted) fp.set(e % n_bits);
    return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
    if (a.n_bits != b.n_bits) throw std::invalid_argument("tanimoto: n_bits mismatch");
    uint64_t inter = 0, uni = 0;
    for (size_t w = 0; w < a.words.size(); ++w) {
        inter += std::popcount(a.words[w] & b.words[w]);
        uni += std::popcount(a.words[w] | b.words[w]);
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace micon::chem
