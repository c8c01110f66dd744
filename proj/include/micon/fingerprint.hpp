#pragma once

#include <cstdint>
#include <vector>

#include "micon/smiles.hpp"

namespace micon::chem {

struct Fingerprint {
    uint32_t n_bits = 2048;
    std::vector<uint64_t> words;  // ceil(n_bits/64) words, LSB-first

    explicit Fingerprint(uint32_t bits = 2048) : n_bits(bits), words((bits + 63) / 64, 0) {}

    void set(uint32_t i) { words[i >> 6] |= (uint64_t{1} << (i & 63)); }
    bool test(uint32_t i) const { return (words[i >> 6] >> (i & 63)) & 1; }
    uint32_t popcount() const;
    std::vector<uint32_t> on_bits() const;
};

// Circular fingerprint over atom neighborhoods: initial identifiers hash the
// atom invariants (atomic number, heavy-atom degree, formal charge, attached
// hydrogens, ring membership, aromaticity); each iteration rehashes with the
// sorted (bond, neighbor) identifier list; environments covering an already
// seen atom set are dropped; identifiers fold onto n_bits by modulo.
Fingerprint ecfp(const Molecule& mol, int radius = 2, uint32_t n_bits = 2048);

double tanimoto(const Fingerprint& a, const Fingerprint& b);

// atomic numbers for the supported element symbols
int atomic_number(const std::string& element);

}  // namespace micon::chem
