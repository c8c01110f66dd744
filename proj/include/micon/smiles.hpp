#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace micon::chem {

enum class BondOrder : uint8_t { single = 1, double_ = 2, triple = 3, aromatic = 4 };

struct Atom {
    std::string element;   // canonical symbol, e.g. "C", "Cl"
    int formal_charge = 0;
    bool aromatic = false;
    int hydrogens = 0;     // attached (implicit + bracket-explicit) H count
    bool in_ring = false;  // filled by ring perception after parsing
};

struct Bond {
    uint32_t a = 0, b = 0;
    BondOrder order = BondOrder::single;
};

struct Molecule {
    std::vector<Atom> atoms;
    std::vector<Bond> bonds;

    std::vector<std::vector<uint32_t>> adjacency() const;  // bond indices per atom
};

// Parses a practical SMILES subset: organic-subset atoms, bracket atoms with
// charge and explicit H, aromatic lowercase, branches, ring closures (digits
// and %nn), disconnected fragments via '.'.  Stereo markers (/ \ @) and
// isotopes are accepted and ignored; each emits a warning.  Anything else is
// rejected with the byte offset of the offending character.
Molecule parse_smiles(std::string_view text, std::vector<std::string>* warnings = nullptr);

}  // namespace micon::chem
