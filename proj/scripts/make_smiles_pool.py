#!/usr/bin/env python3
"""Builds src/smiles_pool.cpp: 256 distinct, valid, drug-like SMILES.

Combines curated drugs with scaffold x substituent enumeration; every entry
is validated through the reference parser/fingerprint and deduplicated by
fingerprint so the synthetic generator sees 256 distinct structures.
"""

import sys

sys.path.insert(0, "scripts")
from ecfp_reference import parse_smiles, ecfp_bits

CURATED = [line.strip() for line in open("scripts/fixture_smiles.txt") if line.strip() and not line.startswith("#")]

SCAFFOLDS = [
    "c1ccc({R})cc1",                 # benzene
    "c1ccc2ccccc2c1{R}",             # naphthalene (appended)
    "c1ccnc({R})c1",                 # pyridine
    "c1cnc({R})nc1",                 # pyrimidine
    "c1ccc2[nH]c({R})cc2c1",         # indole
    "c1ccc2oc({R})cc2c1",            # benzofuran
    "c1ccc2sc({R})cc2c1",            # benzothiophene
    "c1ccc2nc({R})ccc2c1",           # quinoline
    "C1CCN({R})CC1",                 # piperidine
    "C1CN({R})CCN1C",                # N-methylpiperazine
    "c1cc(oc1){R}",                  # furan
    "c1cc(sc1){R}",                  # thiophene
    "c1cnn(C)c1{R}",                 # N-methylpyrazole
    "O=C(N1CCCC1){R}",               # pyrrolidine amide
    "O=S(=O)(N1CCOCC1){R}",          # morpholine sulfonamide
]

GROUPS = [
    "C", "CC", "CCC", "C(C)C", "C(C)(C)C", "O", "OC", "OCC", "N", "NC",
    "N(C)C", "F", "Cl", "Br", "C#N", "C(=O)O", "C(=O)OC", "C(=O)N",
    "C(F)(F)F", "S(=O)(=O)N", "CO", "CCO", "CC(=O)O", "C=C", "C(=O)C",
    "NCC", "OC(C)C", "CN", "CCN", "SC",
]


def fp_of(smi):
    atoms, bonds = parse_smiles(smi)
    return tuple(ecfp_bits(atoms, bonds))


def main():
    pool, seen = [], set()

    def add(smi):
        if len(pool) >= 256:
            return
        try:
            key = fp_of(smi)
        except Exception as e:  # noqa: BLE001 - reject anything unparseable
            print(f"reject {smi}: {e}", file=sys.stderr)
            return
        if key in seen:
            return
        seen.add(key)
        pool.append(smi)

    for smi in CURATED:
        add(smi)
    for scaf in SCAFFOLDS:
        for g in GROUPS:
            add(scaf.replace("{R}", g))
    # fallback filler: linear ethers/amines of varying length
    n = 1
    while len(pool) < 256:
        add("C" * n + "OC" * 2 + "N" + "C" * (n % 3))
        add("C" * n + "N(C)" + "CC(=O)O")
        add("C" * n + "Oc1ccccc1")
        n += 1
        if n > 64:
            raise SystemExit("could not fill the pool")

    with open("src/smiles_pool.cpp", "w") as f:
        f.write('#include "micon/dataset.hpp"\n\n')
        f.write("namespace micon::data {\n\n")
        f.write("// 256 distinct drug-like structures used to label synthetic compounds.\n")
        f.write("// Regenerate with scripts/make_smiles_pool.py.\n")
        f.write("const std::vector<std::string>& smiles_pool() {\n")
        f.write("    static const std::vector<std::string> pool = {\n")
        for smi in pool:
            f.write(f'        "{smi}",\n')
        f.write("    };\n    return pool;\n}\n\n}  // namespace micon::data\n")
    print(f"wrote {len(pool)} SMILES")


if __name__ == "__main__":
    main()
