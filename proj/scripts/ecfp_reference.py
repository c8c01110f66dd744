#!/usr/bin/env python3
"""Reference implementation of the circular-fingerprint scheme, used to
generate data/ecfp_fixture.tsv.

Written directly from the documented algorithm (atom invariants -> FNV-1a ->
radius iterations with atom-set dedup -> fold mod n_bits) as an independent
oracle for the C++ implementation.  Usage:

    python3 scripts/ecfp_reference.py < smiles.txt > fixture.tsv

Each input line: one SMILES.  Output: smiles, popcount, sorted on-bit list.
Pairs of consecutive molecules also get a tanimoto line.
"""

import math
import sys

ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
AROMATIC = {"b", "c", "n", "o", "p", "s"}
BRACKET = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Fe", "Cu", "Zn", "As", "Se",
    "Br", "I", "Sn", "Te", "Pt", "Au", "Hg",
}
Z = {
    "H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8,
    "F": 9, "Ne": 10, "Na": 11, "Mg": 12, "Al": 13, "Si": 14, "P": 15,
    "S": 16, "Cl": 17, "Ar": 18, "K": 19, "Ca": 20, "Fe": 26, "Cu": 29,
    "Zn": 30, "As": 33, "Se": 34, "Br": 35, "Sn": 50, "Te": 52, "I": 53,
    "Pt": 78, "Au": 79, "Hg": 80,
}
VALENCES = {
    "B": [3], "C": [4], "N": [3, 5], "O": [2], "P": [3, 5],
    "S": [2, 4, 6], "F": [1], "Cl": [1], "Br": [1], "I": [1],
}
BOND_VALUE = {1: 1.0, 2: 2.0, 3: 3.0, 4: 1.5}  # 4 = aromatic


class Atom:
    def __init__(self, element, aromatic=False):
        self.element = element
        self.aromatic = aromatic
        self.charge = 0
        self.hydrogens = 0
        self.explicit_h = False
        self.in_ring = False


def parse_smiles(text):
    atoms, bonds = [], []
    stack, prev = [], -1
    pending = None
    ring = {}
    i, n = 0, len(text)

    def add_bond(a, b, order):
        bonds.append((a, b, order))

    def default_order(a, b):
        return 4 if atoms[a].aromatic and atoms[b].aromatic else 1

    def attach(idx):
        nonlocal prev, pending
        if prev >= 0:
            order = pending if pending is not None else default_order(prev, idx)
            add_bond(prev, idx, order)
        pending = None
        prev = idx

    while i < n:
        c = text[i]
        if c == "[":
            i += 1
            while i < n and text[i].isdigit():
                i += 1  # isotope ignored
            if text[i].islower():
                if text[i : i + 2] in ("se", "as"):
                    sym, i = text[i : i + 2].capitalize(), i + 2
                else:
                    sym, i = text[i].upper(), i + 1
                atom = Atom(sym, aromatic=True)
            else:
                if text[i : i + 2] in BRACKET and text[i + 1 : i + 2].islower():
                    sym, i = text[i : i + 2], i + 2
                else:
                    sym, i = text[i], i + 1
                if sym not in BRACKET:
                    raise ValueError(f"unknown element {sym}")
                atom = Atom(sym)
            while i < n and text[i] == "@":
                i += 1  # chirality ignored
            atom.explicit_h = True
            if i < n and text[i] == "H":
                i += 1
                cnt = 0
                while i < n and text[i].isdigit():
                    cnt = cnt * 10 + int(text[i])
                    i += 1
                atom.hydrogens = cnt if cnt else 1
            if i < n and text[i] in "+-":
                sign = 1 if text[i] == "+" else -1
                i += 1
                mag = 0
                while i < n and text[i].isdigit():
                    mag = mag * 10 + int(text[i])
                    i += 1
                if mag == 0:
                    mag = 1
                    while i < n and text[i] == ("+" if sign > 0 else "-"):
                        mag += 1
                        i += 1
                atom.charge = sign * mag
            assert text[i] == "]", f"expected ] at {i}"
            i += 1
            atoms.append(atom)
            attach(len(atoms) - 1)
        elif c.isupper():
            if text[i : i + 2] in ORGANIC and text[i + 1 : i + 2].islower():
                sym, i = text[i : i + 2], i + 2
            elif c in ORGANIC:
                sym, i = c, i + 1
            else:
                raise ValueError(f"unknown element {c}")
            atoms.append(Atom(sym))
            attach(len(atoms) - 1)
        elif c.islower():
            if c not in AROMATIC:
                raise ValueError(f"unknown aromatic {c}")
            atoms.append(Atom(c.upper(), aromatic=True))
            i += 1
            attach(len(atoms) - 1)
        elif c in "-=#:":
            pending = {"-": 1, "=": 2, "#": 3, ":": 4}[c]
            i += 1
        elif c in "/\\":
            pending = 1
            i += 1
        elif c.isdigit() or c == "%":
            if c == "%":
                num = int(text[i + 1 : i + 3])
                i += 3
            else:
                num = int(c)
                i += 1
            if num in ring:
                a, order_open = ring.pop(num)
                order = pending if pending is not None else order_open
                if order is None:
                    order = default_order(a, prev)
                add_bond(a, prev, order)
                pending = None
            else:
                ring[num] = (prev, pending)
                pending = None
        elif c == "(":
            stack.append(prev)
            i += 1
        elif c == ")":
            prev = stack.pop()
            i += 1
        elif c == ".":
            prev = -1
            i += 1
        else:
            raise ValueError(f"unexpected char {c!r} at {i}")
    assert not ring, "dangling ring closure"
    assert not stack, "unbalanced ("

    # ring membership: edges not bridges
    adj = [[] for _ in atoms]
    for bi, (a, b, _o) in enumerate(bonds):
        adj[a].append(bi)
        adj[b].append(bi)
    disc = [-1] * len(atoms)
    low = [0] * len(atoms)
    bridge = [False] * len(bonds)
    timer = [0]
    sys.setrecursionlimit(10000)

    def dfs(v, pe):
        disc[v] = low[v] = timer[0]
        timer[0] += 1
        for bi in adj[v]:
            if bi == pe:
                continue
            a, b, _o = bonds[bi]
            u = b if a == v else a
            if disc[u] == -1:
                dfs(u, bi)
                low[v] = min(low[v], low[u])
                if low[u] > disc[v]:
                    bridge[bi] = True
            else:
                low[v] = min(low[v], disc[u])

    for v in range(len(atoms)):
        if disc[v] == -1:
            dfs(v, -1)
    for bi, (a, b, _o) in enumerate(bonds):
        if not bridge[bi]:
            atoms[a].in_ring = True
            atoms[b].in_ring = True

    # implicit hydrogens
    bond_sum = [0.0] * len(atoms)
    for a, b, o in bonds:
        bond_sum[a] += BOND_VALUE[o]
        bond_sum[b] += BOND_VALUE[o]
    for idx, atom in enumerate(atoms):
        if atom.explicit_h:
            continue
        vals = VALENCES.get(atom.element)
        if not vals:
            atom.hydrogens = 0
            continue
        needed = math.ceil(bond_sum[idx] - 1e-9)
        if atom.aromatic:
            atom.hydrogens = max(0, int(vals[0] - needed))
        else:
            atom.hydrogens = 0
            for v in vals:
                if v >= needed - 1e-9:
                    atom.hydrogens = int(v - needed)
                    break
    return atoms, bonds


def fnv1a(values):
    h = 2166136261
    for v in values:
        v &= 0xFFFFFFFF
        for b in range(4):
            h ^= (v >> (8 * b)) & 0xFF
            h = (h * 16777619) & 0xFFFFFFFF
    return h


def ecfp_bits(atoms, bonds, radius=2, n_bits=2048):
    n = len(atoms)
    adj = [[] for _ in range(n)]
    for bi, (a, b, o) in enumerate(bonds):
        adj[a].append((b, o))
        adj[b].append((a, o))
    ids = [
        fnv1a([
            Z[a.element], len(adj[i]), a.charge, a.hydrogens,
            1 if a.in_ring else 0, 1 if a.aromatic else 0,
        ])
        for i, a in enumerate(atoms)
    ]
    emitted = list(ids)
    env = [frozenset([i]) for i in range(n)]
    seen = set(env)
    for r in range(1, radius + 1):
        new_ids, new_env = [], []
        for i in range(n):
            nbrs = sorted((o, ids[j]) for j, o in adj[i])
            tup = [r, ids[i]]
            for o, nid in nbrs:
                tup += [o, nid]
            new_ids.append(fnv1a(tup))
            e = set(env[i])
            for j, _o in adj[i]:
                e |= env[j]
            new_env.append(frozenset(e))
        for i in sorted(range(n), key=lambda k: (new_ids[k], sorted(new_env[k]))):
            if new_env[i] not in seen:
                seen.add(new_env[i])
                emitted.append(new_ids[i])
        ids, env = new_ids, new_env
    return sorted({e % n_bits for e in emitted})


def main():
    rows = []
    for line in sys.stdin:
        smi = line.strip()
        if not smi or smi.startswith("#"):
            continue
        atoms, bonds = parse_smiles(smi)
        bits = ecfp_bits(atoms, bonds)
        rows.append((smi, bits))
        print(f"fp\t{smi}\t{len(bits)}\t{','.join(map(str, bits))}")
    for (s1, b1), (s2, b2) in zip(rows, rows[1:]):
        inter = len(set(b1) & set(b2))
        union = len(set(b1) | set(b2))
        t = 1.0 if union == 0 else inter / union
        print(f"tanimoto\t{s1}\t{s2}\t{t:.10f}")


if __name__ == "__main__":
    main()
