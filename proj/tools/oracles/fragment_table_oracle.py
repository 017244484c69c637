"""Independent recount of the SA fragment table over the 500-CRU fixture.

Re-derives radius-2 circular environments on RDKit graphs (stars capped
with hydrogen, aromatic flags as written) using the same 64-bit mixing as
the library, then writes the table JSON exactly as the library serializes
it. The unit suite compares the two byte for byte.

    python3 tools/oracles/fragment_table_oracle.py data/fixture_crus.csv tests/data/fixture_fragment_table.json
"""
import csv
import json
import math
import sys

from rdkit import Chem, RDLogger

RDLogger.DisableLog("rdApp.*")
MASK = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def hash_combine(seed, value):
    mixed = (splitmix64(value & MASK) + 0x9E3779B97F4A7C15 + ((seed << 6) & MASK) + (seed >> 2)) & MASK
    return splitmix64(seed ^ mixed)


def load(smiles):
    mol = Chem.MolFromSmiles(smiles, sanitize=False)
    rw = Chem.RWMol(mol)
    for atom in list(rw.GetAtoms()):
        if atom.GetAtomicNum() == 0:
            partner = atom.GetNeighbors()[0]
            if partner.GetNoImplicit():
                partner.SetNumExplicitHs(partner.GetNumExplicitHs() + 1)
    for idx in sorted((a.GetIdx() for a in rw.GetAtoms() if a.GetAtomicNum() == 0), reverse=True):
        rw.RemoveAtom(idx)
    m = rw.GetMol()
    ops = Chem.SanitizeFlags.SANITIZE_ALL ^ Chem.SanitizeFlags.SANITIZE_KEKULIZE ^ Chem.SanitizeFlags.SANITIZE_SETAROMATICITY
    Chem.SanitizeMol(m, ops)
    return m


def bond_code(bond):
    t = bond.GetBondType()
    return {Chem.BondType.SINGLE: 1, Chem.BondType.DOUBLE: 2, Chem.BondType.TRIPLE: 3, Chem.BondType.AROMATIC: 4}[t]


def environments(mol, radius=2):
    n = mol.GetNumAtoms()
    out = {}
    inv = []
    for a in mol.GetAtoms():
        h = splitmix64(a.GetAtomicNum())
        h = hash_combine(h, a.GetDegree())
        h = hash_combine(h, a.GetTotalNumHs())
        h = hash_combine(h, a.GetFormalCharge() & MASK)
        h = hash_combine(h, 1 if a.IsInRing() else 0)
        h = hash_combine(h, 1 if a.GetIsAromatic() else 0)
        inv.append(h)
        out[h] = out.get(h, 0) + 1
    env = [frozenset() for _ in range(n)]
    seen = {frozenset()}
    alive = [True] * n
    for layer in range(1, radius + 1):
        rnd = []
        nxt = list(inv)
        for i in range(n):
            if not alive[i]:
                continue
            atom = mol.GetAtomWithIdx(i)
            bonds = set(env[i])
            nbrs = []
            for b in atom.GetBonds():
                j = b.GetOtherAtomIdx(i)
                nbrs.append((bond_code(b), inv[j]))
                bonds.add(b.GetIdx())
                bonds |= env[j]
            nbrs.sort()
            h = hash_combine(layer, inv[i])
            for order, v in nbrs:
                h = hash_combine(hash_combine(h, order), v)
            nxt[i] = h
            rnd.append((h, i, frozenset(bonds)))
        rnd.sort(key=lambda c: c[0])  # stable, like std::stable_sort
        for h, i, bonds in rnd:
            env[i] = bonds
            if bonds in seen:
                alive[i] = False
                continue
            seen.add(bonds)
            out[h] = out.get(h, 0) + 1
        inv = nxt
    return out


def main(src, dst):
    counts = {}
    rows = list(csv.DictReader(open(src)))
    for row in rows:
        for h, c in environments(load(row["smiles"])).items():
            counts[h] = counts.get(h, 0) + c
    freqs = sorted(counts.values())
    ref = float(freqs[int(0.8 * (len(freqs) - 1))])
    contributions = {}
    lowest = 0.0
    for h in sorted(counts):
        c = math.log10(counts[h] / ref)
        contributions[f"{h:016x}"] = c
        lowest = min(lowest, c)
    table = {
        "contributions": contributions,
        "corpus_size": len(rows),
        "format": "polyforge.sa_fragments",
        "percentile_floor": lowest - 1.0,
        "radius": 2,
        "reference_frequency": ref,
        "scale": {"intercept": 11.0 - 9.0 * 5.0 / 6.5, "slope": -9.0 / 6.5},
        "version": 1,
    }
    with open(dst, "w") as fh:
        fh.write(json.dumps(table, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
