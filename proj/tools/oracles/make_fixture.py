#!/usr/bin/env python3
"""Generate the bundled 500-CRU fixture and its reference SA scores.

Run offline with RDKit installed. Output is committed; the C++ build does not
depend on this script.

    python3 tools/oracles/make_fixture.py data/
"""
import random
import sys
from pathlib import Path

from rdkit import Chem, RDLogger
from rdkit.Contrib.SA_Score import sascorer

RDLogger.DisableLog("rdApp.*")

# Divalent spacers written so that the first and last atoms carry the links.
SPACERS = [
    "CC", "CCC", "CCCC", "CCCCC", "CCCCCC", "CCCCCCCC", "CC(C)", "CC(C)C",
    "CC(C)(C)C", "C(C)C(C)", "CC(CC)C", "CC(Br)C", "CC(Cl)C", "CC(F)C",
    "CC(C#N)C", "CC(O)C", "CC(OC)C", "CC(=O)C", "C(F)(F)C(F)(F)", "CSC",
    "CCOCC", "CCOCCOCC", "CCSCC", "CCNCC", "CC(N)C", "C=CC", "CC=CC", "CC#CC",
    "C1CCC(CC1)", "C1CCC(C1)", "C1CC(C1)", "CC1CCC(CC1)C", "C1CCC(CC1)CC1CCC(CC1)",
    "c1ccc(cc1)", "c1cccc(c1)", "c1ccc(cc1)C", "Cc1ccc(cc1)C", "c1ccc(cc1)Oc1ccc(cc1)",
    "c1ccc(cc1)C(C)(C)c1ccc(cc1)", "c1ccc(cc1)S(=O)(=O)c1ccc(cc1)",
    "c1ccc(cc1)C(=O)c1ccc(cc1)", "c1ccc2cc(ccc2c1)", "c1cc(Cl)c(cc1)", "c1cc(Br)c(cc1)",
    "c1cc(C)c(cc1)", "c1cc(OC)c(cc1)", "c1cc(C#N)c(cc1)", "c1ccc(nc1)", "c1csc(c1)",
    "c1ccc(o1)", "c1cc2ccc3cccc4ccc(c1)c2c34", "C1CC2CCC1C2", "C1CC2CC1C(C2)",
    "C1CCC2(CC1)CCC(C2)", "C1CCCCCCCCCCC1", "C1OCOC1", "C1COC(O1)",
    "c1ccc2c(c1)C(=O)N(C2=O)", "C1CN(CCN1)", "C1CCN(CC1)",
]

SIDE_GROUPS = [
    "C", "CC", "CCC", "CCCC", "C(C)C", "Cl", "Br", "F", "C#N", "OC", "OCC", "O",
    "C(=O)OC", "C(=O)OCC", "C(=O)O", "C(N)=O", "c1ccccc1", "c1ccc(C)cc1",
    "c1ccc(Cl)cc1", "c1ccncc1", "N1CCCC1=O", "OC(C)=O", "C(F)(F)F", "Si(C)(C)C",
    "C1CCCCC1", "c1ccc2ccccc2c1", "S(C)(=O)=O", "[N+](=O)[O-]", "c1ccc(cc1)C#N",
]

BACKBONES = [
    ("polyester", "*O{B}OC(=O){A}C(=O)*"),
    ("polyester", "*OC(=O){A}C(=O)O{B}*"),
    ("polyamide", "*NC(=O){A}C(=O)N{B}*"),
    ("polyamide", "*N{B}NC(=O){A}C(=O)*"),
    ("polyether", "*O{A}O{B}*"),
    ("polyether", "*O{A}*"),
    ("polycarbonate", "*OC(=O)O{A}*"),
    ("polyurethane", "*OC(=O)N{A}NC(=O)O{B}*"),
    ("polyurea", "*NC(=O)N{A}*"),
    ("polythioether", "*S{A}*"),
    ("polyimine", "*N=C{A}C=N{B}*"),
    ("polysiloxane", "*O[Si](C)({S})*"),
    ("vinyl", "*CC({S})*"),
    ("vinyl", "*CC(C)({S})*"),
    ("vinyl", "*C({S})C({S2})*"),
    ("acrylate", "*CC(C(=O)O{S})*"),
    ("acrylate", "*CC(C)(C(=O)O{S})*"),
    ("diene", "*CC=C({S})C*"),
]

# Hand-picked hard structures so the fixture spans the high-SA tail.
HARD = [
    "*C1CC2CC1C1C2C2CC1C2*",
    "*OC1C2OC3C(O)C(*)OC3C2OC1",
    "*C1C2CC3CC1CC(C2)C3*",
    "*C12CC3CC(CC(C3)C1)C2*",
    "*OC1CC2(CCC3(CC2)OCCO3)CC1*",
    "*N1C2CCC1CC(C2)OC(=O)C(*)c1ccccc1",
    "*C1OC2C(O1)C1OC(*)OC1C2",
    "*c1cc2c3c(c1)C1(CCCC1)c1cc(*)cc(c1-3)C2",
    "*C1C2CC3C1C1C(C2)C3C1*",
    "*OC1C2CC3C(C2)C1C3OC(=O)*",
]


def star_capped(smiles):
    """Replace stars with hydrogens for the reference SA score."""
    mol = Chem.MolFromSmiles(smiles)
    rw = Chem.RWMol(mol)
    for atom in list(rw.GetAtoms()):
        if atom.GetAtomicNum() == 0:
            atom.SetAtomicNum(1)
    m = rw.GetMol()
    Chem.SanitizeMol(m)
    return Chem.RemoveHs(m)


def main(outdir):
    rng = random.Random(20251015)
    seen = {}
    out = []

    def accept(smi, source):
        mol = Chem.MolFromSmiles(smi)
        if mol is None:
            return False
        stars = sum(1 for a in mol.GetAtoms() if a.GetAtomicNum() == 0)
        if stars != 2:
            return False
        can = Chem.MolToSmiles(mol)
        if can in seen:
            return False
        heavy = mol.GetNumHeavyAtoms() - 2
        if heavy < 2 or heavy > 48:
            return False
        seen[can] = True
        sa = sascorer.calculateScore(star_capped(smi))
        out.append((smi, source, sa))
        return True

    for smi in HARD:
        accept(smi, "hard")
    attempts = 0
    while len(out) < 500 and attempts < 200000:
        attempts += 1
        family, pattern = rng.choice(BACKBONES)
        smi = pattern.format(
            A=rng.choice(SPACERS), B=rng.choice(SPACERS),
            S=rng.choice(SIDE_GROUPS), S2=rng.choice(SIDE_GROUPS))
        smi = smi.replace("Si(C)(C)C", "[Si](C)(C)C")
        accept(smi, family)

    outdir = Path(outdir)
    with open(outdir / "fixture_crus.csv", "w") as f:
        f.write("smiles,source,sa_reference\n")
        for smi, source, sa in out:
            f.write(f"{smi},{source},{sa:.6f}\n")
    print(f"wrote {len(out)} CRUs", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
