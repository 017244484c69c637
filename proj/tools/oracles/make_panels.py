#!/usr/bin/env python3
"""Freeze reference values used by the test suites.

    python3 tools/oracles/make_panels.py tests/data/

Writes sa_panel.csv (reference Ertl SA score, stars capped with hydrogen),
sa_bands.csv (easy and hard band panels with reference SA),
logp_panel.csv (reference Crippen logP, stars capped with hydrogen) and
morgan_reference.csv (reference Morgan similarities for the Nylon-6 pair).
"""
import sys
from pathlib import Path

from rdkit import Chem, DataStructs, RDLogger
from rdkit.Chem import Crippen, rdFingerprintGenerator
from rdkit.Contrib.SA_Score import sascorer

RDLogger.DisableLog("rdApp.*")

SA_PANEL = [
    "CC", "CCO", "CCCCCC", "c1ccccc1", "CC(=O)O", "OCCO", "OC(=O)CCCCC(=O)O",
    "NCCCCCCN", "*OCCOC(C)C(Br)CSO*", "*OCC*", "*CC(c1ccccc1)*", "*CC(C)(C(=O)OC)*",
    "*NCCCCCC(=O)*", "*OC(=O)c1ccc(cc1)C(=O)OCC*", "*Oc1ccc(cc1)C(C)(C)c1ccc(cc1)OC(=O)*",
    "*CC(C#N)*", "*OC1CCC(CC1)OC(=O)CCC(=O)*", "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "O=C1CCCCC(=O)N1", "*C1CC2CC1C1C2C2CC1C2*",
]

# Commodity linear CRUs, at most 8 heavy atoms, no rings.
SA_EASY_PANEL = [
    "*CC*", "*CC(C)*", "*CC(Cl)*", "*CC(F)*", "*C(F)(F)C(F)(F)*", "*CC(F)(F)*", "*CC(Cl)(Cl)*",
    "*CC(O)*", "*CCO*", "*CCCO*", "*CCCCO*", "*CC(C#N)*", "*CC(C)(C)*", "*CC(OC(C)=O)*",
    "*CC(C(=O)OC)*", "*CC(C)(C(=O)OC)*", "*CC(C(=O)O)*", "*CC(C(N)=O)*", "*CC=CC*", "*CC=C(C)C*",
    "*CC=C(Cl)C*", "*NCCCCC(=O)*", "*NCCC(=O)*", "*OCC(=O)*", "*OC(C)C(=O)*", "*CCS*", "*CO*",
    "*CC(CC)*", "*CC(OC)*", "*CC(C=C)*", "*CC(C)(C#N)*", "*CC(N)*",
]

# Three or more fused rings joined through at least two heteroatom bridges.
SA_HARD_PANEL = [
    "*C1OC2C(O1)C1OC(*)OC1C2", "*OC1C2OC3C(O)C(*)OC3C2OC1", "*C1C2OC3C(O2)C(*)C1O3",
    "*OC1C2OC3OC(*)C(O3)C2OC1", "*N1C2CC3OC(C1)C(*)C3O2", "*C1C2OC3C4OC(C(*)C4O)C3C2O1",
]

LOGP_PANEL = [
    "C", "CC", "CCO", "CCCCCC", "c1ccccc1", "CC(=O)O", "OCCO", "CCN", "CCOCC",
    "ClCCl", "CC(C)Br", "CC#N", "c1ccncc1", "Oc1ccccc1", "CC(=O)OC", "CC(N)=O",
    "c1ccc2ccccc2c1", "CS(C)(=O)=O", "C[N+](=O)[O-]", "*OCCOC(C)C(Br)CSO*",
    "*NCCCCCC(=O)*", "*CC(c1ccccc1)*", "*OC(=O)c1ccc(cc1)C(=O)OCC*", "FC(F)(F)c1ccccc1",
    "CSC", "C=CC", "O=CC", "c1ccsc1", "c1ccoc1", "c1cc[nH]c1", "CCC(=O)CC",
    "NC(=O)N", "CC(C)(C)O", "C1CCCCC1", "C[Si](C)(C)C",
]


def capped(smiles):
    mol = Chem.MolFromSmiles(smiles)
    rw = Chem.RWMol(mol)
    for atom in rw.GetAtoms():
        if atom.GetAtomicNum() == 0:
            atom.SetAtomicNum(1)
    m = rw.GetMol()
    Chem.SanitizeMol(m)
    return Chem.RemoveHs(m)


def main(outdir):
    outdir = Path(outdir)
    with open(outdir / "sa_panel.csv", "w") as f:
        f.write("smiles,sa_reference\n")
        for s in SA_PANEL:
            f.write(f"{s},{sascorer.calculateScore(capped(s)):.6f}\n")
    with open(outdir / "sa_bands.csv", "w") as f:
        f.write("smiles,panel,sa_reference\n")
        for panel, rows in (("easy", SA_EASY_PANEL), ("hard", SA_HARD_PANEL)):
            for s in rows:
                f.write(f"{s},{panel},{sascorer.calculateScore(capped(s)):.6f}\n")
    with open(outdir / "logp_panel.csv", "w") as f:
        f.write("smiles,logp_reference\n")
        for s in LOGP_PANEL:
            f.write(f"{s},{Crippen.MolLogP(capped(s)):.6f}\n")
    a = Chem.MolFromSmiles("*OCC=O")
    b = Chem.MolFromSmiles("NCCCCCC(=O)")
    with open(outdir / "morgan_reference.csv", "w") as f:
        f.write("radius,n_bits,tanimoto,dice\n")
        for r in (1, 2, 3):
            for n in (1024, 2048):
                g = rdFingerprintGenerator.GetMorganGenerator(radius=r, fpSize=n)
                fa, fb = g.GetFingerprint(a), g.GetFingerprint(b)
                f.write(f"{r},{n},{DataStructs.TanimotoSimilarity(fa, fb):.6f},"
                        f"{DataStructs.DiceSimilarity(fa, fb):.6f}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
