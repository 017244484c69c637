#!/usr/bin/env python3
"""Normalize the NCI 5K sample shipped with RDKit into data/reference_molecules.smi.

    python3 tools/oracles/make_reference_corpus.py data/reference_molecules.smi

The library parser takes aromaticity as written, so the corpus is stored as
aromatic, non-isomeric SMILES. Molecules that do not survive sanitization, or
that contain more than one fragment, are dropped.
"""
import sys
from pathlib import Path

from rdkit import Chem, RDConfig, RDLogger

RDLogger.DisableLog("rdApp.*")


def main(out):
    src = Path(RDConfig.RDDataDir) / "NCI" / "first_5K.smi"
    seen = set()
    rows = []
    for line in src.read_text().splitlines():
        if not line.strip():
            continue
        mol = Chem.MolFromSmiles(line.split()[0])
        if mol is None or len(Chem.GetMolFrags(mol)) != 1:
            continue
        smi = Chem.MolToSmiles(mol, isomericSmiles=False)
        if smi in seen:
            continue
        seen.add(smi)
        rows.append(smi)
    Path(out).write_text("\n".join(rows) + "\n")
    print(f"{len(rows)} molecules -> {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/reference_molecules.smi")
