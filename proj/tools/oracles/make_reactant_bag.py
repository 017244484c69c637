"""Writes data/reactant_bag.jsonl with functional-group annotations.

Annotations come from RDKit SMARTS matching, independent of the C++ group
finder; the C++ loader re-checks every annotation against its own patterns.
"""
import json
import sys
from pathlib import Path

from rdkit import Chem

PATTERNS = {
    "OH": "[OX2H1][#6;!$([#6]=O)]",
    "COOH": "[CX3](=[OX1])[OX2H1]",
    "NH2": "[NX3H2;!a][#6;!$([#6]=O)]",
    "NCO": "[NX2]=[CX2]=[OX1]",
}
# Atoms of the match that belong to the group, in annotation order.
KEEP = {"OH": 1, "COOH": 3, "NH2": 1, "NCO": 3}

BAG = [
    ("OCCO", "diol"), ("OCCCO", "diol"), ("OCCCCO", "diol"), ("OCCCCCCO", "diol"),
    ("OCCOCCO", "diol"), ("OCCOCCOCCO", "diol"), ("OCC(C)O", "diol"), ("OCC(C)(C)CO", "diol"),
    ("OC1CCC(O)CC1", "diol"), ("OCC1CCC(CO)CC1", "diol"), ("Oc1ccc(O)cc1", "bisphenol"),
    ("CC(C)(c1ccc(O)cc1)c1ccc(O)cc1", "bisphenol"), ("OCC(F)(F)C(F)(F)CO", "diol"),
    ("OCCSCCO", "diol"), ("OCC(Br)CO", "diol"), ("OCCN(C)CCO", "diol"),
    ("OC(=O)CC(=O)O", "diacid"), ("OC(=O)CCC(=O)O", "diacid"), ("OC(=O)CCCCC(=O)O", "diacid"),
    ("OC(=O)CCCCCCCCC(=O)O", "diacid"), ("OC(=O)c1ccc(cc1)C(=O)O", "diacid"),
    ("OC(=O)c1cccc(c1)C(=O)O", "diacid"), ("OC(=O)C=CC(=O)O", "diacid"), ("OC(=O)COCC(=O)O", "diacid"),
    ("OC(=O)c1ccc(o1)C(=O)O", "diacid"), ("OC(=O)CSCC(=O)O", "diacid"),
    ("OC(=O)C(F)(F)C(F)(F)C(=O)O", "diacid"),
    ("NCCN", "diamine"), ("NCCCCCCN", "diamine"), ("NCCCCN", "diamine"), ("Nc1ccc(N)cc1", "diamine"),
    ("Nc1ccc(cc1)Oc1ccc(N)cc1", "diamine"), ("NCc1cccc(CN)c1", "diamine"), ("NCCOCCN", "diamine"),
    ("O=C=NCCCCCCN=C=O", "diisocyanate"), ("Cc1ccc(N=C=O)cc1N=C=O", "diisocyanate"),
    ("O=C=Nc1ccc(Cc2ccc(N=C=O)cc2)cc1", "diisocyanate"), ("O=C=NC1CCC(CC1)N=C=O", "diisocyanate"),
    ("NCCCCCC(=O)O", "amino-acid"), ("OCC(O)CO", "triol"),
]


def annotate(smiles):
    mol = Chem.MolFromSmiles(smiles)
    groups = []
    for gid, smarts in PATTERNS.items():
        for match in mol.GetSubstructMatches(Chem.MolFromSmarts(smarts)):
            groups.append({"id": gid, "atoms": list(match[: KEEP[gid]])})
    groups.sort(key=lambda g: min(g["atoms"]))
    return groups


def main(out):
    assert len(BAG) == 40
    with open(out, "w") as fh:
        for smiles, kind in BAG:
            row = {"smiles": smiles, "groups": annotate(smiles), "source_tag": f"bag-v1:{kind}"}
            fh.write(json.dumps(row) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/reactant_bag.jsonl"))
