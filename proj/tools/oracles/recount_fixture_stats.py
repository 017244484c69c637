"""Single-pass recount of data/fixture_labeled.csv summary statistics.

Skips rows whose SMILES RDKit cannot parse and keeps the first row of
each canonical CRU, mirroring the ingest contract. Sums run in file order so
that means match a C++ sequential sum bit for bit.
"""
import csv
import json
import sys

from rdkit import Chem, RDLogger

RDLogger.DisableLog("rdApp.*")

PROPS = ["PE_I", "Egb", "Eea", "EPS", "OPV"]


def main(src, out):
    seen = set()
    acc = {k: [] for k in PROPS + ["sa", "sc"]}
    skipped = 0
    with open(src) as fh:
        for row in csv.DictReader(fh):
            mol = Chem.MolFromSmiles(row["smiles"])
            if mol is None:
                skipped += 1
                continue
            key = Chem.MolToSmiles(mol)
            if key in seen:
                continue
            seen.add(key)
            for k in acc:
                acc[k].append(float(row[k]))
    result = {"records": len(seen), "skipped": skipped}
    for k, vals in acc.items():
        total = 0.0
        for v in vals:
            total += v
        result[k] = {"mean": total / len(vals), "min": min(vals), "max": max(vals)}
    hist = [0] * 18
    for v in acc["sa"]:
        hist[min(17, max(0, int((v - 1.0) // 0.5)))] += 1
    result["sa_histogram"] = hist
    with open(out, "w") as fh:
        json.dump(result, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
