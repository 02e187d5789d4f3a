"""Write the shipped two-class Iris CSV (setosa + versicolor, 100 rows).

Run from the repository root:

    python scripts/make_iris_csv.py src/laws_vqa/data/iris.csv
"""
from __future__ import annotations

import sys

from sklearn.datasets import load_iris


def main(out_path: str) -> None:
    data = load_iris()
    rows = ["f1,f2,f3,f4,label"]
    for features, label in zip(data.data, data.target):
        if label > 1:  # keep the two linearly separable classes
            continue
        rows.append(",".join(f"{v:.1f}" for v in features) + f",{label}")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {len(rows) - 1} rows to {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/laws_vqa/data/iris.csv")
