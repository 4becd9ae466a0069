"""Writes the bundled two-party split of the Wisconsin diagnostic breast cancer data.

Party 0 gets the first 15 features and the label (1 = malignant), party 1 the remaining 15.
Rows carry random identifiers and party 1's rows are shuffled.
"""
import csv
import pathlib
import random

from sklearn.datasets import load_breast_cancer


def main(out_dir="data"):
    ds = load_breast_cancer()
    rng = random.Random(20240501)
    ids = rng.sample(range(100000, 1000000), len(ds.target))
    names = [n.replace(" ", "_") for n in ds.feature_names]
    out = pathlib.Path(out_dir)
    out.mkdir(exist_ok=True)
    rows0 = [[ids[i], *ds.data[i][:15], int(ds.target[i] == 0)] for i in range(len(ids))]
    rows1 = [[ids[i], *ds.data[i][15:]] for i in range(len(ids))]
    rng.shuffle(rows1)
    with open(out / "bcw_party0.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", *names[:15], "label"])
        w.writerows(rows0)
    with open(out / "bcw_party1.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", *names[15:]])
        w.writerows(rows1)


if __name__ == "__main__":
    main()
