#!/usr/bin/env python3
"""Download the bundled benchmark datasets from the UCI repository.

Writes ``glass.csv``, ``vehicle.csv``, and ``dermatology.csv`` (and can
regenerate ``iris.csv`` from scikit-learn's local copy) into
``src/maxmin_svm/datasets/`` in the normalized schema the package loads:
a header row, numeric feature columns, and a trailing ``label`` column
of class-name tokens.  Needs network access to ``archive.ics.uci.edu``.

Usage::

    python scripts/fetch_datasets.py              # all missing datasets
    python scripts/fetch_datasets.py --only glass --force
    python scripts/fetch_datasets.py --dest /tmp/datasets

Normalization, matching the provenance notes in the datasets README:

- glass: drop the running ``Id`` column; ``Type`` becomes ``label``.
- vehicle: concatenate the nine ``xa?.dat`` parts in alphabetical order;
  the trailing class token becomes ``label``.
- dermatology: drop the 8 rows whose age is missing (``?``); the 1..6
  disease code becomes ``label``.
"""

import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

GLASS_URL = f"{UCI}/glass/glass.data"
DERMATOLOGY_URL = f"{UCI}/dermatology/dermatology.data"
VEHICLE_URLS = [
    f"{UCI}/statlog/vehicle/xa{part}.dat" for part in "abcdefghi"
]

DEFAULT_DEST = Path(__file__).resolve().parents[1] / "src" / "maxmin_svm" / "datasets"


def fetch_text(url):
    print(f"  GET {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read().decode("utf-8")


def write_csv(path, feature_names, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(feature_names) + ["label"])
        for features, label in rows:
            writer.writerow([repr(float(v)) for v in features] + [label])
    print(f"  wrote {path} ({len(rows)} rows)")


def build_glass(dest):
    text = fetch_text(GLASS_URL)
    names = ["RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe"]
    rows = []
    for rec in csv.reader(io.StringIO(text)):
        if not rec:
            continue
        # Columns: Id, 9 features, Type.
        if len(rec) != 11:
            raise SystemExit(f"glass: unexpected row width {len(rec)}")
        rows.append(([float(v) for v in rec[1:10]], f"type{int(rec[10])}"))
    if len(rows) != 214:
        raise SystemExit(f"glass: expected 214 rows, got {len(rows)}")
    write_csv(dest / "glass.csv", names, rows)


def build_vehicle(dest):
    rows = []
    for url in VEHICLE_URLS:
        text = fetch_text(url)
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 19:
                raise SystemExit(
                    f"vehicle: unexpected row width {len(parts)}"
                )
            rows.append(([float(v) for v in parts[:18]], parts[18].lower()))
    if len(rows) != 846:
        raise SystemExit(f"vehicle: expected 846 rows, got {len(rows)}")
    names = [f"f{j}" for j in range(18)]
    write_csv(dest / "vehicle.csv", names, rows)


def build_dermatology(dest):
    text = fetch_text(DERMATOLOGY_URL)
    rows = []
    dropped = 0
    for rec in csv.reader(io.StringIO(text)):
        if not rec:
            continue
        # Columns: 34 features (age last, possibly '?'), disease code 1..6.
        if len(rec) != 35:
            raise SystemExit(
                f"dermatology: unexpected row width {len(rec)}"
            )
        if rec[33].strip() == "?":
            dropped += 1
            continue
        rows.append(([float(v) for v in rec[:34]], f"class{int(rec[34])}"))
    if dropped != 8 or len(rows) != 358:
        raise SystemExit(
            f"dermatology: expected 358 kept / 8 dropped rows, got "
            f"{len(rows)} / {dropped}"
        )
    names = [f"f{j}" for j in range(34)]
    write_csv(dest / "dermatology.csv", names, rows)


def build_iris(dest):
    from sklearn.datasets import load_iris

    iris = load_iris()
    names = [
        n.replace(" (cm)", "").replace(" ", "_") for n in iris.feature_names
    ]
    rows = [
        ([float(v) for v in features], iris.target_names[target])
        for features, target in zip(iris.data, iris.target)
    ]
    write_csv(dest / "iris.csv", names, rows)


BUILDERS = {
    "glass": build_glass,
    "vehicle": build_vehicle,
    "dermatology": build_dermatology,
    "iris": build_iris,
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--only", nargs="*", choices=sorted(BUILDERS),
                        help="fetch just these datasets")
    parser.add_argument("--dest", type=Path, default=DEFAULT_DEST,
                        help=f"output directory (default {DEFAULT_DEST})")
    parser.add_argument("--force", action="store_true",
                        help="overwrite files that already exist")
    args = parser.parse_args(argv)
    args.dest.mkdir(parents=True, exist_ok=True)
    names = args.only if args.only else sorted(BUILDERS)
    for name in names:
        target = args.dest / f"{name}.csv"
        if target.exists() and not args.force:
            print(f"{name}: {target} already present (use --force)")
            continue
        print(f"{name}:")
        BUILDERS[name](args.dest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
