#!/usr/bin/env python3
"""Builds the 111-predictor ionosphere design from the raw 34-column UCI file.

Predictors: the 33 non-constant raw attributes (a2 is identically zero and
is dropped) followed by the 78 second-order terms of a3..a14 (12 squares
and 66 pairwise products). The label is 1 for "g" (good return) and 0
for "b".

    python3 tools/expand_ionosphere.py data/ionosphere_raw.csv data/ionosphere.csv
"""

import argparse
import csv
import itertools
import sys

QUADRATIC_COLUMNS = [f"a{i}" for i in range(3, 15)]
LABELS = {"g": 1, "b": 0}


def expand(rows, header):
    index = {name: k for k, name in enumerate(header)}
    mains = [name for name in header[:-1] if name != "a2"]
    pairs = list(itertools.combinations_with_replacement(QUADRATIC_COLUMNS, 2))
    out_header = mains + [f"{a}*{b}" for a, b in pairs] + ["y"]
    out_rows = []
    for line, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValueError(f"line {line}: expected {len(header)} cells, got {len(row)}")
        label = row[-1].strip()
        if label not in LABELS:
            raise ValueError(f"line {line}: unknown label {label!r}")
        values = {name: float(row[index[name]]) for name in header[:-1]}
        out = [values[name] for name in mains]
        out += [values[a] * values[b] for a, b in pairs]
        out_rows.append([repr(v) for v in out] + [str(LABELS[label])])
    return out_header, out_rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("raw", help="34 attributes + class column, with header")
    parser.add_argument("out", help="expanded CSV")
    args = parser.parse_args(argv)

    with open(args.raw, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [r for r in reader if r]
    if len(header) != 35:
        sys.exit(f"expected 35 columns in {args.raw}, found {len(header)}")

    out_header, out_rows = expand(rows, header)
    with open(args.out, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(out_header)
        writer.writerows(out_rows)
    print(f"{len(out_rows)} rows, {len(out_header) - 1} predictors -> {args.out}")


if __name__ == "__main__":
    main()
