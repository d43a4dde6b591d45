#!/usr/bin/env python3
"""Download the public regression benchmarks used by the acceptance suite.

Writes data/benchmarks/abalone.csv and data/benchmarks/boston.csv, validates
their structure (row/column counts, value ranges), and records SHA-256
checksums in data/benchmarks/checksums.json.  On the first successful fetch
the checksums are trusted and pinned; later runs verify against the pinned
values and fail loudly on mismatch.

Requires outbound network access to archive.ics.uci.edu and lib.stat.cmu.edu.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import urllib.request
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "benchmarks"

ABALONE_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/abalone/abalone.data"
BOSTON_URL = "http://lib.stat.cmu.edu/datasets/boston"

SEX_CODES = {"M": 1.0, "F": -1.0, "I": 0.0}

BOSTON_COLUMNS = ["crim", "zn", "indus", "chas", "nox", "rm", "age", "dis",
                  "rad", "tax", "ptratio", "b", "lstat", "medv"]


def fetch(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read()


def write_abalone(raw: bytes, out: Path) -> int:
    rows = []
    for line in raw.decode("ascii").splitlines():
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != 9:
            raise SystemExit(f"abalone: expected 9 fields, got {len(cells)}: {line!r}")
        sex = SEX_CODES.get(cells[0])
        if sex is None:
            raise SystemExit(f"abalone: unknown sex code {cells[0]!r}")
        rows.append([sex] + [float(c) for c in cells[1:]])
    if len(rows) != 4177:
        raise SystemExit(f"abalone: expected 4177 rows, got {len(rows)}")
    if not all(1 <= r[-1] <= 29 for r in rows):
        raise SystemExit("abalone: rings outside the documented 1..29 range")
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sex", "length", "diameter", "height", "whole_weight",
                    "shucked_weight", "viscera_weight", "shell_weight", "rings"])
        w.writerows(rows)
    return len(rows)


def write_boston(raw: bytes, out: Path) -> int:
    # header of free text, then 506 records of 14 whitespace-separated values,
    # each split across two physical lines
    tokens: list[str] = []
    started = False
    for line in raw.decode("ascii", errors="replace").splitlines():
        cells = line.split()
        if not started:
            # data begins at the first line whose every token parses as a number
            try:
                [float(c) for c in cells]
                started = bool(cells)
            except ValueError:
                continue
        if started:
            tokens.extend(cells)
    values = [float(t) for t in tokens]
    if len(values) != 506 * 14:
        raise SystemExit(f"boston: expected {506 * 14} values, got {len(values)}")
    rows = [values[i:i + 14] for i in range(0, len(values), 14)]
    if not all(5.0 <= r[-1] <= 50.0 for r in rows):
        raise SystemExit("boston: medv outside the documented 5..50 range")
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BOSTON_COLUMNS)
        w.writerows(rows)
    return len(rows)


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    lockfile = OUT_DIR / "checksums.json"
    pinned = json.loads(lockfile.read_text()) if lockfile.is_file() else {}
    checksums = {}
    for name, url, writer in [("abalone.csv", ABALONE_URL, write_abalone),
                              ("boston.csv", BOSTON_URL, write_boston)]:
        out = OUT_DIR / name
        n = writer(fetch(url), out)
        digest = hashlib.sha256(out.read_bytes()).hexdigest()
        if name in pinned and pinned[name] != digest:
            raise SystemExit(f"{name}: checksum mismatch against pinned value; "
                             f"expected {pinned[name]}, got {digest}")
        checksums[name] = digest
        print(f"{name}: {n} rows, sha256 {digest}")
    lockfile.write_text(json.dumps(checksums, indent=2) + "\n")
    print(f"checksums pinned in {lockfile}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
