#!/usr/bin/env python3
"""Plot full-corpus vs subset label proportions from a `sample` report file.

    capqe sample --config config.json --report-out report.records
    python scripts/plot_distribution.py --report report.records --out distribution.png
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--report", required=True)
    parser.add_argument("--out", default="distribution.png")
    args = parser.parse_args()

    rows = []
    for line in Path(args.report).read_text(encoding="utf-8").splitlines():
        if line.strip():
            data = json.loads(line)
            if "label" in data:
                rows.append(data)
    if not rows:
        print("no per-label rows found in report", file=sys.stderr)
        return 1

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows.sort(key=lambda r: -r["full_proportion"])
    labels = [r["label"] for r in rows]
    x = range(len(rows))
    width = 0.4
    fig, ax = plt.subplots(figsize=(max(6, len(rows) * 0.5), 4))
    ax.bar([i - width / 2 for i in x], [r["full_proportion"] for r in rows], width, label="full corpus")
    ax.bar([i + width / 2 for i in x], [r["subset_proportion"] for r in rows], width, label="subset")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("label proportion")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
