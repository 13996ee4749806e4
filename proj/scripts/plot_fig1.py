#!/usr/bin/env python3
"""Bar chart of fig1.csv (structured vs unstructured vs output feedback).

Usage: plot_fig1.py <repro-dir> [out.png]
"""
import csv
import sys


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    path = sys.argv[1].rstrip("/") + "/fig1.csv"
    rows = []
    with open(path) as f:
        for row in csv.DictReader(f):
            rows.append(row)
    if not rows:
        print("no data in", path)
        return 1

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        # Text fallback keeps the hook usable without matplotlib.
        for row in rows:
            print(row["N"], row["h_full"], row["h_ssf"], row["h_sof"])
        return 0

    ns = [int(r["N"]) for r in rows]
    width = 0.25
    fig, ax = plt.subplots()
    for i, key in enumerate(("h_full", "h_ssf", "h_sof")):
        ax.bar([n + (i - 1) * width for n in ns], [float(r[key]) for r in rows],
               width=width, label=key[2:])
    ax.set_xlabel("order N")
    ax.set_ylabel("max stabilized delay")
    ax.set_xticks(ns)
    ax.legend()
    out = sys.argv[2] if len(sys.argv) > 2 else "fig1.png"
    fig.savefig(out, dpi=150, bbox_inches="tight")
    print("wrote", out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
