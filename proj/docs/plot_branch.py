#!/usr/bin/env python3
"""Plot a `continue` or `converge` CSV produced by renewal-spectral.

Usage:
    renewal-spectral continue --model cannibalism --set tau=3 \
        --param log_gamma --from 2 --to 4.5 --points 50 --M 20 \
        --start-b 2 --out branch.csv
    python3 docs/plot_branch.py branch.csv branch.png
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main(csv_path: str, out_path: str) -> None:
    comments, rows, header = [], [], None
    with open(csv_path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line)
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))

    if header is None:
        sys.exit("no header row found")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    if header[:2] == ["param", "b_eq"]:
        data = {name: [float(r[i]) for r in rows] for i, name in enumerate(header)}
        stable = [s > 0.5 for s in data["stable"]]
        for want_stable, style, label in ((True, "-", "stable"), (False, "--", "unstable")):
            xs = [p for p, s in zip(data["param"], stable) if s == want_stable]
            ys = [b for b, s in zip(data["b_eq"], stable) if s == want_stable]
            ax.plot(xs, ys, "k" + style, label=label)
        for comment in comments:
            if "bifurcation" in comment and "param=" in comment:
                value = float(comment.split("param=")[1].split()[0])
                ax.axvline(value, color="gray", lw=0.8)
        ax.set_xlabel("parameter")
        ax.set_ylabel("equilibrium value")
        ax.legend()
    elif header[:2] == ["M", "error"]:
        ms = [int(r[0]) for r in rows]
        errors = [max(float(r[1]), 1e-17) for r in rows]
        ax.semilogy(ms, errors, "ko-")
        ax.set_xlabel("M")
        ax.set_ylabel("rightmost-root error")
    else:
        sys.exit(f"unrecognized header: {header}")

    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    print(f"wrote {out_path}")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
