#!/usr/bin/env python3
"""Render qtsim sweep CSVs (classical_ber, qber_vs_snr, shor_curve) as log-scale plots."""
import argparse
import csv
import io
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path) as f:
        body = "".join(l for l in f if not l.startswith("#"))
    return [r for r in csv.DictReader(io.StringIO(body)) if r["status"] == "ok"]


def num(v):
    return float(v) if v else None


def series(rows, key, x, y):
    out = defaultdict(list)
    for r in rows:
        if num(r[x]) is not None and num(r[y]):
            out[key(r)].append((num(r[x]), num(r[y])))
    return {k: sorted(v) for k, v in out.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("-o", "--out", default="plot.png")
    args = ap.parse_args()
    rows = load(args.csv)
    kind = rows[0]["sweep_kind"]
    if kind == "classical_ber":
        curves, xl, yl = series(rows, lambda r: r["variant"], "snr_db", "ber"), "Es/N0 (dB)", "BER"
    elif kind == "qber_vs_snr":
        curves = series(rows, lambda r: f"P_eq={r['p_eq']}", "snr_db", "qber")
        xl, yl = "Es/N0 (dB)", "QBER"
    elif kind == "shor_curve":
        curves = {"Shor (exact)": series(rows, lambda r: 0, "p_eq", "p_shor").get(0, []),
                  "unprotected": [(num(r["p_eq"]),) * 2 for r in rows if num(r["p_eq"])]}
        xl, yl = "P_e", "logical error rate"
    else:
        raise SystemExit(f"no plot for {kind}")
    for label, pts in curves.items():
        xs, ys = zip(*pts)
        plt.semilogy(xs, ys, marker="o", label=label)
    if kind == "shor_curve":
        plt.xscale("log")
    plt.xlabel(xl)
    plt.ylabel(yl)
    plt.grid(True, which="both", alpha=0.3)
    plt.legend()
    plt.savefig(args.out, dpi=120, bbox_inches="tight")


if __name__ == "__main__":
    main()
