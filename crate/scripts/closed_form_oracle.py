#!/usr/bin/env python3
"""Independent reimplementation of the closed-form loader.

Without arguments it prints the single-subcarrier reference points.
Given a channel CSV written by `loadsim allocate --dump-channels`, it
recomputes the per-trial totals from the dumped gains.
"""
import argparse
import csv
import math
from collections import defaultdict


def gamma(alpha):
    return (1.0 - alpha) / (alpha * math.log(2.0))


def load(cinr, alpha, target):
    """Returns (b_cont, bits, power) or None when the subcarrier is nulled."""
    g = gamma(alpha)
    neg = -math.log(5.0 * target)
    if cinr < 4.0 * neg / (1.6 * g):
        return None
    arg = g * 1.6 * cinr / neg
    b_cont = math.log2(arg)
    bits = math.floor(b_cont + 0.5)
    power = (2.0 ** bits - 1.0) * neg / (1.6 * cinr)
    return b_cont, bits, power


def reference_points():
    for c in (40.0, 13.1716):
        b_cont, bits, power = load(c, 0.5, 1e-4)
        print(f"C={c}: b*={b_cont:.6f} bits={bits} power={power:.6f}")


def totals(path, noise_var, alpha, target):
    per_trial = defaultdict(lambda: [0, 0.0])
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            interf = float(row["interf_var_uw"])
            gain_sq = float(row["re_h"]) ** 2 + float(row["im_h"]) ** 2
            cinr = 0.0 if math.isinf(interf) else gain_sq / (noise_var + interf)
            res = load(cinr, alpha, target)
            if res is not None:
                acc = per_trial[int(row["trial"])]
                acc[0] += res[1]
                acc[1] += res[2]
    for trial in sorted(per_trial):
        bits, power = per_trial[trial]
        print(f"trial {trial}: total_bits={bits} total_power={power:.12e}")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("channels", nargs="?")
    p.add_argument("--noise-var", type=float, default=1e-3)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--ber-target", type=float, default=1e-4)
    a = p.parse_args()
    if a.channels is None:
        reference_points()
    else:
        totals(a.channels, a.noise_var, a.alpha, a.ber_target)


if __name__ == "__main__":
    main()
