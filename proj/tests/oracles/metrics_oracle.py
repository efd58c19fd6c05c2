"""Regenerates tests/metrics_cases.inc.

Confusion matrices are drawn with a fixed seed; every metric is evaluated
with exact rational arithmetic from the marginal-rate forms, then rounded
once to a double.
"""
import math
import random
from fractions import Fraction as Q
from pathlib import Path


def ratio(a, b):
    return Q(0) if b == 0 else Q(a, b)


def metrics(tp, tn, fp, fn):
    n = tp + tn + fp + fn
    acc = Q(tp + tn, n)
    rec = ratio(tp, tp + fn)
    spe = ratio(tn, tn + fp)
    pre = ratio(tp, tp + fp)
    f1 = ratio(2 * tp, 2 * tp + fp + fn)
    bal = (rec + spe) / 2
    # MCC from marginal rates: (TP/N - S*P) / sqrt(P*S*(1-S)*(1-P)),
    # S = actual positive share, P = predicted positive share.
    s = Q(tp + fn, n)
    p = Q(tp + fp, n)
    den = p * s * (1 - s) * (1 - p)
    if den == 0:
        mcc = 0.0
    else:
        num = Q(tp, n) - s * p
        mcc = float(num) / math.sqrt(float(den))
    return [float(acc), float(bal), float(pre), float(rec), float(spe), float(f1), mcc]


def main():
    rng = random.Random(20240613)
    cases = [(0, 5, 0, 5), (5, 0, 5, 0), (0, 0, 3, 4), (7, 0, 0, 0)]
    while len(cases) < 50:
        c = tuple(rng.randint(0, 30) for _ in range(4))
        if sum(c):
            cases.append(c)
    lines = ["// Generated by tests/oracles/metrics_oracle.py; do not edit.",
             "// {tp, tn, fp, fn}, {overall, balanced, precision, recall, specificity, f_score, mcc}"]
    for c in cases:
        vals = ", ".join(repr(v) for v in metrics(*c))
        lines.append("{{%d, %d, %d, %d}, {%s}}," % (*c, vals))
    Path(__file__).resolve().parent.parent.joinpath("metrics_cases.inc").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
