#!/usr/bin/env python3
"""Statistical oracle fixtures.

Emits data/stats_fixture.tsv with rows:
  ttest <na> <nb> <a csv> <b csv> <t> <p>      scipy one-tailed pooled t-test
  anova <n> <k> <row-major csv> <F> <p>        statsmodels repeated-measures ANOVA
  tsf <t> <dof> <p>                            Student-t upper tail
  fsf <f> <d1> <d2> <p>                        F upper tail
"""
import os
import random

import numpy as np
import pandas as pd
from scipy import stats
from statsmodels.stats.anova import AnovaRM


def fmt(x):
    return "%.17g" % x


def main():
    rng = random.Random(20260814)
    lines = []

    # hand case from the design notes plus randomized draws
    cases = [([2.0, 3.0, 4.0], [0.0, 1.0, 2.0])]
    for _ in range(8):
        na, nb = rng.randint(3, 8), rng.randint(3, 8)
        a = [round(rng.gauss(0.5, 1.0), 6) for _ in range(na)]
        b = [round(rng.gauss(0.0, 1.3), 6) for _ in range(nb)]
        cases.append((a, b))
    for a, b in cases:
        t, p = stats.ttest_ind(a, b, equal_var=True, alternative="greater")
        lines.append("\t".join(["ttest", str(len(a)), str(len(b)),
                                ",".join(fmt(v) for v in a), ",".join(fmt(v) for v in b),
                                fmt(t), fmt(p)]))

    # repeated-measures ANOVA tables (subjects x conditions)
    for n, k, seed in [(4, 3, 1), (6, 4, 2), (3, 2, 3), (5, 3, 4)]:
        r = random.Random(seed)
        table = [[round(j * 0.4 + r.gauss(0, 1.0), 6) for j in range(k)] for _ in range(n)]
        rows = []
        for si, row in enumerate(table):
            for ci, v in enumerate(row):
                rows.append({"subject": si, "condition": ci, "value": v})
        df = pd.DataFrame(rows)
        res = AnovaRM(df, depvar="value", subject="subject", within=["condition"]).fit()
        F = float(res.anova_table["F Value"].iloc[0])
        p = float(res.anova_table["Pr > F"].iloc[0])
        flat = ",".join(fmt(v) for row in table for v in row)
        lines.append("\t".join(["anova", str(n), str(k), flat, fmt(F), fmt(p)]))

    # tail-probability spot checks
    for t, dof in [(0.0, 4), (1.0, 4), (2.449489742783178, 4), (-1.5, 7), (3.2, 2), (0.7, 29)]:
        lines.append("\t".join(["tsf", fmt(t), fmt(dof), fmt(stats.t.sf(t, dof))]))
    for f, d1, d2 in [(1.0, 2, 6), (9.249, 1, 3), (4.5, 3, 8), (0.3, 2, 10)]:
        lines.append("\t".join(["fsf", fmt(f), fmt(d1), fmt(d2), fmt(stats.f.sf(f, d1, d2))]))

    out = os.path.join(os.path.dirname(__file__), "..", "data", "stats_fixture.tsv")
    with open(out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("wrote", out, f"({len(lines)} rows)")


if __name__ == "__main__":
    main()
