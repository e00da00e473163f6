"""Adaptive multi-round selection.

A single center ordering is revealed k centers at a time; after round i the
pipeline has spent exactly i*k queries and the sampling proxies are built
from the first i*k centers.  The error bound tightens as the prefix
clustering cost shrinks.
"""

import numpy as np

from senselect import (LossOracle, RngStream, data_select_rounds, delta_error,
                       planted_holder)

K, ROUNDS, EPS = 4, 4, 0.2

inst = planted_holder(n=2000, d=10, k=K, z=2, separation=20.0,
                      lambda_true=0.5, rng=RngStream(0, "rounds/instance"))
oracle = LossOracle.from_table(inst.losses, budget=K * ROUNDS)
results = data_select_rounds(inst.data, K, ROUNDS, EPS, inst.lambda_true,
                             oracle, z=2, rng=RngStream(1, "rounds/run"))

print(f"{'round':>5} {'queries':>8} {'Phi_prefix':>11} "
      f"{'Delta':>9} {'bound':>9}")
for sample, report in results:
    delta = delta_error(inst.losses, sample)
    bound = EPS * (inst.sum_loss + report["phi_lambda"])
    print(f"{report['round']:>5} {report['queries_used']:>8} "
          f"{report['phi_lambda']:>11.1f} {delta:>9.1f} {bound:>9.1f}")

print("\nthe prefix cost Phi_prefix drops as more centers are revealed, so")
print("later rounds get a strictly tighter guarantee from the same run")
