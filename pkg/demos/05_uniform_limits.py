"""What uniform sampling can and cannot do.

Upper bound: with s = 1/eps^2 uniform draws the estimate stays within
eps * n * max-loss of the truth with constant probability -- demonstrated on
the single-spike table.  Lower bound: on the balanced +/-1 instance the
estimator's typical magnitude is on the order 0.2 * n / sqrt(s) even though
the true sum is exactly zero, so no additive guarantee better than that
order is possible without looking at the losses.
"""

import math

import numpy as np

from senselect import (Dataset, RngStream, delta_error, rademacher_instance,
                       uniform_select)

# spike: one point carries all the loss
n, eps = 1000, 0.1
s = math.ceil(1 / eps ** 2)
losses = np.zeros(n)
losses[0] = 1.0
data = Dataset(np.zeros((n, 1)))
bound = eps * n * 1.0
hits = sum(
    delta_error(losses, uniform_select(data, s, RngStream(t, "spike"))) <= bound
    for t in range(500))
print(f"spike table: Delta <= eps*n*max_loss in {hits}/500 runs "
      f"(s={s}, bound {bound:.0f})")

# Rademacher: the anti-concentration direction
n = 10 ** 4
data, signed = rademacher_instance(n)
for s in (25, 100, 400):
    estimates = [delta_error(signed, uniform_select(data, s,
                                                    RngStream(t, f"rade{s}")))
                 for t in range(500)]
    median = float(np.median(estimates))
    floor = 0.2 * n / math.sqrt(s)
    print(f"s={s:>4}: median |estimator| = {median:7.1f}  "
          f"(floor 0.2*n/sqrt(s) = {floor:.1f})")
print("\nshrinking the error would need s ~ 1/eps^2 draws -- the rate the")
print("sensitivity sampler achieves while also adapting to the loss shape")
