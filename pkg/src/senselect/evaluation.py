"""Ground-truth evaluation: the selection error Delta(S), theorem-style
bounds, synthetic instance generators, and the seeded Monte-Carlo trial
runner behind the benchmark reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, LossOracle, LossTable, RngStream, as_generator
from .clustering import CenterList, Clustering, assign, weighted_cost
from . import regression as reg
from .selection import (WeightedSample, data_select, data_select_rounds,
                        sample_size, uniform_select)


@dataclass(frozen=True)
class PlantedInstance:
    """Synthetic dataset whose loss satisfies the per-cluster smoothness
    condition exactly: one data row sits at each cluster center, and every
    loss is base_i + lambda_true * ||e - c_i||^z."""

    data: Dataset
    losses: LossTable
    clustering: Clustering
    lam: np.ndarray
    lambda_true: float
    z: float

    @property
    def sum_loss(self) -> float:
        return float(np.sum(self.losses.values))

    @property
    def phi_lambda(self) -> float:
        return weighted_cost(self.clustering, self.lam)


def delta_error(losses, sample: WeightedSample) -> float:
    """|sum_e loss(e) - sum_{e in S} w(e) loss(e)|.

    Accepts a LossTable or a raw (possibly signed) vector; signed tables are
    for the lower-bound instance only and never pass through an oracle.
    """
    values = losses.values if isinstance(losses, LossTable) else \
        np.asarray(losses, dtype=np.float64)
    estimate = float(np.dot(sample.weights, values[sample.indices]))
    return abs(float(np.sum(values)) - estimate)


def theorem1_bound(epsilon: float, losses, clustering: Clustering,
                   lam) -> float:
    """eps * (sum of losses + 2 * per-cluster weighted clustering cost)."""
    values = losses.values if isinstance(losses, LossTable) else \
        np.asarray(losses, dtype=np.float64)
    return epsilon * (float(np.sum(values)) + 2 * weighted_cost(clustering, lam))


def planted_holder(n: int, d: int, k: int, z: float, separation: float,
                   lambda_true: float, rng) -> PlantedInstance:
    """k unit-variance Gaussian clusters with centers `separation` apart
    along distinct axes.  The first row of each cluster sits exactly at the
    center, so the ground-truth clustering has data-row centers and the
    smoothness ratios equal lambda_true everywhere."""
    if k > min(n, d):
        raise ValueError("need k <= n and k <= d for axis-aligned centers")
    g = as_generator(rng)
    centers = np.zeros((k, d))
    centers[np.arange(k), np.arange(k)] = separation
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    rows, labels, center_rows = [], [], []
    base = g.uniform(0.5, 2.0, size=k)
    for i in range(k):
        center_rows.append(sum(sizes[:i]))
        block = centers[i] + g.standard_normal((sizes[i], d))
        block[0] = centers[i]  # plant the center as an actual data row
        rows.append(block)
        labels.extend([i] * sizes[i])
    data = Dataset(np.vstack(rows))
    labels = np.asarray(labels)
    dist = np.linalg.norm(data.rows - centers[labels], axis=1)
    losses = LossTable(base[labels] + lambda_true * dist ** z)
    center_list = CenterList(centers, np.asarray(center_rows, dtype=np.intp))
    clustering = assign(data, center_list, z)
    return PlantedInstance(data, losses, clustering,
                           np.full(k, lambda_true), lambda_true, float(z))


def rademacher_instance(n: int):
    """1-D dataset of n/2 copies of -1 and n/2 copies of +1 with the signed
    loss equal to the point itself; the loss sum is exactly zero."""
    if n % 2 != 0:
        raise ValueError("n must be even")
    values = np.concatenate([-np.ones(n // 2), np.ones(n // 2)])
    return Dataset(values[:, None]), values


def planted_regression(n: int, d: int, k: int, lambda_true: float, rng,
                       spread: float = 0.05, center_scale: float = 1.0):
    """Clustered regression rows satisfying the regression smoothness
    condition exactly: member targets differ from their center's target by
    at most lambda_true times the row distance (power 1).

    Returns (instance, center_rows, labels, lam).
    """
    g = as_generator(rng)
    centers = g.standard_normal((k, d))
    centers *= center_scale / np.maximum(np.linalg.norm(centers, axis=1,
                                                        keepdims=True), 1e-12)
    x_star = g.standard_normal(d)
    x_star /= max(np.linalg.norm(x_star), 1e-12)
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    rows, targets, labels, center_rows = [], [], [], []
    for i in range(k):
        center_rows.append(sum(sizes[:i]))
        noise = g.standard_normal((sizes[i], d))
        noise /= np.maximum(np.linalg.norm(noise, axis=1, keepdims=True), 1e-12)
        radii = g.uniform(0, spread, size=sizes[i])
        block = centers[i] + radii[:, None] * noise
        block[0] = centers[i]
        b_center = float(centers[i] @ x_star)
        dist = np.linalg.norm(block - centers[i], axis=1)
        b = b_center + g.uniform(-1, 1, size=sizes[i]) * lambda_true * dist
        b[0] = b_center
        rows.append(block)
        targets.append(b)
        labels.extend([i] * sizes[i])
    instance = reg.RegressionInstance(np.vstack(rows), np.concatenate(targets))
    return (instance, np.asarray(center_rows, dtype=np.intp),
            np.asarray(labels), np.full(k, lambda_true))


def r2_benchmark(n: int, d: int, k: int, rng, sample_fraction: float = 0.05,
                 spread: float = 0.2, lambda_true: float = 0.5) -> dict:
    """One seed of the desk-scale R^2 comparison: fit weighted least squares
    on a sensitivity-selected, a leverage-selected, and a uniform coreset of
    size sample_fraction * n, and score each fit on the full data."""
    rng = rng if isinstance(rng, RngStream) else RngStream(int(rng), "r2")
    inst, _, _, _ = planted_regression(n, d, k, lambda_true,
                                       rng.child("instance"), spread=spread)
    s = max(int(round(sample_fraction * n)), d + 1)
    out = {}
    x_full = reg.solve_least_squares(inst.A, inst.b)
    out["full"] = reg.r2_score(inst.A @ x_full, inst.b)

    def fit_r2(idx, weights=None):
        x = reg.solve_least_squares(inst.A[idx], inst.b[idx], weights=weights)
        return reg.r2_score(inst.A @ x, inst.b)

    sample, _ = reg.regression_select(inst, k, 0.5, math.inf,
                                      rng.child("sensitivity"), s=s)
    out["sensitivity"] = fit_r2(sample.indices, sample.weights)
    sample = reg.leverage_select(inst, s, rng.child("leverage"))
    out["leverage"] = fit_r2(sample.indices, sample.weights)
    idx = rng.child("uniform").generator().integers(inst.n, size=s)
    out["uniform"] = fit_r2(idx)
    return out


@dataclass
class TrialReport:
    """Per-seed rows plus aggregates recomputable from them."""

    pipeline: str
    rows: list = field(default_factory=list)

    def add(self, **row):
        self.rows.append(row)

    @property
    def trials(self) -> int:
        return len(self.rows)

    @property
    def success_rate(self) -> float:
        return float(np.mean([r["success"] for r in self.rows]))

    @property
    def mean_delta(self) -> float:
        return float(np.mean([r["delta"] for r in self.rows]))

    @property
    def median_delta(self) -> float:
        return float(np.median([r["delta"] for r in self.rows]))

    @property
    def std_error(self) -> float:
        deltas = [r["delta"] for r in self.rows]
        return float(np.std(deltas, ddof=1) / math.sqrt(len(deltas))) \
            if len(deltas) > 1 else 0.0

    def summary(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "trials": self.trials,
            "success_rate": self.success_rate,
            "mean_delta": self.mean_delta,
            "median_delta": self.median_delta,
            "std_error": self.std_error,
        }


def exact_expectation_gap(plan_p, plan_w, s, losses) -> float:
    """Relative gap of the algebraic unbiasedness identity
    sum_e s*p_e*w_e*loss_e = sum_e loss_e on the support."""
    values = losses.values if isinstance(losses, LossTable) else \
        np.asarray(losses, dtype=np.float64)
    lhs = float(np.sum(s * plan_p * plan_w * values))
    rhs = float(np.sum(values[plan_p > 0]))
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def run_trials(config: dict) -> TrialReport:
    """Execute seeded trials of a named pipeline and compare each trial's
    error to the matching bound.

    Required keys: pipeline, trials, master_seed; remaining keys depend on
    the pipeline (see the bench docs).  Deterministic given master_seed.
    """
    pipeline = config.get("pipeline")
    trials = int(config.get("trials", 100))
    master = RngStream(int(config.get("master_seed", 0)), "bench")
    report = TrialReport(pipeline)
    if pipeline == "data_select":
        _trials_data_select(config, trials, master, report)
    elif pipeline == "rounds":
        _trials_rounds(config, trials, master, report)
    elif pipeline == "uniform_spike":
        _trials_uniform_spike(config, trials, master, report)
    elif pipeline == "uniform_rademacher":
        _trials_rademacher(config, trials, master, report)
    elif pipeline == "regression":
        _trials_regression(config, trials, master, report)
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    return report


def _planted_from_config(config, master) -> PlantedInstance:
    return planted_holder(
        n=int(config.get("n", 2000)), d=int(config.get("d", 10)),
        k=int(config.get("k", 4)), z=float(config.get("z", 2)),
        separation=float(config.get("separation", 20)),
        lambda_true=float(config.get("lambda_true", 0.5)),
        rng=master.child("instance"))


def _trials_data_select(config, trials, master, report):
    inst = _planted_from_config(config, master)
    eps = float(config.get("epsilon", 0.2))
    k = int(config.get("k", 4))
    auto = str(config.get("lambda_mode", "supplied")) == "auto"
    for t in range(trials):
        budget = None if auto else k
        oracle = LossOracle.from_table(inst.losses, budget=budget)
        lam = "auto" if auto else inst.lam
        sample, run_report, clustering, _ = data_select(
            inst.data, k, eps, lam, oracle, inst.z, master.child(f"trial-{t}"))
        delta = delta_error(inst.losses, sample)
        bound = eps * (inst.sum_loss + 2 * run_report["phi_lambda"])
        report.add(seed=t, delta=delta, bound=bound,
                   success=bool(delta <= bound),
                   queries_used=oracle.queries_used)


def _trials_rounds(config, trials, master, report):
    inst = _planted_from_config(config, master)
    eps = float(config.get("epsilon", 0.2))
    k = int(config.get("k", 4))
    rounds = int(config.get("rounds", 4))
    for t in range(trials):
        oracle = LossOracle.from_table(inst.losses, budget=k * rounds)
        results = data_select_rounds(inst.data, k, rounds, eps,
                                     inst.lambda_true, oracle, inst.z,
                                     master.child(f"trial-{t}"))
        for sample, run_report in results:
            delta = delta_error(inst.losses, sample)
            bound = eps * (inst.sum_loss + run_report["phi_lambda"])
            report.add(seed=t, round=run_report["round"], delta=delta,
                       bound=bound, success=bool(delta <= bound),
                       queries_used=run_report["queries_used"])


def _trials_uniform_spike(config, trials, master, report):
    n = int(config.get("n", 1000))
    eps = float(config.get("epsilon", 0.1))
    s = int(config.get("s", math.ceil(1 / eps ** 2)))
    spike = float(config.get("spike", 1.0))
    losses = np.zeros(n)
    losses[0] = spike
    data = Dataset(np.zeros((n, 1)))
    bound = eps * n * spike
    for t in range(trials):
        sample = uniform_select(data, s, master.child(f"trial-{t}"))
        delta = delta_error(losses, sample)
        report.add(seed=t, delta=delta, bound=bound,
                   success=bool(delta <= bound), queries_used=0)


def _trials_rademacher(config, trials, master, report):
    n = int(config.get("n", 10 ** 4))
    s = int(config.get("s", 100))
    threshold_const = float(config.get("threshold_const", 0.2))
    data, signed = rademacher_instance(n)
    threshold = threshold_const * n / math.sqrt(s)
    for t in range(trials):
        sample = uniform_select(data, s, master.child(f"trial-{t}"))
        # sum of losses is 0, so delta equals |estimator|
        delta = delta_error(signed, sample)
        report.add(seed=t, delta=delta, bound=threshold,
                   success=bool(delta >= threshold), queries_used=0)


def _trials_regression(config, trials, master, report):
    n = int(config.get("n", 2000))
    d = int(config.get("d", 8))
    k = int(config.get("k", 10))
    eps = float(config.get("epsilon", 0.5))
    delta_prob = float(config.get("delta", 0.1))
    lambda_true = float(config.get("lambda_true", 1.0))
    inst, _, _, lam = planted_regression(n, d, k, lambda_true,
                                         master.child("instance"))
    for t in range(trials):
        sample, plan = reg.regression_select(inst, k, eps, lam,
                                             master.child(f"trial-{t}"),
                                             delta=delta_prob)
        x = plan.x0  # admissible by construction
        err = reg.coreset_objective_error(inst, sample, x)
        full = float(np.sum((inst.A @ x - inst.b) ** 2))
        phi = weighted_cost(plan.clustering, np.full(plan.clustering.k,
                                                     lambda_true))
        bound = eps * (full + phi)
        report.add(seed=t, delta=err, bound=bound,
                   success=bool(err <= bound), queries_used=k)
