"""Monte Carlo coverage harness.

Estimates the probabilities that the deviation bounds claim to control
(uniform CDF deviation events, generalization gaps) over seeded
replications, compares the empirical frequencies against the bounds, and
emits coverage reports.  A bound "fails" only when the frequency exceeds
it by more than three Wilson standard errors; since the bounds are
provable, a stable failure indicates an implementation bug, which makes
this module the regression tripwire for the whole package.

The deviation theorems are statements conditional on the realized region
counts, so the CDF-deviation verifier conditions its replications on the
configured partition (drawing each region's samples from the restricted
distribution).  The generalization verifier re-realizes everything per
replication and checks the per-replication bound at its stated
confidence.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .censored import (
    MassSpec,
    RegionPartition,
    RegionSpec,
    bound_three_region,
    bound_two_region,
)
from .classic import dkw_eta, gc_eta, hoeffding_eta
from .generalization import LabeledDataset, empirical_risk
from .rng import SeededRng, splitmix64
from .simulate import SimulationConfig, finalize, run_simulation, stitched_from_partition
from .stats import sup_deviation

__all__ = [
    "CoverageReport",
    "TableReport",
    "wilson_interval",
    "wilson_stderr",
    "mc_cdf_deviation",
    "mc_gen_gap",
    "compare_bounds",
    "vc_gen_eta",
]


def wilson_interval(successes: int, total: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total < 1:
        raise ValueError("need at least one trial")
    s, n = float(successes), float(total)
    center = (s + z * z / 2.0) / (n + z * z)
    half = (z / (n + z * z)) * math.sqrt(s * (n - s) / n + z * z / 4.0)
    return max(0.0, center - half), min(1.0, center + half)


def wilson_stderr(successes: int, total: int) -> float:
    """Half-width of the z=1 Wilson interval; a never-zero stderr proxy."""
    lo, hi = wilson_interval(successes, total, z=1.0)
    return 0.5 * (hi - lo)


def _verdict(freq: float, bound: float, stderr: float) -> str:
    if freq <= bound:
        return "bound-holds"
    if freq <= bound + 3.0 * stderr:
        return "bound-violated-within-noise"
    return "bound-violated"


@dataclass(frozen=True)
class CoverageReport:
    """Empirical event frequency versus a claimed probability bound."""

    replications: int
    seed: int
    threshold: float            # the eta (or delta) defining the event
    successes: int
    frequency: float
    wilson_lo: float
    wilson_hi: float
    stderr: float
    bound: float
    verdict: str
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(cls, successes: int, replications: int, seed: int, threshold: float,
              bound: float, meta: Optional[dict] = None) -> "CoverageReport":
        freq = successes / replications
        lo, hi = wilson_interval(successes, replications)
        se = wilson_stderr(successes, replications)
        return cls(
            replications=replications,
            seed=seed,
            threshold=threshold,
            successes=successes,
            frequency=freq,
            wilson_lo=lo,
            wilson_hi=hi,
            stderr=se,
            bound=bound,
            verdict=_verdict(freq, bound, se),
            meta=dict(meta or {}),
        )

    @property
    def holds(self) -> bool:
        return self.verdict != "bound-violated"

    _CSV_FIELDS = ("replications", "seed", "threshold", "successes", "frequency",
                   "wilson_lo", "wilson_hi", "stderr", "bound", "verdict")

    def to_json(self) -> str:
        out = {k: getattr(self, k) for k in (*self._CSV_FIELDS, "meta")}
        return json.dumps(out, sort_keys=True)

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self._CSV_FIELDS)
            writer.writerow([getattr(self, k) for k in self._CSV_FIELDS])


@dataclass(frozen=True)
class TableReport:
    """Column-oriented comparison table with stable schema."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            writer.writerows(self.rows)


# ---------------------------------------------------------------------------
# CDF deviation events
# ---------------------------------------------------------------------------


def _batch_sup_conditioned(masses: Sequence[float], counts: Sequence[int],
                           replications: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform deviation of the region-weighted estimator, conditioned on counts.

    Regions carry theoretical masses ``masses`` (summing to 1) and exactly
    ``counts`` samples each.  Draws use the probability integral transform:
    a region sample's CDF value is uniform on the region's mass interval,
    so the deviation can be computed from sorted uniforms alone.  With the
    counts realized, the estimator weight of region i is counts[i]/n.
    """
    masses = np.asarray(masses, dtype=float)
    counts = np.asarray(counts, dtype=int)
    n = int(counts.sum())
    mass_edges = np.concatenate([[0.0], np.cumsum(masses)])
    weight_edges = np.concatenate([[0.0], np.cumsum(counts / n)])
    sup = np.zeros(replications)
    # interior boundary mismatches are approached one-sidedly
    for edge_mass, edge_weight in zip(mass_edges[1:-1], weight_edges[1:-1]):
        sup = np.maximum(sup, abs(edge_mass - edge_weight))
    for i, c in enumerate(counts):
        if c == 0:
            continue
        u = np.sort(gen.random((replications, c)), axis=1)
        fvals = mass_edges[i] + masses[i] * u
        w = weight_edges[i + 1] - weight_edges[i]
        hi = weight_edges[i] + w * (np.arange(1, c + 1) / c)
        lo = weight_edges[i] + w * (np.arange(c) / c)
        dev = np.maximum(np.abs(fvals - hi), np.abs(fvals - lo))
        sup = np.maximum(sup, dev.max(axis=1))
    return sup


def _config_region(config: SimulationConfig) -> tuple[float, Optional[float], float]:
    if config.theta is None:
        raise ValueError("CDF-deviation verification needs a fixed threshold")
    return float(config.theta), config.lb, config.epsilon


def mc_cdf_deviation(config: SimulationConfig, eta: float, replications: int,
                     seed: int, condition: Optional[RegionPartition] = None,
                     ) -> CoverageReport:
    """Estimate P(sup |F - F_hat| >= eta) and compare it to the bound.

    With ``condition`` given (and no arrivals), every replication draws
    exactly the conditioned counts per region from the restricted
    distributions, matching the bounds' conditional statements; the bound
    is evaluated once at that partition.  Otherwise each replication
    re-realizes counts via the full simulator and the frequency is
    compared against the mean of the per-replication bounds.
    """
    if replications < 100:
        raise ValueError("need at least 100 replications")
    if not config.pooled:
        raise ValueError("CDF-deviation verification runs on pooled configs")
    theta, lb, eps = _config_region(config)
    alpha = float(config.population.cdf(theta))
    beta = float(config.population.cdf(lb)) if lb is not None else 0.0

    if condition is not None:
        if config.arrivals:
            raise ValueError("conditioned verification requires zero arrivals")
        part = condition
        if lb is None:
            masses = (alpha, 1.0 - alpha)
            counts = (part.m, part.n - part.m)
            bound = bound_two_region(part, MassSpec.theoretical(alpha), eta)
        else:
            masses = (beta, alpha - beta, 1.0 - alpha)
            counts = (part.l, part.m - part.l, part.n - part.m)
            bound = bound_three_region(part, MassSpec.theoretical(alpha, beta),
                                       RegionSpec(theta, lb, eps), eta)
        gen = SeededRng(seed).substream(0).generator()
        sup = _batch_sup_conditioned(masses, counts, replications, gen)
        successes = int(np.sum(sup >= eta))
        return CoverageReport.build(successes, replications, seed, eta,
                                    bound.probability,
                                    meta={"mode": "conditioned", "eta": eta})

    from .simulate import REGION_DISCLOSED, REGION_EXPLORE

    successes = 0
    bounds = []
    run_seed0 = splitmix64(seed)
    for r in range(replications):
        trace = run_simulation(_with_seed(config, run_seed0 ^ r))
        adm = trace.arrival_admitted
        est = stitched_from_partition(
            trace.initial_scores,
            trace.arrival_scores[adm & (trace.arrival_region == REGION_EXPLORE)],
            trace.arrival_scores[adm & (trace.arrival_region == REGION_DISCLOSED)],
            theta, lb, eps)
        sup = sup_deviation(config.population, est)
        successes += sup >= eta
        part = finalize(trace)[None].part
        if lb is None:
            bounds.append(bound_two_region(part, MassSpec.theoretical(alpha), eta).probability)
        else:
            bounds.append(bound_three_region(part, MassSpec.theoretical(alpha, beta),
                                             RegionSpec(theta, lb, eps), eta).probability)
    return CoverageReport.build(int(successes), replications, seed, eta,
                                float(np.mean(bounds)),
                                meta={"mode": "unconditioned", "eta": eta})


def _with_seed(config: SimulationConfig, seed: int) -> SimulationConfig:
    d = config.to_dict()
    d["seed"] = seed
    return SimulationConfig.from_dict(d)


# ---------------------------------------------------------------------------
# Generalization gap events
# ---------------------------------------------------------------------------


def _two_region_prob_vec(n: int, m, k, alpha, eta) -> np.ndarray:
    """Vectorized two-region bound probability; mirrors the scalar path."""
    m = np.asarray(m, dtype=float)
    k = np.asarray(k, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    eta = np.asarray(eta, dtype=float)
    frac = m / n
    u = np.abs(alpha - frac)

    def term(count, mass_th, mass_emp, shift):
        denom = np.minimum(mass_th, mass_emp)
        degenerate = (count <= 0) | (denom <= 0)
        worst = np.maximum(mass_th, mass_emp)
        eff = eta - shift
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            body = 2.0 * np.exp(-2.0 * count * eff * eff / (denom * denom))
        val = np.where(eff <= 0, 1.0, body)
        return np.where(degenerate, np.where(worst <= eta, 0.0, 1.0), val)

    raw = term(m, alpha, frac, u) + term(n - m + k, 1.0 - alpha, (n - m) / n, 2.0 * u)
    return np.minimum(raw, 1.0)


def _eta_two_region_vec(n: int, m, k, alpha, delta: float,
                        tol: float = 1e-9) -> np.ndarray:
    """Vectorized inverse of the two-region bound; 1.0 where unreachable.

    The deterministic cap sup <= 1 makes eta = 1 a valid fallback bound
    whenever the requested confidence lies below the censored-region
    floor.
    """
    m = np.asarray(m, dtype=float)
    shape = np.broadcast_shapes(m.shape, np.shape(k), np.shape(alpha))
    lo = np.zeros(shape)
    hi = np.ones(shape)
    reachable = _two_region_prob_vec(n, m, k, alpha, 1.0) <= delta
    steps = int(np.ceil(np.log2(1.0 / tol)))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        ok = _two_region_prob_vec(n, m, k, alpha, mid) <= delta
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.where(reachable, hi, 1.0)


def _train_thresholds(x0: np.ndarray, x1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise empirical-risk-minimizing thresholds and their risks."""
    R, n0 = x0.shape
    n1 = x1.shape[1]
    n = n0 + n1
    scores = np.concatenate([x0, x1], axis=1)
    labels = np.concatenate([np.zeros((R, n0), dtype=np.int8),
                             np.ones((R, n1), dtype=np.int8)], axis=1)
    order = np.argsort(scores, axis=1, kind="stable")
    xs = np.take_along_axis(scores, order, axis=1)
    ys = np.take_along_axis(labels, order, axis=1)
    zeros = np.zeros((R, 1))
    cum1 = np.concatenate([zeros, np.cumsum(ys == 1, axis=1)], axis=1)
    cum0 = np.concatenate([zeros, np.cumsum(ys == 0, axis=1)], axis=1)
    errors = cum1 + (cum0[:, -1:] - cum0)
    valid = np.ones((R, n + 1), dtype=bool)
    valid[:, 1:n] = xs[:, 1:] > xs[:, :-1]
    errors = np.where(valid, errors, n + 1)
    j = np.argmin(errors, axis=1)
    risks = errors[np.arange(R), j] / n
    theta = np.empty(R)
    interior = (j > 0) & (j < n)
    theta[j == 0] = -np.inf
    theta[j == n] = np.inf
    ji = j[interior]
    rows = np.arange(R)[interior]
    theta[interior] = 0.5 * (xs[rows, ji - 1] + xs[rows, ji])
    return theta, risks


def _gen_gap_samples(config: SimulationConfig, replications: int, seed: int,
                     delta: float):
    """Per-replication trained thresholds, gaps, and assembled bounds."""
    model = config.model
    n0, n1 = config.n0, config.n1
    n = n0 + n1
    root = SeededRng(seed)
    gen = root.substream(0).generator()
    u = gen.random((replications, n))
    x0 = np.asarray(model.cdf0.inverse(u[:, :n0]), dtype=float)
    x1 = np.asarray(model.cdf1.inverse(u[:, n0:]), dtype=float)
    if config.theta is not None:
        theta = np.full(replications, float(config.theta))
        remp = np.array([
            empirical_risk(config.theta, LabeledDataset(x0[r], x1[r]))
            for r in range(replications)])
    else:
        theta, remp = _train_thresholds(x0, x1)

    a0 = np.asarray(model.cdf0.cdf(theta), dtype=float)
    a1 = np.asarray(model.cdf1.cdf(theta), dtype=float)
    rtrue = model.p1 * a1 + model.p0 * (1.0 - a0)
    gaps = np.abs(rtrue - remp)

    m0 = np.sum(x0 < theta[:, None], axis=1)
    m1 = np.sum(x1 < theta[:, None], axis=1)
    bin_gen = root.substream(1).generator()
    T = config.arrivals
    t1 = bin_gen.binomial(T, model.p1, size=replications) if T else np.zeros(replications, dtype=int)
    k1 = bin_gen.binomial(t1, 1.0 - a1) if T else np.zeros(replications, dtype=int)
    k0 = bin_gen.binomial(T - t1, 1.0 - a0) if T else np.zeros(replications, dtype=int)

    eta0 = _eta_two_region_vec(n0, m0, k0, a0, delta)
    eta1 = _eta_two_region_vec(n1, m1, k1, a1, delta)
    prior = 3.0 * abs(model.p0 - n0 / n)
    totals = prior + np.minimum(model.p0, n0 / n) * eta0 + np.minimum(model.p1, n1 / n) * eta1
    return theta, gaps, totals, (x0, x1, a0, a1, k0, k1)


def mc_gen_gap(config: SimulationConfig, replications: int, seed: int,
               delta: float = 0.05) -> CoverageReport:
    """Frequency of |expected - empirical| risk exceeding its bound.

    Each replication draws fresh initial data, trains (or takes) the
    threshold, realizes the admitted-arrival counts, assembles the
    generalization bound with per-label deviation inversions at delta,
    and checks the realized gap against it.  The exceedance frequency is
    compared to the claimed failure budget 2*delta.
    """
    if replications < 100:
        raise ValueError("need at least 100 replications")
    if config.pooled:
        raise ValueError("generalization verification needs a labeled config")
    if config.lb is not None:
        raise ValueError("exploration-mode generalization verification is not supported")
    _, gaps, totals, _ = _gen_gap_samples(config, replications, seed, delta)
    successes = int(np.sum(gaps > totals))
    return CoverageReport.build(successes, replications, seed, delta,
                                2.0 * delta,
                                meta={"mode": "gen-gap", "delta": delta,
                                      "mean_gap": float(np.mean(gaps)),
                                      "mean_bound": float(np.mean(totals))})


# ---------------------------------------------------------------------------
# Benchmark comparison
# ---------------------------------------------------------------------------


def vc_gen_eta(n: int, delta: float, d: int = 2) -> float:
    """Classic uniform risk-deviation level: invert 4*(2n+1)^d*exp(-n*eta^2/8).

    Standard symmetrization-based classifier bound with the shattering
    coefficient bounded polynomially; an approximate benchmark form.
    """
    if n < 1 or not delta > 0 or d < 1:
        raise ValueError("need n >= 1, delta > 0, d >= 1")
    return math.sqrt(8.0 * (math.log(4.0 / delta) + d * math.log(2.0 * n + 1.0)) / n)


def _sup_risk_gap(theta: float, x0: np.ndarray, x1: np.ndarray,
                  k0: int, k1: int, a0: float, a1: float,
                  model, gen: np.random.Generator) -> float:
    """sup over thresholds of |expected - empirical| risk, region-weighted.

    Disclosed parts of the per-label estimators are extended with the
    realized numbers of admitted arrivals (drawn from the restricted
    upper-region distributions).
    """
    n0, n1 = len(x0), len(x1)
    n = n0 + n1
    segs = {}
    for label, x, k, a, cdf in ((0, x0, k0, a0, model.cdf0), (1, x1, k1, a1, model.cdf1)):
        cens = np.sort(x[x < theta])
        disc = x[x >= theta]
        if k:
            u = a + (1.0 - a) * gen.random(k)
            disc = np.concatenate([disc, np.asarray(cdf.inverse(u), dtype=float)])
        segs[label] = (cens, np.sort(disc), len(cens) / len(x))
    zs = np.sort(np.concatenate([arr for seg in segs.values() for arr in seg[:2]]))
    f0 = np.asarray(model.cdf0.cdf(zs), dtype=float)
    f1 = np.asarray(model.cdf1.cdf(zs), dtype=float)

    def fhat(label, side):
        cens, disc, w = segs[label]
        below = (np.searchsorted(cens, zs, side=side) / len(cens) * w
                 if len(cens) else np.zeros(len(zs)))
        above = (np.searchsorted(disc, zs, side=side) / len(disc) * (1.0 - w)
                 if len(disc) else np.zeros(len(zs)))
        return np.where(zs < theta, below, w + above)

    w1, w0 = n1 / n, n0 / n
    best = 0.0
    for side in ("left", "right"):
        diff = (model.p1 * f1 - w1 * fhat(1, side)) - (model.p0 * f0 - w0 * fhat(0, side)) \
            + (model.p0 - w0)
        best = max(best, float(np.max(np.abs(diff))))
    return best


def compare_bounds(config: SimulationConfig, *, arrival_grid: Optional[Sequence[int]] = None,
                   eta_grid: Optional[Sequence[float]] = None, replications: int = 1000,
                   seed: int = 0, delta: float = 0.015, vc_dim: int = 2) -> TableReport:
    """Evaluate our bounds, classic benchmarks, and the MC truth on a grid.

    Generalization mode (``arrival_grid``): the truth column is the
    empirical (1-2*delta)-quantile of the uniform risk deviation
    sup_theta |R - R_emp| -- the quantity every uniform-convergence bound
    in the table claims to control at confidence 1-2*delta.  Benchmarks
    are evaluated as if all n + T samples were IID (they do not model
    censoring); ours averages the per-replication assembled bound.

    CDF mode (``eta_grid``): the truth column is the empirical
    exceedance frequency P(sup >= eta) under the conditioned partition,
    compared against our bound and the classic forms.
    """
    if (arrival_grid is None) == (eta_grid is None):
        raise ValueError("exactly one of arrival_grid/eta_grid must be given")

    if eta_grid is not None:
        theta, lb, eps = _config_region(config)
        alpha = float(config.population.cdf(theta))
        gen = SeededRng(seed).substream(0).generator()
        from .classic import dkw_bound, gc_bound, hoeffding_bound, vc_bound

        part = RegionPartition(n=config.n, m=int(round(config.n * alpha)), k=0)
        sup = _batch_sup_conditioned((alpha, 1.0 - alpha), (part.m, part.n - part.m),
                                     replications, gen)
        rows = []
        for eta in eta_grid:
            freq = float(np.mean(sup >= eta))
            ours = bound_two_region(part, MassSpec.theoretical(alpha), float(eta))
            rows.append((
                float(eta), freq, ours.probability,
                dkw_bound(config.n, float(eta)).probability,
                gc_bound(config.n, float(eta)).probability,
                vc_bound(config.n, float(eta), vc_dim).probability,
                hoeffding_bound(config.n, float(eta)).probability,
            ))
        return TableReport(
            columns=("eta", "mc_frequency", "ours", "dkw", "gc", "vc", "hoeffding"),
            rows=tuple(rows),
            meta={"mode": "cdf", "replications": replications, "seed": seed},
        )

    if config.pooled:
        raise ValueError("generalization comparison needs a labeled config")
    model = config.model
    n = config.n0 + config.n1
    grid = [int(t) for t in arrival_grid]
    quant = 1.0 - 2.0 * delta

    root = SeededRng(seed)
    sup_gen = root.substream(2).generator()
    sup_by_t = {t: [] for t in grid}
    ours_by_t = {t: [] for t in grid}
    gaps_all = []
    for t_idx, T in enumerate(grid):
        cfg = _with_grid(config, T)
        theta, gaps, totals, (x0, x1, a0, a1, k0, k1) = _gen_gap_samples(
            cfg, replications, seed, delta)
        ours_by_t[T] = totals
        if t_idx == 0:
            gaps_all = gaps
        for r in range(replications):
            sup_by_t[T].append(_sup_risk_gap(theta[r], x0[r], x1[r],
                                             int(k0[r]), int(k1[r]),
                                             float(a0[r]), float(a1[r]),
                                             model, sup_gen))
    rows = []
    for T in grid:
        n_iid = n + T
        rows.append((
            T,
            float(np.quantile(sup_by_t[T], quant)),
            float(np.mean(sup_by_t[T])),
            float(np.mean(ours_by_t[T])),
            hoeffding_eta(n_iid, 2.0 * delta),
            gc_eta(n_iid, 2.0 * delta),
            vc_gen_eta(n_iid, 2.0 * delta, vc_dim),
            dkw_eta(n_iid, 2.0 * delta),
        ))
    return TableReport(
        columns=("arrivals", "gap_quantile", "gap_mean", "ours",
                 "hoeffding", "gc", "vc_gen", "dkw"),
        rows=tuple(rows),
        meta={"mode": "gen", "replications": replications, "seed": seed,
              "delta": delta, "quantile": quant,
              "gap_at_theta_mean": float(np.mean(gaps_all)) if len(gaps_all) else None},
    )


def _with_grid(config: SimulationConfig, arrivals: int) -> SimulationConfig:
    d = config.to_dict()
    d["arrivals"] = int(arrivals)
    return SimulationConfig.from_dict(d)
