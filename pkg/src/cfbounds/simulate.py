"""Sequential data-collection process with censored feedback.

Stage 1 draws the initial sample(s) and fixes (or trains) the decision
threshold.  Stage 2 processes arrivals one by one: a score at or above
the threshold is always admitted; a score in the exploration range
[LB, theta) is admitted with probability epsilon (one coin per eligible
arrival, consumed in arrival order); anything else is rejected and its
label is never observed.  Stage 3 tallies the admitted samples into
per-region counts and empirical CDFs.

Labels of rejected arrivals are recorded in the trace for auditing but
are never used by any estimate built from it.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .censored import RegionPartition
from .generalization import LabeledDataset, optimal_threshold
from .rng import SeededRng
from .stats import (
    EmpiricalCdf,
    GaussianCdf,
    MixtureModel,
    PiecewiseCdf,
    StitchedCdf,
    TheoreticalCdf,
    sample_labeled,
)

__all__ = [
    "SimulationConfig",
    "Stage1State",
    "SimulationTrace",
    "FinalEstimate",
    "run_stage1",
    "run_arrivals",
    "run_simulation",
    "finalize",
    "stitched_from_partition",
    "ingest_scores",
    "cdf_to_spec",
    "cdf_from_spec",
]

REGION_CENSORED, REGION_EXPLORE, REGION_DISCLOSED = 0, 1, 2


@dataclass(frozen=True)
class SimulationConfig:
    """Full description of one simulation run.

    Exactly one of ``population`` (pooled, unlabeled scores) or ``model``
    (two-label mixture) must be given.  ``theta=None`` trains the
    threshold on the initial labeled data.  ``retrain_every=B`` refits
    the threshold on all observed labeled data after every B arrivals.
    """

    arrivals: int
    seed: int
    theta: Optional[float] = None
    lb: Optional[float] = None
    epsilon: float = 0.0
    population: Optional[TheoreticalCdf] = None
    n: int = 0
    model: Optional[MixtureModel] = None
    n0: int = 0
    n1: int = 0
    retrain_every: Optional[int] = None

    def __post_init__(self):
        if (self.population is None) == (self.model is None):
            raise ValueError("exactly one of population/model must be set")
        if self.population is not None and self.n < 1:
            raise ValueError("pooled mode needs n >= 1 initial samples")
        if self.model is not None and (self.n0 < 1 or self.n1 < 1):
            raise ValueError("labeled mode needs n0, n1 >= 1")
        if self.arrivals < 0:
            raise ValueError("arrivals must be nonnegative")
        if self.retrain_every is not None and self.retrain_every < 1:
            raise ValueError("retrain batch size must be >= 1")
        if self.theta is None and self.model is None:
            raise ValueError("training the threshold requires labeled data")
        if self.lb is not None and self.theta is not None and not self.lb < self.theta:
            raise ValueError("need lb < theta")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if self.retrain_every is not None and self.model is None:
            raise ValueError("adaptive retraining requires labeled data")

    @property
    def pooled(self) -> bool:
        return self.population is not None

    def to_dict(self) -> dict:
        out = {
            "arrivals": self.arrivals,
            "seed": self.seed,
            "theta": self.theta,
            "lb": self.lb,
            "epsilon": self.epsilon,
            "retrain_every": self.retrain_every,
        }
        if self.pooled:
            out["population"] = cdf_to_spec(self.population)
            out["n"] = self.n
        else:
            out["model"] = {
                "p1": self.model.p1,
                "cdf0": cdf_to_spec(self.model.cdf0),
                "cdf1": cdf_to_spec(self.model.cdf1),
            }
            out["n0"] = self.n0
            out["n1"] = self.n1
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        kwargs = {
            "arrivals": int(data["arrivals"]),
            "seed": int(data["seed"]),
            "theta": data.get("theta"),
            "lb": data.get("lb"),
            "epsilon": float(data.get("epsilon", 0.0)),
            "retrain_every": data.get("retrain_every"),
        }
        if "population" in data:
            kwargs["population"] = cdf_from_spec(data["population"])
            kwargs["n"] = int(data["n"])
        else:
            m = data["model"]
            kwargs["model"] = MixtureModel(
                p1=float(m["p1"]),
                cdf0=cdf_from_spec(m["cdf0"]),
                cdf1=cdf_from_spec(m["cdf1"]),
            )
            kwargs["n0"] = int(data["n0"])
            kwargs["n1"] = int(data["n1"])
        return cls(**kwargs)


def cdf_to_spec(cdf) -> dict:
    if isinstance(cdf, GaussianCdf):
        return {"family": "gaussian", "mean": cdf.mean, "stddev": cdf.stddev}
    if isinstance(cdf, PiecewiseCdf):
        return {"family": "piecewise", "xs": cdf.xs.tolist(), "ps": cdf.ps.tolist()}
    raise TypeError(f"cannot serialize CDF of type {type(cdf).__name__}")


def cdf_from_spec(spec: dict):
    family = spec["family"]
    if family == "gaussian":
        return GaussianCdf(float(spec["mean"]), float(spec["stddev"]))
    if family == "piecewise":
        return PiecewiseCdf(np.asarray(spec["xs"], dtype=float), np.asarray(spec["ps"], dtype=float))
    raise ValueError(f"unknown CDF family {family!r}")


@dataclass(frozen=True)
class Stage1State:
    theta0: float
    initial_scores: np.ndarray                 # pooled scores, or empty
    initial0: np.ndarray
    initial1: np.ndarray


@dataclass(frozen=True)
class SimulationTrace:
    """Complete record of one run; sufficient to replay every decision."""

    config: SimulationConfig
    theta0: float
    initial_scores: np.ndarray
    initial0: np.ndarray
    initial1: np.ndarray
    arrival_scores: np.ndarray
    arrival_labels: Optional[np.ndarray]       # None in pooled mode
    arrival_region: np.ndarray                 # region codes at decision time
    arrival_admitted: np.ndarray
    arrival_coins: np.ndarray                  # NaN where no coin was consumed
    threshold_history: tuple[tuple[int, float], ...]   # (time, theta) pairs

    @property
    def final_theta(self) -> float:
        return self.threshold_history[-1][1]

    def admitted_scores(self, label: Optional[int] = None) -> np.ndarray:
        mask = self.arrival_admitted.copy()
        if label is not None:
            if self.arrival_labels is None:
                raise ValueError("pooled trace has no labels")
            mask &= self.arrival_labels == label
        return self.arrival_scores[mask]

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "theta0": self.theta0,
            "final_theta": _json_float(self.final_theta),
            "initial_scores": self.initial_scores.tolist(),
            "initial0": self.initial0.tolist(),
            "initial1": self.initial1.tolist(),
            "arrival_scores": self.arrival_scores.tolist(),
            "arrival_labels": None if self.arrival_labels is None else self.arrival_labels.tolist(),
            "arrival_region": self.arrival_region.tolist(),
            "arrival_admitted": self.arrival_admitted.tolist(),
            "arrival_coins": [None if np.isnan(c) else c for c in self.arrival_coins],
            "threshold_history": [[t, _json_float(th)] for t, th in self.threshold_history],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)


def _json_float(x: float):
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def run_stage1(config: SimulationConfig) -> Stage1State:
    """Draw the initial data and fix the starting threshold."""
    gen = SeededRng(config.seed).substream(0).generator()
    if config.pooled:
        scores = np.asarray(config.population.inverse(gen.random(config.n)), dtype=float)
        return Stage1State(theta0=float(config.theta), initial_scores=scores,
                           initial0=np.empty(0), initial1=np.empty(0))
    u = gen.random(config.n0 + config.n1)
    x0 = np.asarray(config.model.cdf0.inverse(u[: config.n0]), dtype=float)
    x1 = np.asarray(config.model.cdf1.inverse(u[config.n0:]), dtype=float)
    if config.theta is not None:
        theta0 = float(config.theta)
    else:
        theta0 = optimal_threshold(LabeledDataset(x0, x1))
    return Stage1State(theta0=theta0, initial_scores=np.empty(0), initial0=x0, initial1=x1)


def _region_of(scores, theta, lb):
    region = np.full(len(scores), REGION_CENSORED, dtype=np.uint8)
    region[scores >= theta] = REGION_DISCLOSED
    if lb is not None:
        region[(scores >= lb) & (scores < theta)] = REGION_EXPLORE
    return region


def run_arrivals(state: Stage1State, config: SimulationConfig,
                 arrival_stream: Optional[tuple[np.ndarray, Optional[np.ndarray]]] = None,
                 ) -> SimulationTrace:
    """Process the arrival sequence and record every decision.

    ``arrival_stream`` replaces synthetic draws with externally supplied
    (scores, labels), consumed in order.  Exploration coins are drawn
    from their own stream and consumed only for arrivals that fall in
    [LB, theta) at decision time, so runs sharing a seed see identical
    coins for those arrivals regardless of epsilon.
    """
    root = SeededRng(config.seed)
    T = config.arrivals
    if arrival_stream is not None:
        scores, labels = arrival_stream
        scores = np.asarray(scores, dtype=float)
        if labels is not None:
            labels = np.asarray(labels)
        elif not config.pooled:
            raise ValueError("labeled configs need labels in the arrival stream")
        T = len(scores)
    elif config.pooled:
        gen = root.substream(1).generator()
        scores = np.asarray(config.population.inverse(gen.random(T)), dtype=float)
        labels = None
    else:
        scores, labels = sample_labeled(config.model, T, root.substream(1))

    coin_gen = root.substream(2).generator()
    coins = np.full(T, np.nan)
    adaptive = config.retrain_every is not None and T > 0

    if not adaptive:
        region = _region_of(scores, state.theta0, config.lb)
        explore = region == REGION_EXPLORE
        coins[explore] = coin_gen.random(int(np.sum(explore)))
        admitted = (region == REGION_DISCLOSED) | (explore & (coins < config.epsilon))
        history = ((0, state.theta0),)
    else:
        theta = state.theta0
        history = [(0, state.theta0)]
        region = np.empty(T, dtype=np.uint8)
        admitted = np.zeros(T, dtype=bool)
        obs0 = [state.initial0]
        obs1 = [state.initial1]
        B = config.retrain_every
        for t in range(T):
            x = scores[t]
            if x >= theta:
                region[t] = REGION_DISCLOSED
                admitted[t] = True
            elif config.lb is not None and x >= config.lb:
                region[t] = REGION_EXPLORE
                coins[t] = coin_gen.random()
                admitted[t] = coins[t] < config.epsilon
            else:
                region[t] = REGION_CENSORED
            if admitted[t]:
                (obs1 if labels[t] == 1 else obs0).append(scores[t: t + 1])
            if (t + 1) % B == 0:
                theta = optimal_threshold(
                    LabeledDataset(np.concatenate(obs0), np.concatenate(obs1)))
                history.append((t + 1, theta))
        history = tuple(history)

    return SimulationTrace(
        config=config,
        theta0=state.theta0,
        initial_scores=state.initial_scores,
        initial0=state.initial0,
        initial1=state.initial1,
        arrival_scores=scores,
        arrival_labels=labels,
        arrival_region=region,
        arrival_admitted=np.asarray(admitted, dtype=bool),
        arrival_coins=coins,
        threshold_history=tuple(history),
    )


def run_simulation(config: SimulationConfig,
                   arrival_stream=None) -> SimulationTrace:
    return run_arrivals(run_stage1(config), config, arrival_stream)


@dataclass(frozen=True)
class FinalEstimate:
    """Per-population outcome: region counts plus the empirical CDF."""

    part: RegionPartition
    ecdf: EmpiricalCdf


def _finalize_one(initial: np.ndarray, admitted: np.ndarray, admitted_region: np.ndarray,
                  theta: float, lb: Optional[float]) -> FinalEstimate:
    m = int(np.sum(initial < theta))
    new_explore = int(np.sum(admitted_region == REGION_EXPLORE))
    new_above = int(np.sum(admitted_region == REGION_DISCLOSED))
    if lb is None:
        part = RegionPartition(n=len(initial), m=m, k=new_above)
    else:
        part = RegionPartition(n=len(initial), m=m, l=int(np.sum(initial < lb)),
                               k1=new_explore, k2=new_above)
    return FinalEstimate(part=part, ecdf=EmpiricalCdf(np.concatenate([initial, admitted])))


def finalize(trace: SimulationTrace) -> dict:
    """Tally the trace into per-label (or pooled) partitions and CDFs.

    Counts are taken against the final threshold; only admitted arrivals
    enter the empirical CDFs.
    """
    theta = trace.final_theta
    lb = trace.config.lb
    adm = trace.arrival_admitted
    if trace.config.pooled:
        return {None: _finalize_one(trace.initial_scores, trace.arrival_scores[adm],
                                    trace.arrival_region[adm], theta, lb)}
    out = {}
    for label, initial in ((0, trace.initial0), (1, trace.initial1)):
        mask = adm & (trace.arrival_labels == label)
        out[label] = _finalize_one(initial, trace.arrival_scores[mask],
                                   trace.arrival_region[mask], theta, lb)
    return out


def stitched_from_partition(initial: np.ndarray, new_explore: np.ndarray,
                            new_above: np.ndarray, theta: float,
                            lb: Optional[float], epsilon: float) -> StitchedCdf:
    """Region-weighted full-domain CDF estimate from observed samples.

    Two-region form (no lb): weights m/n and (n-m)/n.  Three-region form:
    the censored weight stays l/n while the exploration/disclosed split of
    the remaining mass is re-estimated from the arrival counts, with
    disclosed arrivals thinned by epsilon so both regions are counted on
    the same acceptance scale.
    """
    initial = np.asarray(initial, dtype=float)
    n = len(initial)
    if lb is None:
        cens = initial[initial < theta]
        disc = np.concatenate([initial[initial >= theta], new_above])
        w = len(cens) / n
        return StitchedCdf(
            edges=(theta,),
            weights=(w, 1.0 - w),
            segments=(EmpiricalCdf(cens) if len(cens) else None,
                      EmpiricalCdf(disc) if len(disc) else None),
        )
    cens = initial[initial < lb]
    expl = np.concatenate([initial[(initial >= lb) & (initial < theta)], new_explore])
    disc = np.concatenate([initial[initial >= theta], new_above])
    l, m = len(cens), int(np.sum(initial < theta))
    k1, k2 = len(new_explore), len(new_above)
    upper_total = (n - l) + k1 + epsilon * k2
    if upper_total > 0:
        w_expl = ((n - l) / n) * ((m - l + k1) / upper_total)
        w_disc = ((n - l) / n) * ((n - m + epsilon * k2) / upper_total)
    else:
        w_expl = w_disc = 0.0
    return StitchedCdf(
        edges=(lb, theta),
        weights=(l / n, w_expl, w_disc),
        segments=(EmpiricalCdf(cens) if len(cens) else None,
                  EmpiricalCdf(expl) if len(expl) else None,
                  EmpiricalCdf(disc) if len(disc) else None),
    )


def ingest_scores(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a `score,label` CSV into an arrival stream (file order).

    Labels must be 0 or 1 and scores finite; malformed rows raise with
    their line number.
    """
    scores, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["score", "label"]:
            raise ValueError(f"{path}: expected header 'score,label', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                score = float(row[0])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad score {row[0]!r}") from None
            if not np.isfinite(score):
                raise ValueError(f"{path}:{lineno}: score must be finite")
            label_txt = row[1].strip()
            if label_txt not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: label must be 0 or 1, got {row[1]!r}")
            scores.append(score)
            labels.append(int(label_txt))
    return np.asarray(scores, dtype=float), np.asarray(labels, dtype=np.int8)
