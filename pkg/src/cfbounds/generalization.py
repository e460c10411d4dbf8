"""Threshold-classifier risks and the assembled generalization bound.

The classifier admits exactly the scores at or above its threshold, so a
label-1 sample is misclassified when it falls strictly below the
threshold and a label-0 sample when it does not.  Expected risk uses the
theoretical per-label CDFs; empirical risk counts the same events on a
dataset, keeping the initial label proportions as weights and using the
region-weighted per-label estimators when data was extended under
censored collection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .stats import EmpiricalCdf, MixtureModel, StitchedCdf

__all__ = [
    "LabeledDataset",
    "GenBound",
    "RiskPair",
    "expected_risk",
    "empirical_risk",
    "optimal_threshold",
    "gen_bound",
    "gen_bound_from_counts",
    "risks",
]

_EMPTY = np.empty(0)


@dataclass(frozen=True)
class LabeledDataset:
    """Per-label score samples: initial IID draws plus censored-mode extras.

    ``new0`` / ``new1`` hold samples admitted after the initial draw; they
    must all lie at or above ``admission_threshold``, the threshold that
    governed their collection.
    """

    initial0: np.ndarray
    initial1: np.ndarray
    new0: np.ndarray = field(default_factory=lambda: _EMPTY)
    new1: np.ndarray = field(default_factory=lambda: _EMPTY)
    admission_threshold: float | None = None

    def __post_init__(self):
        for name in ("initial0", "initial1", "new0", "new1"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        if self.n < 1:
            raise ValueError("dataset needs at least one sample")
        if (len(self.new0) or len(self.new1)) and self.admission_threshold is None:
            raise ValueError("new samples require the admission threshold that produced them")
        if self.admission_threshold is not None:
            th = self.admission_threshold
            if (len(self.new0) and self.new0.min() < th) or (len(self.new1) and self.new1.min() < th):
                raise ValueError("new samples must lie at or above the admission threshold")

    @property
    def n0(self) -> int:
        return len(self.initial0)

    @property
    def n1(self) -> int:
        return len(self.initial1)

    @property
    def n(self) -> int:
        return self.n0 + self.n1

    @property
    def k0(self) -> int:
        return len(self.new0)

    @property
    def k1(self) -> int:
        return len(self.new1)

    def estimator(self, label: int):
        """Per-label CDF estimate: plain eCDF, or region-weighted when extended.

        With extra admitted samples the censored part (below the admission
        threshold) keeps its initial weight m_y/n_y and the disclosed part
        spends the remaining weight over all disclosed samples.
        """
        initial = self.initial1 if label else self.initial0
        new = self.new1 if label else self.new0
        if len(new) == 0:
            return EmpiricalCdf(initial) if len(initial) else None
        th = self.admission_threshold
        cens = initial[initial < th]
        disc = np.concatenate([initial[initial >= th], new])
        w = len(cens) / len(initial)
        return StitchedCdf(
            edges=(th,),
            weights=(w, 1.0 - w),
            segments=(
                EmpiricalCdf(cens) if len(cens) else None,
                EmpiricalCdf(disc) if len(disc) else None,
            ),
        )


@dataclass(frozen=True)
class RiskPair:
    """Expected and empirical risk of one threshold, with their gap."""

    expected: float
    empirical: float

    def __post_init__(self):
        for value in (self.expected, self.empirical):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"risk must lie in [0, 1], got {value}")

    @property
    def gap(self) -> float:
        return abs(self.expected - self.empirical)


def expected_risk(theta: float, model: MixtureModel) -> float:
    """Population misclassification probability of the threshold classifier."""
    return float(model.p1 * model.cdf1.cdf(theta) + model.p0 * (1.0 - model.cdf0.cdf(theta)))


def risks(theta: float, model: MixtureModel, data: LabeledDataset) -> RiskPair:
    """Expected and empirical risk of one threshold as a pair."""
    return RiskPair(expected=expected_risk(theta, model),
                    empirical=empirical_risk(theta, data))


def empirical_risk(theta: float, data: LabeledDataset) -> float:
    """Training misclassification estimate at a threshold.

    Scores exactly at the threshold are admitted, so label-1 errors are
    counted strictly below it.  Initial label proportions n_y / n stay as
    the class weights even after the dataset grows, since admitted-only
    extras say nothing about the priors.
    """
    n0, n1, n = data.n0, data.n1, data.n
    est1 = data.estimator(1)
    est0 = data.estimator(0)
    part1 = est1.cdf_left(theta) if est1 is not None else 0.0
    part0 = est0.cdf_left(theta) if est0 is not None else 0.0
    return float((n1 / n) * part1 + (n0 / n) * (1.0 - part0))


def optimal_threshold(data: LabeledDataset) -> float:
    """Threshold minimizing the empirical risk on the initial samples.

    Candidates are midpoints between adjacent distinct sorted scores plus
    -inf/+inf sentinels (risk is constant between adjacent scores, and
    midpoints avoid the at-threshold admission ambiguity).  Ties break
    toward the smallest threshold.
    """
    scores = np.concatenate([data.initial0, data.initial1])
    labels = np.concatenate([np.zeros(data.n0, dtype=int), np.ones(data.n1, dtype=int)])
    order = np.argsort(scores, kind="stable")
    xs, ys = scores[order], labels[order]
    n = len(xs)
    # errors(j): threshold placed after the j smallest scores
    cum1 = np.concatenate([[0], np.cumsum(ys == 1)])
    cum0 = np.concatenate([[0], np.cumsum(ys == 0)])
    errors = cum1 + (cum0[-1] - cum0)
    # positions between tied scores admit no strictly-between threshold
    valid = np.ones(n + 1, dtype=bool)
    valid[1:n] = xs[1:] > xs[:-1]
    errors = np.where(valid, errors, np.iinfo(np.int64).max)
    j = int(np.argmin(errors))
    if j == 0:
        return -np.inf
    if j == n:
        return np.inf
    return float(0.5 * (xs[j - 1] + xs[j]))


@dataclass(frozen=True)
class GenBound:
    """Assembled generalization-error bound and its pieces."""

    prior_term: float
    contributions: tuple[float, float]   # labels 0 and 1
    total: float
    confidence: float

    def __post_init__(self):
        if min(self.prior_term, *self.contributions) < 0:
            raise ValueError("bound terms must be nonnegative")


def gen_bound_from_counts(n0: int, n1: int, p1: float,
                          sup_bounds: Mapping[int, float], delta: float) -> GenBound:
    """Assemble the generalization bound from initial label counts."""
    if not 0.0 < p1 < 1.0:
        raise ValueError(f"p1 must be in (0, 1), got {p1}")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must be in (0, 0.5), got {delta}")
    if min(n0, n1) < 1:
        raise ValueError("need at least one initial sample per label")
    n = n0 + n1
    p0 = 1.0 - p1
    prior = 3.0 * abs(p0 - n0 / n)
    c0 = min(p0, n0 / n) * sup_bounds[0]
    c1 = min(p1, n1 / n) * sup_bounds[1]
    return GenBound(
        prior_term=prior,
        contributions=(c0, c1),
        total=prior + c0 + c1,
        confidence=1.0 - 2.0 * delta,
    )


def gen_bound(data: LabeledDataset, p1: float,
              sup_bounds: Mapping[int, float], delta: float) -> GenBound:
    """Bound on |expected - empirical| risk of the trained threshold.

    ``sup_bounds`` maps each label to a high-confidence bound on the
    uniform deviation between that label's true CDF and its estimator
    (each inverted at confidence delta, from whichever deviation bound
    applies).  Holds with probability at least 1 - 2*delta by a union
    over the two labels:

        3*|p0 - n0/n| + sum_y min(p_y, n_y/n) * sup_bound_y.
    """
    return gen_bound_from_counts(data.n0, data.n1, p1, sup_bounds, delta)
