"""CDF error bounds for samples collected under censored feedback.

A decision threshold theta splits the score line into a censored region
(below theta, where labels of new arrivals are never observed) and a
disclosed region (at and above theta, where they are).  With bounded
exploration an additional lower bound LB < theta defines an exploration
region [LB, theta) whose arrivals are admitted with probability epsilon.

The observed sample is IID within each region but not across regions, so
uniform deviation bounds are assembled region by region: each region
contributes a DKW-type exponential term whose tolerance is reduced by
scaling/shifting errors |alpha - m/n| between the true region masses and
their empirical estimates.

Conventions for regimes the formulas do not cover:

* If a term's reduced tolerance (eta minus its shift errors) is not
  positive, the DKW step backing it is invalid and the term contributes
  probability 1; the result is flagged ``trivial``.
* A degenerate region (no samples or no estimator weight) is handled
  deterministically: the estimator is flat there, so the deviation is at
  most max(theoretical mass, estimator weight).  The term contributes 0
  when that bound is <= eta and 1 otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .classic import BoundValue

__all__ = [
    "RegionPartition",
    "RegionSpec",
    "MassSpec",
    "MonotonicityReport",
    "partition",
    "censored_term",
    "disclosed_term",
    "bound_two_region",
    "bound_two_region_apriori",
    "bound_three_region",
    "eta_for_confidence",
    "check_prop1",
    "check_prop2",
]


@dataclass(frozen=True)
class RegionPartition:
    """Sample counts per region relative to the threshold(s).

    n initial samples split into l below LB, m - l in [LB, theta) and
    n - m at or above theta; k counts new disclosed samples in two-region
    mode, while (k1, k2) count new exploration/disclosed samples in
    three-region mode.  Two-region partitions have l == k1 == 0.
    """

    n: int
    m: int
    l: int = 0
    k: int = 0
    k1: int = 0
    k2: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one initial sample")
        if not 0 <= self.l <= self.m <= self.n:
            raise ValueError(f"need 0 <= l <= m <= n, got l={self.l} m={self.m} n={self.n}")
        if min(self.k, self.k1, self.k2) < 0:
            raise ValueError("new-sample counts must be nonnegative")

    @property
    def two_region(self) -> bool:
        return self.l == 0 and self.k1 == 0


@dataclass(frozen=True)
class RegionSpec:
    """Decision threshold, optional exploration lower bound and frequency."""

    theta: float
    lb: Optional[float] = None
    epsilon: float = 0.0

    def __post_init__(self):
        if self.lb is not None and not self.lb < self.theta:
            raise ValueError(f"need lb < theta, got lb={self.lb} theta={self.theta}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")


@dataclass(frozen=True)
class MassSpec:
    """Region masses alpha = F(theta), beta = F(LB) and their provenance.

    The bounds are stated with the true masses ("theoretical"); the
    "plugin" mode substitutes the empirical fractions m/n and l/n, which
    zeroes the scaling/shifting error terms and is labelled as such in
    outputs.
    """

    alpha: float
    beta: float = 0.0
    source: str = "theoretical"

    def __post_init__(self):
        if not 0.0 <= self.beta <= self.alpha <= 1.0:
            raise ValueError(f"need 0 <= beta <= alpha <= 1, got beta={self.beta} alpha={self.alpha}")
        if self.source not in ("theoretical", "plugin"):
            raise ValueError(f"unknown mass source {self.source!r}")

    @classmethod
    def theoretical(cls, alpha: float, beta: float = 0.0) -> "MassSpec":
        return cls(alpha, beta, "theoretical")

    @classmethod
    def plugin(cls, part: RegionPartition) -> "MassSpec":
        return cls(part.m / part.n, part.l / part.n, "plugin")


def partition(
    initial_scores: Sequence[float],
    new_in_explore: int,
    new_above: int,
    spec: RegionSpec,
) -> RegionPartition:
    """Count initial samples per region and attach new-sample counts.

    Samples exactly at a boundary belong to the upper region (a score at
    theta is admitted, hence disclosed).
    """
    scores = np.asarray(initial_scores, dtype=float)
    if scores.size == 0:
        raise ValueError("empty sample")
    if min(new_in_explore, new_above) < 0:
        raise ValueError("new-sample counts must be nonnegative")
    m = int(np.sum(scores < spec.theta))
    if spec.lb is None:
        if new_in_explore:
            raise ValueError("exploration samples require an exploration region")
        return RegionPartition(n=len(scores), m=m, k=new_above)
    l = int(np.sum(scores < spec.lb))
    return RegionPartition(n=len(scores), m=m, l=l, k1=new_in_explore, k2=new_above)


def _term(count: float, mass_th: float, mass_emp: float, eta: float, shift: float,
          lead: float = 2.0) -> tuple[float, bool]:
    """One region's contribution: (value, trivial flag).

    value = lead * exp(-2*count*(eta-shift)^2 / min(mass_th, mass_emp)^2)
    when the region is populated and eta exceeds the shift; degenerate
    and invalid regimes follow the module conventions.
    """
    denom = min(mass_th, mass_emp)
    if count <= 0 or denom <= 0.0:
        return (0.0, False) if max(mass_th, mass_emp) <= eta else (1.0, True)
    eff = eta - shift
    if eff <= 0.0:
        return (1.0, True)
    ratio = eff / denom          # squared afterward: safe for subnormal masses
    return (lead * math.exp(-2.0 * count * ratio * ratio), False)


def censored_term(part: RegionPartition, mass: MassSpec, eta: float,
                  lead: float = 2.0) -> BoundValue:
    """Censored-region error term of the two-region bound (constant in k)."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    frac = part.m / part.n
    value, trivial = _term(part.m, mass.alpha, frac, eta, abs(mass.alpha - frac), lead)
    return BoundValue(value, trivial=trivial)


def disclosed_term(part: RegionPartition, mass: MassSpec, eta: float,
                   lead: float = 2.0) -> BoundValue:
    """Disclosed-region error term; decreases with the new-sample count k."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    frac = part.m / part.n
    value, trivial = _term(
        part.n - part.m + part.k,
        1.0 - mass.alpha,
        (part.n - part.m) / part.n,
        eta,
        2.0 * abs(mass.alpha - frac),
        lead,
    )
    return BoundValue(value, trivial=trivial)


def bound_two_region(part: RegionPartition, mass: MassSpec, eta: float,
                     lead: float = 2.0) -> BoundValue:
    """Deviation bound for censored collection without exploration.

    Sum of the censored and disclosed terms; with theta below the whole
    domain (m = 0, alpha = 0) this reduces exactly to the classical bound
    with n + k IID samples.
    """
    if not part.two_region:
        raise ValueError("partition is not in two-region mode")
    c = censored_term(part, mass, eta, lead)
    d = disclosed_term(part, mass, eta, lead)
    return BoundValue(c.raw + d.raw, trivial=c.trivial or d.trivial)


def bound_two_region_apriori(part: RegionPartition, mass: MassSpec, eta: float,
                             wait: int, lead: float = 2.0,
                             pmf_floor: float = 1e-15) -> BoundValue:
    """Expected two-region bound after waiting for `wait` arrivals.

    The disclosed-region term is averaged over the binomial number of
    arrivals that land above theta (each lands there with probability
    1 - alpha).  Binomial weights are computed in log space; weights
    below ``pmf_floor`` are skipped.
    """
    if not part.two_region:
        raise ValueError("partition is not in two-region mode")
    if part.k:
        raise ValueError("expected-wait bound replaces k; pass a partition with k = 0")
    if wait < 0:
        raise ValueError("wait must be nonnegative")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    c = censored_term(part, mass, eta, lead)

    n, m = part.n, part.m
    frac = m / n
    mass_emp = (n - m) / n
    denom = min(1.0 - mass.alpha, mass_emp)
    eff = eta - 2.0 * abs(mass.alpha - frac)

    if wait == 0:
        d = disclosed_term(replace(part, k=0), mass, eta, lead)
        return BoundValue(c.raw + d.raw, trivial=c.trivial or d.trivial)

    p_disclosed = 1.0 - mass.alpha
    kk = np.arange(wait + 1)
    if p_disclosed <= 0.0:
        pmf = (kk == 0).astype(float)
    elif p_disclosed >= 1.0:
        pmf = (kk == wait).astype(float)
    else:
        log_pmf = (
            gammaln(wait + 1) - gammaln(kk + 1) - gammaln(wait - kk + 1)
            + kk * math.log(p_disclosed) + (wait - kk) * math.log(1.0 - p_disclosed)
        )
        pmf = np.exp(log_pmf)
    keep = pmf >= pmf_floor

    if denom <= 0.0:
        # Degenerate disclosed region: deterministic contribution per k.
        worst = max(1.0 - mass.alpha, mass_emp)
        expected = 0.0 if worst <= eta else float(np.sum(pmf[keep]))
        trivial = worst > eta
    elif eff <= 0.0:
        expected = float(np.sum(pmf[keep]))
        trivial = True
    else:
        ratio = eff / denom
        rate = 2.0 * ratio * ratio
        expected = float(np.sum(pmf[keep] * lead * np.exp(-rate * (n - m + kk[keep]))))
        trivial = False
    return BoundValue(c.raw + expected, trivial=c.trivial or trivial)


def bound_three_region(part: RegionPartition, mass: MassSpec, spec: RegionSpec,
                       eta: float, lead: float = 2.0) -> BoundValue:
    """Deviation bound for censored collection with bounded exploration.

    Three terms: the still-censored region below LB (constant), the
    exploration region [LB, theta) (vanishing as k1 grows), and the
    disclosed region (vanishing as k2 grows).  The estimator weight of
    the regions at and above LB is re-estimated from the arrival counts,
    with disclosed arrivals thinned by epsilon to stay comparable with
    the epsilon-thinned exploration arrivals.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    n, m, l, k1, k2 = part.n, part.m, part.l, part.k1, part.k2
    eps = spec.epsilon
    alpha, beta = mass.alpha, mass.beta

    l_frac = l / n
    u1 = abs(beta - l_frac)

    upper_total = (n - l) + k1 + eps * k2
    if upper_total > 0:
        explore_w = ((n - l) / n) * ((m - l + k1) / upper_total)
        disclosed_w = ((n - l) / n) * ((n - m + eps * k2) / upper_total)
    else:
        explore_w = 0.0
        disclosed_w = 0.0
    u2 = abs(alpha - beta - explore_w)
    u3 = abs(alpha - l_frac - explore_w)

    v1, t1 = _term(l, beta, l_frac, eta, u1, lead)
    v2, t2 = _term(m - l + k1, alpha - beta, explore_w, eta, u1 + u2, lead)
    v3, t3 = _term(n - m + k2, 1.0 - alpha, disclosed_w, eta, 2.0 * u3, lead)
    return BoundValue(v1 + v2 + v3, trivial=t1 or t2 or t3)


def eta_for_confidence(bound: Callable[[float], BoundValue], delta: float,
                       hi: float = 1.0, tol: float = 1e-9) -> Optional[float]:
    """Smallest eta with bound(eta).probability <= delta, or None.

    Bisection over [0, hi]; assumes the bound probability is nonincreasing
    in eta (it is 1 on the trivial plateau and strictly decreasing past
    it).  Returns None ("unreachable") when even eta = hi exceeds delta,
    which happens whenever delta lies below the constant censored-region
    floor of the bound.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if bound(hi).probability > delta:
        return None
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bound(mid).probability <= delta:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class MonotonicityReport:
    """Result of sweeping a bound along one parameter axis."""

    direction: str                     # "nondecreasing" or "nonincreasing"
    grid: tuple[float, ...]
    values: tuple[float, ...]
    ok: bool
    first_violation: Optional[tuple[int, float]]   # (index, signed slack breach)
    precondition_met: bool = True

    @staticmethod
    def from_values(direction: str, grid, values, slack: float = 1e-12,
                    precondition_met: bool = True) -> "MonotonicityReport":
        values = tuple(float(v) for v in values)
        sign = 1.0 if direction == "nondecreasing" else -1.0
        violation = None
        for i in range(1, len(values)):
            step = sign * (values[i] - values[i - 1])
            if step < -slack:
                violation = (i, step)
                break
        return MonotonicityReport(
            direction=direction,
            grid=tuple(float(g) for g in grid),
            values=values,
            ok=violation is None,
            first_violation=violation,
            precondition_met=precondition_met,
        )


def check_prop1(cdf, n: int, thetas: Sequence[float], c: float, eta: float,
                slack: float = 1e-12) -> MonotonicityReport:
    """Check that the two-region bound grows with the censored mass.

    The sweep removes estimation error by setting m = round(n * F(theta))
    and supplies k = round(c * (n - m)) new disclosed samples.  The growth
    factor c must satisfy c >= (n-m)*(eta-u)^2 / (m*(eta-2u)^2) - 1 at
    every grid point for the monotonicity claim to apply; the report
    flags whether it does.
    """
    values = []
    precondition = True
    for theta in thetas:
        alpha = float(cdf.cdf(theta))
        m = int(round(n * alpha))
        k = int(round(c * (n - m)))
        part = RegionPartition(n=n, m=m, k=k)
        mass = MassSpec.theoretical(alpha)
        u = abs(alpha - m / n)
        if m > 0 and eta > 2.0 * u:
            c_min = (n - m) * (eta - u) ** 2 / (m * (eta - 2.0 * u) ** 2) - 1.0
            precondition = precondition and (c >= c_min)
        values.append(bound_two_region(part, mass, eta).raw)
    return MonotonicityReport.from_values("nondecreasing", thetas, values, slack,
                                          precondition_met=precondition)


def check_prop2(part: RegionPartition, mass: MassSpec, spec: RegionSpec,
                eta: float, eps_grid: Sequence[float], k1_max: int,
                slack: float = 1e-12) -> MonotonicityReport:
    """Check that the three-region bound shrinks with exploration frequency.

    All inputs are held fixed except epsilon and the induced exploration
    count k1(eps) = round(eps * k1_max).
    """
    values = []
    for eps in eps_grid:
        p = replace(part, k1=int(round(eps * k1_max)))
        s = RegionSpec(theta=spec.theta, lb=spec.lb, epsilon=eps)
        values.append(bound_three_region(p, mass, s, eta).raw)
    return MonotonicityReport.from_values("nonincreasing", eps_grid, values, slack)
