"""Exploration cost models and the bound-improvement-minus-cost chooser.

Admitting an otherwise-rejected sample at score x costs exp((theta-x)/c):
cheap near the threshold, exponentially dearer further below it.  The
expected per-arrival cost of exploring [lb, theta) at frequency eps is

    C(lb, theta, eps) = eps * integral_lb^theta exp((theta-x)/c) f0(x) dx,

with f0 the density of the costly (label-0) population.  The optimizer
maximizes avg[B(theta) - B_e(lb, theta, eps)] - C over a grid, where the
bound improvement is evaluated with expected arrival counts plugged in.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .censored import MassSpec, RegionPartition, RegionSpec, bound_three_region, bound_two_region
from .stats import TheoreticalCdf

__all__ = [
    "CostModel",
    "MultiExplorePolicy",
    "BoundContext",
    "OptimizationResult",
    "cost_single",
    "cost_multi",
    "optimize_exploration",
]

_GL_PANEL_ORDER = 16
_MAX_NODES = 1 << 20


def _density(cdf, x):
    """Density of a theoretical CDF: analytic when available, else differenced."""
    if hasattr(cdf, "density"):
        return np.asarray(cdf.density(x), dtype=float)
    x = np.asarray(x, dtype=float)
    h = 1e-6 * max(1.0, float(np.max(np.abs(x))) if x.size else 1.0)
    return (np.asarray(cdf.cdf(x + h)) - np.asarray(cdf.cdf(x - h))) / (2.0 * h)


@dataclass(frozen=True)
class CostModel:
    """Cost-decay constant c > 0 and the costly population's distribution."""

    c: float
    f0: TheoreticalCdf

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"cost decay constant must be positive, got {self.c}")

    def density(self, x):
        return _density(self.f0, x)


@dataclass(frozen=True)
class MultiExplorePolicy:
    """Nested exploration subdomains below theta with per-subdomain rates.

    ``edges`` lists LB_b < ... < LB_1 (ascending); subdomain i spans
    [edges[i-1], edges[i]) with the last one ending at theta.  ``rates``
    gives the acceptance probability per subdomain, innermost (closest to
    theta) last.
    """

    edges: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.edges) != len(self.rates) or not self.edges:
            raise ValueError("need one rate per subdomain edge")
        if list(self.edges) != sorted(self.edges):
            raise ValueError("edges must be ascending")
        if any(not 0.0 <= r <= 1.0 for r in self.rates):
            raise ValueError("rates must lie in [0, 1]")


def _gl_adaptive(f, a: float, b: float, rel_tol: float = 1e-8) -> float:
    """Composite Gauss-Legendre with panel doubling to a relative tolerance."""
    if not a < b:
        return 0.0
    nodes0, weights0 = leggauss(_GL_PANEL_ORDER)
    panels = 1
    prev = None
    while panels * _GL_PANEL_ORDER <= _MAX_NODES:
        edges = np.linspace(a, b, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        xs = mid + half * nodes0[None, :]
        total = float(np.sum(half * weights0[None, :] * f(xs)))
        if prev is not None and abs(total - prev) <= rel_tol * max(abs(total), 1e-300):
            return total
        prev = total
        panels *= 2
    return prev


def _cost_integral(lo: float, hi: float, theta: float, model: CostModel) -> float:
    """Integral of exp((theta - x)/c) * f0(x) over [lo, hi)."""
    if not lo < hi:
        return 0.0
    integrand = lambda x: np.exp((theta - x) / model.c) * model.density(x)
    return _gl_adaptive(integrand, lo, hi)


def cost_single(lb: float, theta: float, epsilon: float, model: CostModel) -> float:
    """Expected exploration cost over [lb, theta) at frequency epsilon."""
    if lb > theta:
        raise ValueError(f"need lb <= theta, got lb={lb} theta={theta}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if epsilon == 0.0 or lb == theta:
        return 0.0
    return epsilon * _cost_integral(lb, theta, theta, model)


def cost_multi(policy: MultiExplorePolicy, theta: float, model: CostModel) -> float:
    """Summed per-subdomain exploration costs; edges must stay below theta.

    The cost decay always references the decision threshold, so splitting
    a range into subdomains changes only the acceptance rates applied to
    each piece.
    """
    if policy.edges[-1] > theta:
        raise ValueError("subdomain edges must not exceed theta")
    uppers = list(policy.edges[1:]) + [theta]
    total = 0.0
    for lo, hi, eps in zip(policy.edges, uppers, policy.rates):
        if eps:
            total += eps * _cost_integral(lo, hi, theta, model)
    return total


@dataclass(frozen=True)
class BoundContext:
    """Everything the optimizer needs to evaluate bound improvement.

    Counts are plugged in as expectations over the arrival process:
    k = T*(1-alpha) disclosed samples for the no-exploration bound,
    k1 = eps*T*(alpha-beta) and k2 = T*(1-alpha) for the exploration
    bound.  The initial partition is either exact-mass (m = round(n*F(t)))
    or realized from supplied initial samples, averaged over the supplied
    ensemble.
    """

    population: TheoreticalCdf
    n: int
    theta: float
    eta: float
    arrivals: int
    initial_samples: Optional[tuple[np.ndarray, ...]] = None

    def _partitions(self, lb: float) -> list[tuple[int, int]]:
        alpha = float(self.population.cdf(self.theta))
        beta = float(self.population.cdf(lb))
        if self.initial_samples is None:
            return [(int(round(self.n * alpha)), int(round(self.n * beta)))]
        return [(int(np.sum(x < self.theta)), int(np.sum(x < lb)))
                for x in self.initial_samples]

    def improvement(self, lb: float, epsilon: float) -> float:
        """avg over the ensemble of B(theta) - B_e(lb, theta, epsilon)."""
        alpha = float(self.population.cdf(self.theta))
        beta = float(self.population.cdf(lb))
        T = self.arrivals
        k = int(round(T * (1.0 - alpha)))
        k1 = int(round(epsilon * T * (alpha - beta)))
        k2 = k
        diffs = []
        for m, l in self._partitions(lb):
            base = bound_two_region(RegionPartition(n=self.n, m=m, k=k),
                                    MassSpec.theoretical(alpha), self.eta)
            expl = bound_three_region(
                RegionPartition(n=self.n, m=m, l=l, k1=k1, k2=k2),
                MassSpec.theoretical(alpha, beta),
                RegionSpec(self.theta, lb if lb < self.theta else None, epsilon),
                self.eta,
            )
            diffs.append(base.probability - expl.probability)
        return float(np.mean(diffs))


@dataclass(frozen=True)
class OptimizationResult:
    lb: float
    epsilon: float
    objective: float
    grid_lb: tuple[float, ...]
    grid_eps: tuple[float, ...]
    objective_grid: np.ndarray      # shape (len(grid_lb), len(grid_eps))


def default_eps_grid(step: float = 0.0025) -> np.ndarray:
    return np.round(np.arange(0.0, 1.0 + step / 2, step), 10)


def default_lb_grid(population, count: int = 50) -> np.ndarray:
    """Percentile-based exploration lower bounds (1st through 50th)."""
    qs = np.linspace(0.01, 0.50, count)
    return np.asarray(population.inverse(qs), dtype=float)


def optimize_exploration(ctx: BoundContext, model: CostModel,
                         lb_grid: Sequence[float],
                         eps_grid: Sequence[float]) -> OptimizationResult:
    """Grid-maximize (bound improvement) - (exploration cost).

    Exhaustive evaluation; ties break toward smaller epsilon, then larger
    lb (the cheaper policy).
    """
    lb_grid = np.asarray(list(lb_grid), dtype=float)
    eps_grid = np.asarray(list(eps_grid), dtype=float)
    if lb_grid.size == 0 or eps_grid.size == 0:
        raise ValueError("grids must be nonempty")
    obj = np.empty((len(lb_grid), len(eps_grid)))
    for i, lb in enumerate(lb_grid):
        cost_full = cost_single(min(lb, ctx.theta), ctx.theta, 1.0, model)
        for j, eps in enumerate(eps_grid):
            obj[i, j] = ctx.improvement(lb, eps) - eps * cost_full
    # scan in preference order (eps ascending, lb descending) so the first
    # point attaining the maximum is the cheapest policy among ties
    best = (len(lb_grid) - 1, 0)
    for j in range(len(eps_grid)):
        for i in range(len(lb_grid) - 1, -1, -1):
            if obj[i, j] > obj[best]:
                best = (i, j)
    i, j = best
    return OptimizationResult(
        lb=float(lb_grid[i]),
        epsilon=float(eps_grid[j]),
        objective=float(obj[i, j]),
        grid_lb=tuple(float(v) for v in lb_grid),
        grid_eps=tuple(float(v) for v in eps_grid),
        objective_grid=obj,
    )
