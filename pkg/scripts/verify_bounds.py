#!/usr/bin/env python3
"""Run the Monte Carlo coverage suite at a configurable replication budget.

Usage: verify_bounds.py [replications] [seed]

Smaller budgets give a quick health check; the acceptance suite runs the
full budgets (1e5 CDF / 1e4 generalization).
"""
import sys

from cfbounds.censored import (
    MassSpec,
    RegionPartition,
    RegionSpec,
    bound_three_region,
    bound_two_region,
    eta_for_confidence,
)
from cfbounds.presets import bench_config, fig1_config, fig2_config
from cfbounds.verify import mc_cdf_deviation, mc_gen_gap


def main() -> int:
    replications = int(sys.argv[1]) if len(sys.argv) > 1 else 10_000
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
    failures = 0

    fig1 = fig1_config()
    part1 = RegionPartition(n=50, m=24)
    fig2 = fig2_config()
    part2 = RegionPartition(n=50, m=27, l=7)
    alpha = 0.5
    beta = float(fig2.population.cdf(6.0))
    for name, config, part, bound_fn in (
        ("fig1", fig1, part1,
         lambda e: bound_two_region(part1, MassSpec.theoretical(alpha), e)),
        ("fig2", fig2, part2,
         lambda e: bound_three_region(part2, MassSpec.theoretical(alpha, beta),
                                      RegionSpec(7.0, 6.0, 0.5), e)),
    ):
        for delta in (0.05, 0.1):
            eta = eta_for_confidence(bound_fn, delta)
            report = mc_cdf_deviation(config, eta, replications, seed, condition=part)
            print(f"cdf {name} delta={delta}: freq={report.frequency:.5f} "
                  f"bound={report.bound:.5f} verdict={report.verdict}")
            failures += not report.holds

    gen_reps = max(100, replications // 10)
    report = mc_gen_gap(bench_config(), gen_reps, seed, delta=0.05)
    print(f"gen bench: freq={report.frequency:.5f} bound={report.bound:.5f} "
          f"verdict={report.verdict}")
    failures += not report.holds
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
