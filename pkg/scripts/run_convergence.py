#!/usr/bin/env python3
"""Reproduce the cost-vs-samples convergence study at desk scale.

Runs seeded benchmark trials for the configured planners on the bundled
scenarios, persists the raw rows, and renders the median-cost chart with
the known optimum as reference.

    python scripts/run_convergence.py --outdir out/convergence
    python scripts/run_convergence.py --trials 20 --workers 2   # full run
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from aoplan import (  # noqa: E402
    RunSpec,
    convergence_report,
    rows_to_csv,
    run_benchmark,
    summary_to_csv,
)

STUDIES = [
    ("empty_square", "prm-star", {}, (500, 1000, 2000, 4000)),
    ("empty_square", "k-prm-star", {}, (500, 1000, 2000, 4000)),
    ("empty_square", "rrt-star", {}, (500, 1000, 2000, 4000)),
    ("box_square", "rrt-star", {}, (1000, 2000, 4000, 8000)),
    ("kino_square", "sst", {}, (2500, 5000, 10000, 20000)),
    ("kino_square", "ao-rrt", {}, (7500, 15000, 30000)),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out/convergence")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--only", help="restrict to one scenario name")
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for scenario_name, planner, params, checkpoints in STUDIES:
        if args.only and args.only != scenario_name:
            continue
        scenario_path = REPO / "scenarios" / f"{scenario_name}.json"
        spec = RunSpec(
            scenario_path=str(scenario_path), planner=planner, params=params,
            trials=args.trials, base_seed=args.seed, checkpoints=checkpoints,
        )
        rows = run_benchmark(spec, workers=args.workers)
        import json

        optimal = json.loads(scenario_path.read_text()).get("optimal_cost")
        report, svg = convergence_report(rows, optimal_cost=optimal)
        stem = f"{scenario_name}__{planner}"
        (outdir / f"{stem}.csv").write_text(rows_to_csv(rows))
        (outdir / f"{stem}.svg").write_text(svg)
        (outdir / f"{stem}_summary.csv").write_text(summary_to_csv(report))
        final = report[-1]
        rel = "n/a" if final.rel_err is None else f"{100 * final.rel_err:+.2f}%"
        print(f"{stem}: success {100 * final.success_rate:.0f}%  "
              f"median {final.median_cost}  rel_err {rel}")
    print(f"artifacts in {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
