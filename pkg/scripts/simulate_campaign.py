"""Run the simulated monitoring campaign over many seeds and summarise how
the moving variance of alpha drops after the interventions.

    python scripts/simulate_campaign.py --seeds 50
    python scripts/simulate_campaign.py --seeds 50 --json results.json
"""

import argparse
import json
import statistics
import time

from tagquality.monitoring import run_monitoring
from tagquality.simulation import campaign_config, simulate_study


def run(seed, **kwargs):
    config = campaign_config(seed=seed, **kwargs)
    series = run_monitoring(simulate_study(config), config.scale)
    var = [v for _, v in series.moving_variance]
    return {
        "seed": seed,
        "alphas": [p.alpha for p in series.points],
        "first_variance": var[0],
        "final_variance": var[-1],
        "converged_at": series.convergence.index if series.convergence.converged else None,
        "burnin_at": series.burnin.index if series.burnin.complete else None,
    }


def main():
    p = argparse.ArgumentParser(description="simulated monitoring campaign")
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--base-error", type=float, default=0.15)
    p.add_argument("--multiplier", type=float, default=0.5)
    p.add_argument("--json", default=None, help="write per-seed results here")
    args = p.parse_args()

    t0 = time.perf_counter()
    interventions = ((3, args.multiplier), (11, args.multiplier))
    results = [run(s, base_error=args.base_error, interventions=interventions) for s in range(args.seeds)]
    first = [r["first_variance"] for r in results]
    final = [r["final_variance"] for r in results]
    dropped = sum(f < a for a, f in zip(first, final))
    converged = [r["converged_at"] for r in results if r["converged_at"] is not None]

    print(f"seeds: {args.seeds}  ({time.perf_counter() - t0:.1f} s)")
    print(f"median first variance: {statistics.median(first):.5f}")
    print(f"median final variance: {statistics.median(final):.5f}")
    print(f"ratio of medians:      {statistics.median(final) / statistics.median(first):.3f}")
    print(f"final < first:         {dropped}/{args.seeds}")
    print(f"converged:             {len(converged)}/{args.seeds}", end="")
    print(f"  (median index {statistics.median(converged)})" if converged else "")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
