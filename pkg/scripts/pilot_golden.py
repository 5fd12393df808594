"""Regenerate tests/golden/shifted_u3_n6.json from a pilot run.

The pilot uses master seed 1000, whose per-trial streams (1000 XOR i for
i < 500 lands in 512..1023) never meet those of the acceptance run (seed 0).
"""

from __future__ import annotations

import argparse
import json
import math
from pathlib import Path

from hiddenshift.experiment import ExperimentConfig, run

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden" / "shifted_u3_n6.json"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=1000)
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--out", type=Path, default=GOLDEN)
    args = parser.parse_args()

    cfg = ExperimentConfig(
        "shifted-u3", n=6, trials=args.trials, seed=args.seed, delta_f=0.01, delta_g=0.01
    )
    agg = run(cfg)["aggregates"]
    rate = agg["success_rate"]
    sigma = math.sqrt(rate * (1 - rate) / args.trials)
    golden = {
        "n": 6,
        "delta": 0.01,
        "pilot_seed": args.seed,
        "pilot_trials": args.trials,
        "pilot_rate": rate,
        "pilot_sigma": sigma,
        "threshold": max(0.0, rate - 3 * sigma),
    }
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n")
    print(json.dumps(golden, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
