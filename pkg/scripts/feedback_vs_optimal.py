#!/usr/bin/env python3
"""Interception time of the feedback law vs the shot geodesic course.

The constant-bearing feedback law holds the sight line fixed; the optimal
course is the zero-lead geodesic found by shooting.  For a straight-flying
target both arrive, but the geodesic is faster whenever theta0 != 0.  The
gap grows with the aspect angle; this script tabulates it.
"""

import argparse
import math
import sys
from pathlib import Path

from parnav import (
    InfeasibleControlError,
    Scenario,
    UnreachableError,
    optimal_trajectory,
    simulate,
)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--range0", type=float, default=1000.0)
    ap.add_argument("--target-speed", type=float, default=100.0)
    ap.add_argument("--ratio", type=float, default=2.0)
    ap.add_argument(
        "--thetas-deg", type=float, nargs="+", default=[0.0, 20.0, 40.0, 60.0, 90.0, 120.0]
    )
    ap.add_argument("--out", type=Path, default=Path("results/feedback_vs_optimal.csv"))
    args = ap.parse_args(argv)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    rows = ["theta0_deg,t_f_feedback,t_f_optimal,advantage"]
    for deg in args.thetas_deg:
        scenario = Scenario.nonmaneuvering(
            args.range0, args.target_speed, math.radians(deg), ratio=args.ratio
        )
        try:
            t_fb = simulate(scenario).t_f
            t_opt = float(optimal_trajectory(scenario).times[-1])
        except (InfeasibleControlError, UnreachableError) as exc:
            print(f"theta0={deg:7.1f}: {type(exc).__name__}: {exc}")
            rows.append(f"{deg!r},nan,nan,nan")
            continue
        advantage = t_fb - t_opt
        print(
            f"theta0={deg:7.1f}: feedback {t_fb:9.5f}  optimal {t_opt:9.5f}"
            f"  advantage {advantage:+.5f}"
        )
        rows.append(f"{deg!r},{t_fb!r},{t_opt!r},{advantage!r}")
    args.out.write_text("\n".join(rows) + "\n")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
