"""Locate the sign change of theta(t) and compare it with the series built from Q(k).

theta is negative on (0, 6.4) and positive beyond, while the Q(k) series
has only positive coefficients; the script prints both side by side.
"""

import argparse
import dataclasses

import numpy as np
from scipy import optimize

from cmdeg_kit import series


@dataclasses.dataclass(frozen=True)
class Config:
    t_max: float = 12.0
    points: int = 13


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-max", dest="t_max", type=float, default=Config.t_max)
    ap.add_argument("--points", type=int, default=Config.points)
    cfg = Config(**vars(ap.parse_args()))
    print(f"{'t':>6} {'theta(t)':>16} {'Q-series/6':>16}")
    for t in np.linspace(0.5, cfg.t_max, cfg.points):
        print(f"{t:6.2f} {series.theta(t):16.6g} {series.q_series(t, 120):16.6g}")
    root = optimize.brentq(series.theta, 1.0, cfg.t_max)
    print(f"theta changes sign at t = {root:.10f}")


if __name__ == "__main__":
    main()
