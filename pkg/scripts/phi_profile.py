"""Tabulate phi(x) and 4 - phi(x) on a log grid; phi tends to 4 like 4 + 2/x."""

import argparse
import dataclasses

from cmdeg_kit import cmdeg


@dataclasses.dataclass(frozen=True)
class Config:
    lo: float = 1e-2
    hi: float = 1e6
    points: int = 25


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for f in dataclasses.fields(Config):
        ap.add_argument(f"--{f.name}", type=type(f.default), default=f.default)
    cfg = Config(**vars(ap.parse_args()))
    print(f"{'x':>12} {'phi(x)':>20} {'x (phi - 4)':>14}")
    for x in cmdeg.log_grid(cfg.lo, cfg.hi, cfg.points):
        p = cmdeg.phi(float(x))
        print(f"{x:12.5g} {p:20.15f} {x * (p - 4):14.8f}")


if __name__ == "__main__":
    main()
