"""Degree brackets of h_lambda and -h_mu over a small (lambda, mu) table.

Exploratory: brackets come from finite-order sign tests on a finite grid.
"""

import argparse
import dataclasses

from cmdeg_kit import inequalities


@dataclasses.dataclass(frozen=True)
class Config:
    lambdas: tuple = (-2.0, -1.0, 0.0)
    mus: tuple = (4.0, 5.0, 6.0)
    tol: float = 0.1
    order: int = 6


def fmt(est):
    return "none" if est is None else f"[{est.lo:.4f}, {est.hi:.4f}]"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=float, nargs="+", default=Config.lambdas)
    ap.add_argument("--mus", type=float, nargs="+", default=Config.mus)
    ap.add_argument("--tol", type=float, default=Config.tol)
    ap.add_argument("--order", type=int, default=Config.order)
    a = ap.parse_args()
    cfg = Config(tuple(a.lambdas), tuple(a.mus), a.tol, a.order)
    print(f"{'lambda':>7} {'mu':>5} {'deg h_lambda':>20} {'deg -h_mu':>20}  regime")
    for lam, mu in zip(cfg.lambdas, cfg.mus):
        p = inequalities.conjecture_probe(lam, mu, tol=cfg.tol, K=cfg.order)
        print(f"{lam:7g} {mu:5g} {fmt(p.h_lambda):>20} {fmt(p.neg_h_mu):>20}  {p.regime}")
        for e in p.errors:
            print(f"        {e}")


if __name__ == "__main__":
    main()
