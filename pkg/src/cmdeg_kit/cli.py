"""``cmdeg-kit``: evaluation, verification suites, degree estimation and reports.

Exit codes: 0 success or pass, 1 a fail verdict, 2 a usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import acceptance, catalog, cmdeg, inequalities, kernel, polygamma, series, strongcm
from ._parallel import thread_count
from .context import (BracketError, CatalogError, DomainError, EvalContext, QuadratureError)

SCHEMA = 1

# per-command grid defaults: (min, max, points)
GRIDS = {
    "cm": (0.01, 100.0, 400),
    "bounds": (0.01, 100.0, 400),
    "strongcm": (0.01, 100.0, 400),
    "chain": (1e-3, 30.0, 200),
    "degree": (0.01, 1e6, 400),
    "conjecture": (1e-4, 1e6, 400),
    "kernel": (0.1, 10.0, 20),
}

DEFAULTS = {
    "format": "json", "scale": "log", "order": None, "alpha": 4.0, "lo": 0.0, "hi": 8.0,
    "tol": 0.1, "kmin": 5, "kmax": 12, "lam": 0.0, "mu": 4.0, "param": None, "n": 1,
    "laplace_tol": 1e-6, "fn": "Psi",
}
ORDER_DEFAULTS = {"cm": cmdeg.DEFAULT_ORDER, "strongcm": 8, "degree": 6, "conjecture": 6,
                  "eval": 0}
CTX_KEYS = ("quad_rel_tol", "horizon", "shift_threshold")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser, grid: bool = False):
    p.add_argument("--format", choices=("json", "csv", "text"), help="output format (json)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--quad-rel-tol", dest="quad_rel_tol", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--shift-threshold", dest="shift_threshold", type=float)
    if grid:
        p.add_argument("--grid-min", dest="grid_min", type=float)
        p.add_argument("--grid-max", dest="grid_max", type=float)
        p.add_argument("--points", type=int)
        p.add_argument("--scale", choices=("log", "linear"))


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="cmdeg-kit", description=(
        "Numerical checks around Psi(x) = psi'(x)^2 + psi''(x) and its completely "
        "monotonic degree."))
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate Psi, phi, a polygamma or a catalog function")
    p.add_argument("--fn", required=True,
                   help="Psi, phi, polygamma, or a catalog id (h_lambda, neg_h_mu, power, ...)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--alpha", type=float, help="multiply by x^alpha")
    p.add_argument("--param", type=float, help="parameter of power/h_lambda/neg_h_mu")
    p.add_argument("--n", type=int, help="polygamma order")
    p.add_argument("--order", type=int, help="also report derivatives up to this order")
    _common(p)

    p = sub.add_parser("kernel", help="dump sigma, its derivatives, q'''' and log-concavity")
    p.add_argument("--t", type=float, nargs="+", help="explicit t values (else a grid)")
    _common(p, grid=True)

    p = sub.add_parser("series", help="exact Q(k) table")
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)
    _common(p)

    verify = sub.add_parser("verify", help="verification suites")
    vsub = verify.add_subparsers(dest="suite", required=True, parser_class=_Parser)

    p = vsub.add_parser("cm", help="sign test of (-1)^k d^k [x^alpha f]")
    p.add_argument("--fn", help="catalog id (Psi)")
    p.add_argument("--param", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--order", type=int)
    _common(p, grid=True)

    p = vsub.add_parser("bounds", help="sandwich bounds, or the (mu, nu) double inequality")
    p.add_argument("--mu", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--scan", action="store_true",
                   help="with --mu/--nu: scan [1e-3, 1e6] and refine witnesses")
    _common(p, grid=True)

    p = vsub.add_parser("strongcm", help="strong CM of f against CM of x f")
    p.add_argument("--fn", required=True)
    p.add_argument("--param", type=float)
    p.add_argument("--order", type=int)
    _common(p, grid=True)

    p = vsub.add_parser("laplace", help="x^4 Psi(x) against 1/12 + Laplace transform of q''''")
    p.add_argument("--x", type=float, nargs="+", default=None)
    p.add_argument("--laplace-tol", dest="laplace_tol", type=float)
    _common(p)

    p = vsub.add_parser("chain", help="h-chain, log-concavity, q'''' > 0, convolution bounds")
    _common(p, grid=True)

    p = sub.add_parser("degree", help="bisect the CM degree of a catalog function")
    p.add_argument("--fn", help="catalog id (Psi)")
    p.add_argument("--param", type=float)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--order", type=int)
    _common(p, grid=True)

    probe = sub.add_parser("probe", help="exploratory probes")
    psub = probe.add_subparsers(dest="probe", required=True, parser_class=_Parser)
    p = psub.add_parser("conjecture", help="degree brackets of h_lambda and -h_mu")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--order", type=int)
    _common(p, grid=True)

    p = sub.add_parser("report", help="run the acceptance suite")
    _common(p)
    return top


def _parser_for(top, args):
    # the leaf parser, used to type config values
    actions = {}
    path = [args.command, getattr(args, "suite", None) or getattr(args, "probe", None)]
    parser = top
    for name in path:
        if name is None:
            break
        for a in parser._actions:
            if isinstance(a, argparse._SubParsersAction) and name in a.choices:
                parser = a.choices[name]
                break
    for a in parser._actions:
        if a.dest not in ("help",) and a.option_strings:
            actions[a.dest] = a
    return actions


def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for i, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(top, args):
    if not args.config:
        return
    actions = _parser_for(top, args)
    for key, raw in read_config(args.config).items():
        if key in ("config", "out") or key not in actions:
            raise UsageError(f"unknown config key {key!r} for this command")
        if getattr(args, key) is not None and getattr(args, key) is not False:
            continue  # flag wins
        act = actions[key]
        try:
            if act.nargs == "+":
                val = [act.type(x) for x in raw.split()]
            elif isinstance(act, argparse._StoreTrueAction):
                val = raw.lower() in ("1", "true", "yes")
            else:
                val = act.type(raw) if act.type else raw
        except ValueError:
            raise UsageError(f"bad value for config key {key!r}: {raw!r}") from None
        if act.choices and val not in act.choices:
            raise UsageError(f"bad value for config key {key!r}: {raw!r}")
        setattr(args, key, val)


def _get(args, name, default=None):
    v = getattr(args, name, None)
    if v is not None:
        return v
    if default is not None:
        return default
    return DEFAULTS.get(name)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    options: tuple
    grid: dict | None
    ctx: EvalContext

    def to_dict(self) -> dict:
        d = {"command": self.command, **dict(self.options)}
        if self.grid is not None:
            d["grid"] = self.grid
        d["ctx"] = {k: getattr(self.ctx, k) for k in CTX_KEYS}
        return d


def _ctx(args) -> EvalContext:
    kw = {k: getattr(args, k) for k in CTX_KEYS if getattr(args, k, None) is not None}
    try:
        return EvalContext(**kw)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _grid(args, key):
    lo, hi, n = GRIDS[key]
    lo = _get(args, "grid_min", lo)
    hi = _get(args, "grid_max", hi)
    n = _get(args, "points", n)
    scale = _get(args, "scale")
    if not (lo > 0 and math.isfinite(hi) and hi > lo):
        raise UsageError("grid needs 0 < grid-min < grid-max")
    if n < 2:
        raise UsageError("grid needs at least 2 points")
    xs = np.geomspace(lo, hi, n) if scale == "log" else np.linspace(lo, hi, n)
    return xs, {"min": lo, "max": hi, "points": n, "scale": scale}


def _fn(args):
    fid = _get(args, "fn")
    try:
        return catalog.get(fid, getattr(args, "param", None))
    except CatalogError as exc:
        raise UsageError(str(exc)) from None


def _order(args, key):
    K = _get(args, "order", ORDER_DEFAULTS[key])
    if not 0 <= K <= catalog.MAX_ORDER:
        raise UsageError(f"--order must be in 0..{catalog.MAX_ORDER}")
    return K


def _clean(obj):
    # JSON-safe, deterministic: non-finite floats become strings
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _text(d, indent=0) -> str:
    lines = []
    pad = "  " * indent
    for k, v in d.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}: ({len(v)})")
            for item in v:
                lines.append(f"{pad}  - " + ", ".join(f"{a}={b}" for a, b in item.items()))
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(line for line in lines if line)


@dataclasses.dataclass
class Result:
    body: dict
    csv: str
    failed: bool


def _cmd_eval(args, ctx):
    x = args.x
    if not x > 0:
        raise UsageError("--x must be positive")
    K = _order(args, "eval")
    alpha = args.alpha
    fid = args.fn
    body = {"function": fid, "x": x}
    if fid == "polygamma":
        n = _get(args, "n")
        val = polygamma.polygamma(n, x, ctx)
        body["n"] = n
        derivs = [val]
    elif fid == "phi":
        val = cmdeg.phi(x, ctx)
        derivs = [val]
    else:
        fn = _fn(args)
        body["function"] = fn.id
        a = 0.0 if alpha is None else alpha
        derivs = [float(v) for v in fn.scaled_derivatives(x, K, a, ctx)[0]]
        if fn.id == "Psi" and alpha is None:
            derivs[0] = cmdeg.psi_capital(x, ctx)
        val = derivs[0]
        if alpha is not None:
            body["alpha"] = alpha
    body["value"] = val
    if K and len(derivs) > 1:
        body["derivatives"] = derivs
    rows = [(k, d) for k, d in enumerate(derivs)]
    return Result(body, _rows_csv(["k", "value"], rows), False)


def _cmd_kernel(args, ctx):
    if args.t:
        ts, grid = [float(t) for t in args.t], None
    else:
        ts, grid = _grid(args, "kernel")
    samples = [kernel.kernel_sample(float(t), ctx) for t in ts]
    rows = [{"t": s.t, "sigma": s.sigma, "dsigma": list(s.dsigma), "q4": s.q4,
             "log_concavity": s.logconc} for s in samples]
    body = {"samples": rows}
    if grid:
        body["grid"] = grid
    csv_rows = [(s.t, s.sigma, *s.dsigma, s.q4, s.logconc) for s in samples]
    return Result(body, _rows_csv(["t", "sigma", "sigma1", "sigma2", "sigma3", "sigma4",
                                   "q4", "log_concavity"], csv_rows), False)


def _cmd_series(args, ctx):
    kmin, kmax = _get(args, "kmin"), _get(args, "kmax")
    try:
        table = series.q_positivity(kmax, kmin)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    body = table.to_dict()
    body["verdict"] = "pass" if table.all_positive else "fail"
    return Result(body, table.to_csv(), not table.all_positive)


def _cmd_cm(args, ctx):
    xs, grid = _grid(args, "cm")
    K = _order(args, "cm")
    if K < 1:
        raise UsageError("--order must be >= 1")
    rep = cmdeg.cm_check(_fn(args), _get(args, "alpha"), K, xs, ctx)
    body = rep.to_dict()
    body["grid"]["scale"] = grid["scale"]
    return Result(body, rep.to_csv(), not rep.passed)


def _cmd_bounds(args, ctx):
    mu, nu = args.mu, args.nu
    if (mu is None) != (nu is None):
        raise UsageError("--mu and --nu go together")
    if mu is None:
        if args.scan:
            raise UsageError("--scan needs --mu and --nu")
        xs, _ = _grid(args, "bounds")
        rep = inequalities.sandwich_check(xs, ctx)
    elif args.scan:
        rep = inequalities.locate_double_violation(mu, nu, ctx)
    else:
        xs, _ = _grid(args, "bounds")
        rep = inequalities.double_inequality_check(mu, nu, xs, ctx)
    return Result(rep.to_dict(), rep.to_csv(), not rep.passed)


def _cmd_strongcm(args, ctx):
    xs, grid = _grid(args, "strongcm")
    K = _order(args, "strongcm")
    if K + 1 > catalog.MAX_ORDER:
        raise UsageError(f"--order must be <= {catalog.MAX_ORDER - 1}")
    eq = strongcm.equivalence_test(_fn(args), K, xs, ctx)
    body = eq.to_dict()
    body["verdict"] = eq.strong_verdict
    body["grid"] = grid
    body["strong"] = eq.strong.to_dict()
    body["xcm"] = eq.xcm.to_dict()
    csv_text = eq.strong.to_csv() + eq.xcm.to_csv().split("\n", 1)[1]
    return Result(body, csv_text, not (eq.strong.passed and eq.agree))


def _cmd_laplace(args, ctx):
    xs = args.x or [1.0, 2.0, 5.0]
    if any(not x > 0 for x in xs):
        raise UsageError("--x values must be positive")
    tol = _get(args, "laplace_tol")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        checks = [cmdeg.laplace_identity_check(float(x), ctx) for x in xs]
    ok = all(c.rel_err <= tol for c in checks)
    body = {"tolerance": tol, "verdict": "pass" if ok else "fail",
            "checks": [c.to_dict() for c in checks],
            "warnings": [str(w.message) for w in caught]}
    rows = [(c.x, c.lhs, c.rhs, c.rel_err, c.horizon) for c in checks]
    return Result(body, _rows_csv(["x", "lhs", "rhs", "rel_err", "horizon"], rows), not ok)


def _cmd_chain(args, ctx):
    xs, grid = _grid(args, "chain")
    rep = kernel.positivity_chain_check(xs, ctx)
    body = rep.to_dict()
    body["grid"] = grid
    rows = [(q, x, v) for q, x, v in rep.failures]
    return Result(body, _rows_csv(["quantity", "x", "value"], rows), not rep.passed)


def _cmd_degree(args, ctx):
    xs, grid = _grid(args, "degree")
    K = _order(args, "degree")
    fn = _fn(args)
    lo, hi, tol = _get(args, "lo"), _get(args, "hi"), _get(args, "tol")
    try:
        est = cmdeg.degree_estimate(fn, lo, hi, tol, K, xs, ctx)
    except (BracketError, RuntimeError) as exc:
        body = {"function": fn.id, "verdict": "fail", "error": str(exc), "grid": grid}
        return Result(body, _rows_csv(["function", "error"], [(fn.id, str(exc))]), True)
    body = est.to_dict()
    body["grid"]["scale"] = grid["scale"]
    body["verdict"] = "pass"
    return Result(body, est.to_csv(), False)


def _cmd_conjecture(args, ctx):
    xs, grid = _grid(args, "conjecture")
    K = _order(args, "conjecture")
    pr = inequalities.conjecture_probe(_get(args, "lam"), _get(args, "mu"), ctx,
                                       lo=_get(args, "lo"), hi=_get(args, "hi"),
                                       tol=_get(args, "tol"), K=K, grid=xs)
    body = pr.to_dict()
    body["exploratory"] = True
    rows = []
    for est in (pr.h_lambda, pr.neg_h_mu):
        if est is not None:
            rows.append((est.function, est.lo, est.hi, est.order))
    return Result(body, _rows_csv(["function", "lo", "hi", "order"], rows), False)


def _cmd_report(args, ctx):
    crits = acceptance.run(ctx)
    body = {"criteria": [c.to_dict() for c in crits],
            "passed": sum(c.passed for c in crits), "total": len(crits)}
    rows = [(c.number, c.title, c.verdict) for c in crits]
    return Result(body, _rows_csv(["criterion", "title", "verdict"], rows),
                  not all(c.passed for c in crits))


def _dispatch(args):
    if args.command == "verify":
        return {"cm": _cmd_cm, "bounds": _cmd_bounds, "strongcm": _cmd_strongcm,
                "laplace": _cmd_laplace, "chain": _cmd_chain}[args.suite]
    if args.command == "probe":
        return _cmd_conjecture
    return {"eval": _cmd_eval, "kernel": _cmd_kernel, "series": _cmd_series,
            "degree": _cmd_degree, "report": _cmd_report}[args.command]


def _command_name(args) -> str:
    sub = getattr(args, "suite", None) or getattr(args, "probe", None)
    return f"{args.command} {sub}" if sub else args.command


def _options(args) -> tuple:
    skip = {"command", "suite", "probe", "out", "config", "format", "grid_min", "grid_max",
            "points", "scale", *CTX_KEYS}
    return tuple(sorted((k, v) for k, v in vars(args).items()
                        if k not in skip and v is not None and v is not False))


def run(argv=None) -> int:
    top = build_parser()
    try:
        args = top.parse_args(argv)
        _apply_config(top, args)
        thread_count()
        ctx = _ctx(args)
        res = _dispatch(args)(args, ctx)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except ValueError as exc:  # e.g. a malformed CMDEG_KIT_THREADS
        print(f"cmdeg-kit: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, OverflowError, QuadratureError) as exc:
        res = Result({"verdict": "fail", "error": f"{type(exc).__name__}: {exc}"},
                     _rows_csv(["error"], [(str(exc),)]), True)
    cfg = RunConfig(_command_name(args), _options(args), None, ctx)
    fmt = _get(args, "format")
    if fmt == "csv":
        text = res.csv
    else:
        doc = {"schema": SCHEMA, "config": cfg.to_dict(), **res.body}
        doc = _clean(doc)
        text = (json.dumps(doc, indent=2) + "\n" if fmt == "json" else _text(doc) + "\n")
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cmdeg-kit: cannot write {args.out!r}: {exc.strerror}", file=sys.stderr)
            return 2
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); not an error of ours
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
    return 1 if res.failed else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
