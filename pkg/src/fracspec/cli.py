"""``fracspec`` command line: convergence, condition, mfet and solve sweeps.

Every command reads an optional JSON config; flags override its top-level
keys. Results are CSV (header row, comma separated, LF line endings, reals
with 17 significant digits) written to ``--out`` or standard output.

Config keys::

    command           convergence | condition | mfet | solve
    scheme            list of 1, 2, 3
    alpha             list of orders in (0,1) or (1,2)
    N                 list of strictly increasing resolutions
    problem           catalog label (see fracspec.problems.CATALOG)
    out               output path
    p_bar, q_bar, d_bar, rhs
                      inline problem for ``solve`` and coefficients for
                      ``condition``; ``rhs`` is a number or {"poly": [c0, c1, ...]}
    d                 drift values for ``mfet``; "cos" means cos(pi alpha/2)
    points            sample count for ``mfet`` and ``solve`` (default 201)
    quadrature_slack  load quadrature points beyond N (default 32)

Exit codes: 0 success, 2 usage or config error, 3 numerical failure.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import io
import json
import math
import os
import sys

import numpy as np

from .assembly import LOAD_SLACK, SchemeId
from .errors import AssemblyError, FracspecError, SingularityError, SolverError
from .fraccalc import Source, _Polynomial
from .numerics import condition_number, fit_growth, fit_rate, problem_error, solve_problem
from .problems import CATALOG, ProblemSpec, catalog_problem, mfet_problem

COMMANDS = ("convergence", "condition", "mfet", "solve")
DEFAULT_N = (8, 12, 16, 24, 32, 48, 64)
DEFAULT_ALPHA = (0.2, 0.7, 1.3, 1.8)
DEFAULT_POINTS = 201
EXIT_USAGE = 2
EXIT_NUMERIC = 3

HEADERS = {
    "convergence": ("scheme", "alpha", "N", "l2_error", "boundary_residual", "fitted_rate"),
    "condition": ("scheme", "alpha", "N", "kappa2", "growth_exponent"),
    "mfet": ("alpha", "d", "x", "u"),
    "solve": ("x", "u"),
}


class ConfigError(FracspecError, ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    scheme: tuple = (1, 2, 3)
    alpha: tuple = DEFAULT_ALPHA
    N: tuple = DEFAULT_N
    problem: str = None
    out: str = None
    p_bar: float = 0.5
    q_bar: float = 0.5
    d_bar: float = 1.0
    rhs: object = None
    d: tuple = (0.0,)
    points: int = DEFAULT_POINTS
    quadrature_slack: int = LOAD_SLACK


# --------------------------------------------------------------------------
# config parsing

def _as_list(key, value):
    if isinstance(value, (list, tuple)):
        if not value:
            raise ConfigError(f"{key}: must not be empty")
        return list(value)
    return [value]


def _real(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key}: expected a finite number, got {v!r}")
    return float(v)


def _int(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    return int(v)


def _alphas(value):
    out = []
    for v in _as_list("alpha", value):
        a = _real("alpha", v)
        if not 0.0 < a < 2.0 or a == 1.0:
            raise ConfigError(f"alpha: values must lie in (0,1) or (1,2), got {a}")
        out.append(a)
    return tuple(out)


def _Ns(value):
    out = tuple(_int("N", v) for v in _as_list("N", value))
    if any(n < 1 for n in out):
        raise ConfigError("N: resolutions must be positive")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError("N: list must be strictly increasing")
    return out


def _schemes(value):
    out = []
    for v in _as_list("scheme", value):
        try:
            out.append(SchemeId.parse(v).value)
        except FracspecError as exc:
            raise ConfigError(f"scheme: {exc}") from None
    return tuple(sorted(set(out)))


def _drifts(value):
    out = []
    for v in _as_list("d", value):
        if v == "cos":
            out.append("cos")
        else:
            out.append(_real("d", v))
    return tuple(out)


def _rhs(value):
    if isinstance(value, dict):
        if set(value) != {"poly"}:
            raise ConfigError(f"rhs: unknown keys {sorted(set(value) - {'poly'})}")
        coeffs = tuple(_real("rhs.poly", c) for c in _as_list("rhs.poly", value["poly"]))
        return coeffs
    return _real("rhs", value)


_PARSERS = {
    "command": lambda v: v,
    "scheme": _schemes,
    "alpha": _alphas,
    "N": _Ns,
    "problem": lambda v: v if isinstance(v, str) else _bad("problem", v),
    "out": lambda v: v if isinstance(v, str) else _bad("out", v),
    "p_bar": lambda v: _real("p_bar", v),
    "q_bar": lambda v: _real("q_bar", v),
    "d_bar": lambda v: _real("d_bar", v),
    "rhs": _rhs,
    "d": _drifts,
    "points": lambda v: _int("points", v),
    "quadrature_slack": lambda v: _int("quadrature_slack", v),
}


def _bad(key, v):
    raise ConfigError(f"{key}: expected a string, got {v!r}")


def build_config(command, raw):
    """Validate a mapping of top-level keys into an :class:`ExperimentConfig`."""
    if command not in COMMANDS:
        raise ConfigError(f"command: expected one of {', '.join(COMMANDS)}, got {command!r}")
    unknown = sorted(set(raw) - set(_PARSERS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown config key")
    kw = {k: _PARSERS[k](v) for k, v in raw.items() if k != "command"}
    if "command" in raw and raw["command"] != command:
        raise ConfigError(f"command: config says {raw['command']!r} but {command!r} was requested")
    if command in ("mfet", "solve"):
        kw.setdefault("scheme", (3,))
        kw.setdefault("N", (64,))
        if len(kw["N"]) != 1:
            raise ConfigError(f"N: {command} takes a single resolution")
        if len(kw["scheme"]) != 1:
            raise ConfigError(f"scheme: {command} takes a single scheme")
    if command == "solve":
        kw.setdefault("alpha", (1.5,))
        if len(kw["alpha"]) != 1:
            raise ConfigError("alpha: solve takes a single order")
        if "problem" not in kw and "rhs" not in kw:
            raise ConfigError("problem: solve needs a catalog label or an inline rhs")
    if command == "convergence" and "problem" not in kw:
        raise ConfigError("problem: convergence needs a catalog label")
    if "problem" in kw and kw["problem"] not in CATALOG:
        raise ConfigError(f"problem: unknown label {kw['problem']!r}; choose from {', '.join(CATALOG)}")
    if kw.get("points", 1) < 1:
        raise ConfigError("points: must be positive")
    if kw.get("quadrature_slack", 0) < 0:
        raise ConfigError("quadrature_slack: must be nonnegative")
    return ExperimentConfig(command=command, **kw)


# --------------------------------------------------------------------------
# output

def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def to_csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def thread_count():
    raw = os.environ.get("FRACSPEC_THREADS")
    if raw is None or raw == "":
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FRACSPEC_THREADS: expected an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("FRACSPEC_THREADS: must be at least 1")
    return n


def _pmap(fn, items):
    # results are gathered in input order whatever the completion order
    n = thread_count()
    if n == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def sample_grid(points):
    """Uniform interior grid ``-1 + 2 i/(points+1)``, ``i = 1..points``."""
    return -1.0 + 2.0 * np.arange(1, points + 1) / (points + 1.0)


# --------------------------------------------------------------------------
# commands

def _cumulative(Ns, values, fitter):
    out = []
    for i in range(len(Ns)):
        if i + 1 >= 3:
            try:
                out.append(fitter(Ns[:i + 1], values[:i + 1]))
            except FracspecError:
                out.append(None)
        else:
            out.append(None)
    return out


def run_convergence(cfg):
    """L2 error sweep against the catalog problem's exact solution."""
    tasks = [(s, a, n) for s in cfg.scheme for a in cfg.alpha for n in cfg.N]
    problems = {a: catalog_problem(cfg.problem, a) for a in cfg.alpha}
    if any(p.exact is None for p in problems.values()):
        raise ConfigError(f"problem: {cfg.problem!r} has no exact solution")

    def work(t):
        s, a, n = t
        prob = problems[a]
        _, sol = solve_problem(prob, s, n, cfg.quadrature_slack)
        bres = abs(sol(1.0) - float(prob.exact(1.0)))
        return problem_error(prob, sol), bres

    results = dict(zip(tasks, _pmap(work, tasks)))
    rows = []
    for s in cfg.scheme:
        for a in cfg.alpha:
            errs = [results[(s, a, n)][0] for n in cfg.N]
            rates = _cumulative(cfg.N, errs, fit_rate)
            for n, e, r in zip(cfg.N, errs, rates):
                rows.append((s, a, n, e, results[(s, a, n)][1], r))
    return to_csv(HEADERS["convergence"], sorted(rows, key=lambda r: r[:3]))


def run_condition(cfg):
    """2-norm condition numbers of the stiffness matrices."""
    tasks = [(s, a, n) for s in cfg.scheme for a in cfg.alpha for n in cfg.N]

    def work(t):
        s, a, n = t
        prob = ProblemSpec(a, cfg.p_bar, cfg.q_bar, cfg.d_bar, Source.constant(0.0))
        system, _ = solve_problem(prob, s, n, cfg.quadrature_slack)
        return condition_number(system.stiffness)

    results = dict(zip(tasks, _pmap(work, tasks)))
    rows = []
    for s in cfg.scheme:
        for a in cfg.alpha:
            kappas = [results[(s, a, n)] for n in cfg.N]
            growth = _cumulative(cfg.N, kappas, fit_growth)
            rows.extend((s, a, n, k, g) for n, k, g in zip(cfg.N, kappas, growth))
    return to_csv(HEADERS["condition"], sorted(rows, key=lambda r: r[:3]))


def _drift_value(d, alpha):
    return math.cos(0.5 * math.pi * alpha) if d == "cos" else d


def run_mfet(cfg):
    """Mean first exit time profiles on a uniform interior grid."""
    x = sample_grid(cfg.points)
    tasks = [(a, d) for a in cfg.alpha for d in cfg.d]
    scheme, N = cfg.scheme[0], cfg.N[0]

    def work(t):
        a, d = t
        _, sol = solve_problem(mfet_problem(a, _drift_value(d, a)), scheme, N, cfg.quadrature_slack)
        return sol(x)

    rows = []
    for (a, d), u in zip(tasks, _pmap(work, tasks)):
        dv = _drift_value(d, a)
        rows.extend((a, dv, xi, ui) for xi, ui in zip(x, u))
    return to_csv(HEADERS["mfet"], sorted(rows, key=lambda r: r[:3]))


def _solve_problem_spec(cfg):
    alpha = cfg.alpha[0]
    if cfg.problem is not None:
        return catalog_problem(cfg.problem, alpha)
    rhs = cfg.rhs
    source = Source.constant(rhs) if isinstance(rhs, float) else Source.from_callable(_Polynomial(rhs))
    return ProblemSpec(alpha, cfg.p_bar, cfg.q_bar, cfg.d_bar, source, label="inline")


def run_solve(cfg):
    """Solve one problem; returns ``(csv_text, summary_text)``."""
    prob = _solve_problem_spec(cfg)
    system, sol = solve_problem(prob, cfg.scheme[0], cfg.N[0], cfg.quadrature_slack)
    x = sample_grid(cfg.points)
    u = sol(x)
    resid = np.linalg.norm(system.stiffness @ sol.coeffs - system.load)
    bnorm = np.linalg.norm(system.load)
    summary = [("N", system.N), ("kappa2", condition_number(system.stiffness)),
               ("residual", resid / bnorm if bnorm > 0 else resid), ("u_N(1)", abs(sol(1.0)))]
    if prob.exact is not None:
        summary.append(("max_error", float(np.max(np.abs(u - prob.exact(x))))))
    text = "".join(f"{k},{fmt(v)}\n" for k, v in summary)
    return to_csv(HEADERS["solve"], zip(x, u)), text


# --------------------------------------------------------------------------
# entry point

def _parser():
    p = argparse.ArgumentParser(prog="fracspec", description="Spectral solvers for two-sided fractional diffusion with drift.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help="output CSV path (default: standard output)")
    p.add_argument("--alpha", nargs="+", type=float)
    p.add_argument("--N", nargs="+", type=int)
    p.add_argument("--scheme", nargs="+")
    p.add_argument("--problem")
    p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                   help="override any top-level config key with a JSON value")
    return p


def load_config(args):
    raw = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be an object")
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"{item}: --set expects KEY=JSON")
        try:
            raw[key] = json.loads(value)
        except json.JSONDecodeError:
            raw[key] = value
    for key in ("out", "alpha", "N", "scheme", "problem"):
        v = getattr(args, key)
        if v is not None:
            raw[key] = v
    return build_config(args.command, raw)


def run(cfg):
    """Run ``cfg``; returns ``(csv_text, summary_text or None)``."""
    if cfg.command == "convergence":
        return run_convergence(cfg), None
    if cfg.command == "condition":
        return run_condition(cfg), None
    if cfg.command == "mfet":
        return run_mfet(cfg), None
    return run_solve(cfg)


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        cfg = load_config(args)
        csv_text, summary = run(cfg)
    except (AssemblyError, SolverError, SingularityError) as exc:
        print(f"fracspec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FracspecError as exc:
        print(f"fracspec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if summary:
        sys.stdout.write(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
