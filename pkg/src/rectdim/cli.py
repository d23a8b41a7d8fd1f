"""Command line: every solver and verifier as a reproducible run emitting JSON or CSV.

Parameters come from flags or from a flat key=value config file given with
--config; flags win.  Exit status: 0 ok, 2 invalid input, 3 failed
verification, 4 budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import applications as app
from . import coverlab
from .cantor import CantorAxisSpec
from .dimcore import ExponentProfile, ProductSpaceSpec, TiePolicy, compute_s, compute_s_hat
from .errors import RectDimError, ValidationError, VerificationError
from .verify import masstree, ubiquity

SCHEMA_ID = "rectdim.result/1"
COMMANDS = ("dim-core", "dim-simultaneous", "dim-linear", "dim-shrink", "dim-mult", "orbit", "cover-critical",
            "oracle-boxcount", "verify-ubiquity", "verify-massdist", "sweep")
SWEEPABLE = ("dim-core", "dim-simultaneous", "dim-linear", "dim-shrink", "dim-mult")
BOOL_KEYS = {"hat", "sharpness"}


# ---------------------------------------------------------------- parsing helpers

def floats(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(x) for x in text)
    text = str(text).strip()
    if not text:
        raise ValidationError("empty list")
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"not a comma separated list of numbers: {text!r}") from exc


def parse_axis(tok: str) -> CantorAxisSpec:
    """'3:0,2' is base 3 with digits {0, 2}; a bare base means all digits."""
    tok = tok.strip()
    try:
        if ":" in tok:
            base, digs = tok.split(":", 1)
            return CantorAxisSpec(int(base), tuple(int(x) for x in digs.split(",")))
        return CantorAxisSpec.full(int(tok))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad axis {tok!r}; expected BASE or BASE:d1,d2,...") from exc


def parse_axes(text) -> list[CantorAxisSpec]:
    if isinstance(text, (list, tuple)):
        return list(text)
    toks = [x for x in str(text).split(";") if x.strip()]
    if not toks:
        raise ValidationError("no axes given")
    return [parse_axis(x) for x in toks]


def parse_range(text) -> list[int]:
    text = str(text)
    try:
        if ":" in text:
            lo, hi = text.split(":")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad integer range {text!r}") from exc
    if not out:
        raise ValidationError(f"empty range {text!r}")
    return out


def parse_grid(text) -> list[float]:
    """'lo:hi:count' (inclusive linspace) or an explicit comma list."""
    text = str(text).strip()
    if not text:
        raise ValidationError("empty grid")
    if text.count(":") == 2:
        lo, hi, cnt = text.split(":")
        try:
            cnt = int(cnt)
            lo, hi = float(lo), float(hi)
        except ValueError as exc:
            raise ValidationError(f"bad grid {text!r}") from exc
        if cnt < 1:
            raise ValidationError("empty grid")
        return [float(x) for x in np.linspace(lo, hi, cnt)]
    return list(floats(text))


def axis_for_log(x: float) -> CantorAxisSpec:
    base = round(math.exp(float(x)))
    if base < 2 or abs(math.log(base) - float(x)) > 1e-9:
        raise ValidationError(f"log base {x} is not the log of an integer base >= 2")
    return CantorAxisSpec.full(base)


def load_config(path) -> dict:
    """Flat key=value text; '#' starts a comment, keys may use '-' or '_'."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{no}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise ValidationError(f"not a boolean: {v!r}")


# ---------------------------------------------------------------- serialization

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return json.dumps(x.value)
    return json.dumps(str(x))


def dumps(doc) -> str:
    """JSON text with every real written to 17 significant digits."""
    return _fmt(doc) + "\n"


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(rows[0].keys())
    for r in rows[1:]:
        for k in r:
            if k not in fields:
                fields.append(k)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_cell(r.get(k)) for k in fields})
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple)):
        return ";".join(str(_csv_cell(x)) for x in v)
    if hasattr(v, "value"):
        return v.value
    return v


def versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    import scipy
    return {"rectdim": pkg, "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}


# ---------------------------------------------------------------- commands

def _report_dict(rep) -> dict:
    d = rep.as_dict()
    out = {"dim": rep.value, "argmin_A": rep.argmin, "full_measure": rep.full_measure,
           "partition": d["partition"], "table": d["table"]}
    return out


def run_dim_core(p) -> dict:
    space = ProductSpaceSpec(floats(p.deltas), float(p.kappa))
    profile = ExponentProfile(floats(p.a), floats(p.t))
    fn = compute_s_hat if _bool(p.hat) else compute_s
    return _report_dict(fn(space, profile, TiePolicy(p.tie_policy)))


def run_dim_simultaneous(p) -> dict:
    rep = app.simultaneous_dim(app.SimultaneousInstance(floats(p.tau)))
    out = {"dim": rep.value, "argmin_i": rep.details.get("argmin_i"), "full_measure": rep.full_measure,
           "permutation": rep.details.get("permutation")}
    if not rep.full_measure:
        out.update({"argmin_A": rep.argmin, "a": rep.details["a"], "t": rep.details["t"],
                    "generic_value": rep.details["generic_value"], "partition": rep.partition.as_dict()})
    return out


def run_dim_linear(p) -> dict:
    rep = app.linear_forms_dim(app.LinearFormsInstance(int(p.m), int(p.n), floats(p.lam)))
    out = {"dim": rep.value, "argmin_i": rep.details.get("argmin_i"), "full_measure": rep.full_measure,
           "permutation": rep.details.get("permutation")}
    if not rep.full_measure:
        out.update({"argmin_A": rep.argmin, "a": rep.details["a"], "t": rep.details["t"],
                    "generic_value": rep.details["generic_value"], "partition": rep.partition.as_dict()})
    return out


def run_dim_shrink(p) -> dict:
    axes = parse_axes(p.axes)
    rep = app.shrinking_target_dim(axes, floats(p.t))
    out = _report_dict(rep)
    out["hausdorff_measure"] = rep.details["hausdorff_measure"]
    out["deltas"] = rep.details["deltas"]
    return out


def _mult_axes(p):
    if p.a is not None and p.log_a is not None:
        raise ValidationError("give either --a or --log-a, not both")
    if p.b is not None and p.log_b is not None:
        raise ValidationError("give either --b or --log-b, not both")
    ax_a = parse_axis(p.a) if p.a is not None else (axis_for_log(p.log_a) if p.log_a is not None else None)
    ax_b = parse_axis(p.b) if p.b is not None else (axis_for_log(p.log_b) if p.log_b is not None else None)
    if ax_a is None or ax_b is None:
        raise ValidationError("dim-mult needs both axes (--a/--log-a and --b/--log-b)")
    return ax_a, ax_b


def run_dim_mult(p) -> dict:
    ax_a, ax_b = _mult_axes(p)
    if p.t2 is not None:
        t2 = float(p.t2)
        t = float(p.t)
        if not (0 <= t2 <= t):
            raise ValidationError("t2 must lie in [0, t]")
        rep = app.mult_pair_dim(ax_a, ax_b, t - t2, t2)
        return {"dim": rep.value, "t1": t - t2, "t2": t2, "case": rep.details["case"],
                "argmin_A": rep.argmin}
    res = app.mult_dim(ax_a, ax_b, float(p.t), threads=p.threads)
    return res.as_dict()


def run_orbit(p) -> tuple[dict, list]:
    if not p.samples_file:
        raise ValidationError("orbit needs --samples-file (CSV rows n,psi_1,...,psi_d)")
    try:
        arr = np.loadtxt(p.samples_file, delimiter=",", ndmin=2, comments="#")
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read samples: {exc}") from exc
    res = app.exponent_orbit(arr, p.rho, eps=float(p.eps), tail=float(p.tail))
    out = {"candidates": [list(c) for c in res.candidates], "cluster_sizes": res.cluster_sizes,
           "liminf": list(res.liminf), "samples": int(arr.shape[0])}
    if p.application == "simultaneous":
        val, i = app.simultaneous_sup(res.candidates)
        out.update({"sup_dim": val, "sup_index": i})
    rows = [{"n": float(n), **{f"x{i + 1}": float(v) for i, v in enumerate(row)}}
            for n, row in zip(arr[:, 0], res.orbit)]
    return out, rows


def run_cover_critical(p) -> dict:
    if p.axes:
        axes = parse_axes(p.axes)
        t = floats(p.t)
        ns = parse_range(p.n_range)
        levels = [coverlab.shrinking_model_level(axes, t, n) for n in ns]
        predicted = app.shrinking_target_dim(axes, t).value
    else:
        space = ProductSpaceSpec(floats(p.deltas), float(p.kappa))
        profile = ExponentProfile(floats(p.a), floats(p.t))
        levels = coverlab.model_levels(space, profile, floats(p.r))
        predicted = compute_s(space, profile).value
    crit = coverlab.critical_exponent(levels, tol=float(p.tol))
    return {"critical_exponent": crit, "predicted": predicted, "difference": crit - predicted,
            "levels": len(levels)}


def run_oracle_boxcount(p) -> tuple[dict, list]:
    axes = parse_axes(p.axes)
    res = coverlab.empirical_critical_exponent(axes, floats(p.t), parse_range(p.n_range), steps=int(p.steps),
                                               counter=p.counter)
    levels = [{"n": lv.n, "s_star": lv.s_star, "argmin_A": float(lv.A[lv.argmin]),
               "argmin_eps": float(lv.eps[lv.argmin]), "steps_to_alphabet": lv.steps_to_alphabet}
              for lv in res.levels]
    out = {"predicted": res.predicted, "last": res.last, "counter": res.counter,
           "alphabet": list(res.alphabet), "levels": levels}
    rows = [r for lv in res.levels for r in lv.rows()]
    return out, rows


def run_verify_ubiquity(p) -> dict:
    kind = ubiquity.SystemKind(p.system)
    if kind is ubiquity.SystemKind.SHRINKING:
        spec = ubiquity.UbiquitySystemSpec(kind, axes=tuple(parse_axes(p.axes)))
    else:
        spec = ubiquity.UbiquitySystemSpec(kind, m=int(p.m), n=int(p.n), a=floats(p.a), M=int(p.M))
    dims = {ubiquity.SystemKind.SHRINKING: len(spec.axes), ubiquity.SystemKind.SIMULTANEOUS: spec.m,
            ubiquity.SystemKind.LINEAR_FORMS: spec.m * spec.n}[kind]
    center = floats(p.center) if p.center else (0.5,) * dims
    radius = float(p.radius)
    k = int(p.level) if p.level is not None else spec.min_compliant_level(radius)
    method = p.method or ("exact_1d" if kind is ubiquity.SystemKind.SHRINKING or spec.m == 1 and kind is
                          ubiquity.SystemKind.SIMULTANEOUS else "monte_carlo")
    rep = ubiquity.ubiquity_coverage(spec, center, radius, k, method=method, samples=int(p.samples),
                                     seed=int(p.seed))
    out = rep.as_dict()
    out["system"] = spec.as_dict()
    out["center"] = list(center)
    out["radius"] = radius
    return out


def run_verify_massdist(p) -> tuple[dict, bool]:
    axes = parse_axes(p.axes)
    t = floats(p.t)
    tree = masstree.build_mass_tree(axes, t, depth=int(p.depth),
                                    growth=None if p.growth is None else float(p.growth),
                                    target_gap=float(p.epsilon))
    cons = tree.check_conservation(paths=int(p.paths), seed=int(p.seed))
    s = float(p.s) if p.s is not None else tree.s_formula - float(p.epsilon)
    hold = masstree.holder_test(tree, s, float(p.epsilon), int(p.samples), int(p.seed))
    out = {"n_schedule": list(tree.ns), "growth": tree.growth, "s_formula": tree.s_formula,
           "levels": tree.level_info(), "conservation": cons.as_dict(), "holder": hold.as_dict()}
    if _bool(p.sharpness):
        sharp = masstree.holder_test(tree, tree.total_delta, float(p.epsilon), int(p.samples), int(p.seed))
        out["sharpness"] = sharp.as_dict()
    if p.tree_json:
        Path(p.tree_json).write_text(dumps(tree.to_json(int(p.max_nodes))))
        out["tree_json"] = str(p.tree_json)
    return out, cons.ok and hold.passed


def run_single(command, p):
    """Dispatch one command; returns (result, csv rows or None, verified flag)."""
    if command == "dim-core":
        return run_dim_core(p), None, True
    if command == "dim-simultaneous":
        return run_dim_simultaneous(p), None, True
    if command == "dim-linear":
        return run_dim_linear(p), None, True
    if command == "dim-shrink":
        return run_dim_shrink(p), None, True
    if command == "dim-mult":
        return run_dim_mult(p), None, True
    if command == "orbit":
        res, rows = run_orbit(p)
        return res, rows, True
    if command == "cover-critical":
        return run_cover_critical(p), None, True
    if command == "oracle-boxcount":
        res, rows = run_oracle_boxcount(p)
        return res, rows, True
    if command == "verify-ubiquity":
        return run_verify_ubiquity(p), None, True
    if command == "verify-massdist":
        res, ok = run_verify_massdist(p)
        return res, None, ok
    raise ValidationError(f"unknown command {command!r}")


def _flatten(prefix, v, out):
    if isinstance(v, dict):
        for k, x in v.items():
            if k in ("table", "partition", "details", "levels", "axis_a", "axis_b", "system"):
                continue
            _flatten(f"{prefix}{k}.", x, out)
    else:
        out[prefix[:-1]] = v


def run_sweep(p) -> tuple[dict, list]:
    target = p.target
    if target not in SWEEPABLE:
        raise ValidationError(f"sweep supports {', '.join(SWEEPABLE)}; got {target!r}")
    grid = parse_grid(p.grid)
    param = p.param.replace("-", "_")
    index = None
    if "[" in param:
        param, idx = param.rstrip("]").split("[")
        index = int(idx)
    if not hasattr(p, param):
        raise ValidationError(f"unknown sweep parameter {param!r}")
    rows = []
    for val in grid:
        q = argparse.Namespace(**vars(p))
        if index is None:
            setattr(q, param, val)
        else:
            vec = list(floats(getattr(p, param)))
            if not 0 <= index < len(vec):
                raise ValidationError(f"index {index} out of range for {param}")
            vec[index] = val
            setattr(q, param, tuple(vec))
        res, _, _ = run_single(target, q)
        flat = {}
        _flatten("", res, flat)
        rows.append({p.param: val, **flat})
    dims = [r.get("dim") for r in rows]
    summary = {"target": target, "param": p.param, "points": len(grid), "dim_min": min(dims), "dim_max": max(dims)}
    return summary, rows


# ---------------------------------------------------------------- argparse

def _common(sp):
    sp.add_argument("--config", help="key=value file; flags override it")
    sp.add_argument("--seed", type=int, default=0, help="64-bit seed for every random stream")
    sp.add_argument("--output", default="-", help="output path ('-' for stdout)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    env = os.environ.get("RECTDIM_THREADS")
    sp.add_argument("--threads", type=int, default=int(env) if env and env.isdigit() else 1)


def _add_dim_args(sp, command):
    if command in ("dim-core", "cover-critical"):
        sp.add_argument("--deltas")
        sp.add_argument("--kappa", default="0")
        sp.add_argument("--a")
    if command == "dim-core":
        sp.add_argument("--tie-policy", default="default", choices=[x.value for x in TiePolicy])
        sp.add_argument("--hat", action="store_true", help="minimise over a_i + t_i only")
    if command in ("dim-core", "dim-shrink", "cover-critical", "oracle-boxcount", "verify-massdist"):
        sp.add_argument("--t", help="comma separated shrink exponents")
    if command in ("dim-shrink", "cover-critical", "oracle-boxcount", "verify-massdist"):
        sp.add_argument("--axes", help="'BASE[:d1,d2,..]' per axis, ';' separated")
    if command == "dim-simultaneous":
        sp.add_argument("--tau")
    if command == "dim-linear":
        sp.add_argument("--m", type=int, default=1)
        sp.add_argument("--n", type=int, default=1)
        sp.add_argument("--lam")
    if command == "dim-mult":
        sp.add_argument("--a", help="first axis, BASE[:digits]")
        sp.add_argument("--b", help="second axis, BASE[:digits]")
        sp.add_argument("--log-a", type=float, help="log of a full-digit base")
        sp.add_argument("--log-b", type=float)
        sp.add_argument("--t", type=float, default=0.0)
        sp.add_argument("--t2", type=float, help="evaluate the (t - t2, t2) pair instead of the supremum")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rectdim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for c in ("dim-core", "dim-simultaneous", "dim-linear", "dim-shrink", "dim-mult"):
        sp = sub.add_parser(c)
        _add_dim_args(sp, c)
        _common(sp)
    sp = sub.add_parser("orbit", help="exponent vectors log psi/log rho and their accumulation points")
    sp.add_argument("--samples-file")
    sp.add_argument("--rho", choices=sorted(app.RHO_LOGS), default="inverse")
    sp.add_argument("--eps", type=float, default=0.05, help="clustering threshold")
    sp.add_argument("--tail", type=float, default=0.5)
    sp.add_argument("--application", choices=("none", "simultaneous"), default="none")
    _common(sp)
    sp = sub.add_parser("cover-critical", help="critical exponent of the covering model")
    _add_dim_args(sp, "cover-critical")
    sp.add_argument("--r", help="level scales for the generic model")
    sp.add_argument("--n-range", default="6:10")
    sp.add_argument("--tol", type=float, default=1e-6)
    _common(sp)
    sp = sub.add_parser("oracle-boxcount", help="exact grid/ball counting of a shrinking-target level")
    _add_dim_args(sp, "oracle-boxcount")
    sp.add_argument("--n-range", default="6:10")
    sp.add_argument("--steps", type=int, default=64)
    sp.add_argument("--counter", choices=("grid", "balls"), default="grid")
    _common(sp)
    sp = sub.add_parser("verify-ubiquity", help="coverage fraction of a ball at one level")
    sp.add_argument("--system", choices=[x.value for x in ubiquity.SystemKind], default="simultaneous")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--a", default="2")
    sp.add_argument("--M", type=int, default=32)
    sp.add_argument("--axes")
    sp.add_argument("--center")
    sp.add_argument("--radius", type=float, default=0.5)
    sp.add_argument("--level", type=int, help="defaults to the smallest compliant level")
    sp.add_argument("--method", choices=("exact_1d", "monte_carlo"))
    sp.add_argument("--samples", type=int, default=4000)
    _common(sp)
    sp = sub.add_parser("verify-massdist", help="build the Cantor mass tree and run the Hoelder test")
    _add_dim_args(sp, "verify-massdist")
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--growth", type=float, help="n_k / n_(k-1); automatic when omitted")
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--s", type=float, help="test exponent; defaults to the formula minus epsilon")
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--paths", type=int, default=32)
    sp.add_argument("--sharpness", action="store_true", help="also test at the ambient dimension")
    sp.add_argument("--tree-json", help="write the materialised tree here (small trees only)")
    sp.add_argument("--max-nodes", type=int, default=20000)
    _common(sp)
    sp = sub.add_parser("sweep", help="one CSV row per grid value of a parameter")
    sp.add_argument("--target", required=False, default="dim-shrink", choices=SWEEPABLE)
    sp.add_argument("--param", default="t")
    sp.add_argument("--grid", default="")
    # parameters of every sweepable command
    for name in ("deltas", "a", "b", "tau", "lam", "axes", "tie_policy", "t"):
        sp.add_argument("--" + name.replace("_", "-"), dest=name)
    sp.add_argument("--kappa", default="0")
    sp.add_argument("--hat", action="store_true")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--log-a", type=float)
    sp.add_argument("--log-b", type=float)
    sp.add_argument("--t2", type=float)
    _common(sp)
    sp.set_defaults(format="csv", tie_policy="default")
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Load --config (wherever it appears) and turn its keys into parser defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    cfg = load_config(known.config)
    command = cfg.pop("command", None)
    if command and not any(a in COMMANDS for a in argv):
        argv = [command] + argv
    chosen = next((a for a in argv if a in COMMANDS), None)
    if chosen is None:
        raise ValidationError("no command given on the command line or in the config")
    sub_action = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    sp = sub_action.choices[chosen]
    dests = {a.dest: a for a in sp._actions}
    for k, v in cfg.items():
        if k not in dests:
            raise ValidationError(f"config key {k!r} is not a parameter of {chosen}")
        if k in BOOL_KEYS:
            v = _bool(v)
        elif dests[k].type is not None:
            try:
                v = dests[k].type(v)
            except ValueError as exc:
                raise ValidationError(f"config key {k!r}: {exc}") from exc
        sp.set_defaults(**{k: v})
    return argv


def _inputs(ns) -> dict:
    skip = {"config", "output", "format", "command"}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(ns).items()) if k not in skip}


def dispatch(argv=None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    ap = build_parser()
    t0 = time.perf_counter()
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    try:
        argv = _apply_config(ap, argv)
    except ValidationError as exc:
        print(f"rectdim: {exc}", file=sys.stderr)
        return 2
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if ns.threads < 1:
        print("rectdim: --threads must be positive", file=sys.stderr)
        return 2
    doc = {"header": {"timestamp": stamp, "wall_time": 0.0}, "schema": SCHEMA_ID, "command": ns.command,
           "status": "ok", "exit_code": 0, "seed": ns.seed, "inputs": _inputs(ns), "versions": versions(),
           "result": None, "error": None}
    rows = None
    try:
        if ns.command == "sweep":
            result, rows = run_sweep(ns)
            ok = True
        else:
            result, rows, ok = run_single(ns.command, ns)
        doc["result"] = result
        if not ok:
            doc.update(status="failed", exit_code=VerificationError.exit_status,
                       error={"code": VerificationError.code, "message": "verification checks did not pass"})
    except RectDimError as exc:
        doc.update(status="error", exit_code=exc.exit_status, error={"code": exc.code, "message": str(exc)})
    doc["header"]["wall_time"] = time.perf_counter() - t0

    if ns.format == "csv" and doc["status"] != "error":
        if rows is None:
            flat = {}
            _flatten("", doc["result"], flat)
            rows = [flat]
        text = to_csv(rows)
    else:
        text = dumps(doc)
    if ns.output == "-":
        stdout.write(text)
    else:
        Path(ns.output).write_text(text)
    if doc["status"] == "error":
        print(f"rectdim: {doc['error']['code']}: {doc['error']['message']}", file=sys.stderr)
    return doc["exit_code"]


def main(argv=None) -> int:
    code = dispatch(argv)
    sys.exit(code)


if __name__ == "__main__":
    main()
