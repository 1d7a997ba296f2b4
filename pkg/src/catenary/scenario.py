"""Configuration-driven runs: build a system and a construction, verify it,
and write a machine-readable report.

A scenario is a JSON file with ``schema_version``, ``system``, an optional
``block``, a ``construction`` and optional ``verification``, ``trace`` and
``outputs`` sections.  Every default is materialized into the report's
``config`` echo so that a report is reproducible on its own.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import os
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import discrete as dsc
from . import sections as sec
from . import systems
from .blocks import T_MAX, Block
from .errors import CatenaryError, ConfigError
from .expr import compile_expr
from .fields import (
    BVPSpec,
    ScalarField,
    attractor_lyapunov,
    catenary_bvp_field,
    catenary_sum_field,
    exact_decay_lyapunov,
    export_grid_csv,
    verify_catenary,
)
from .metric import farthest_point_refs, metric_axioms_check

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

FLOW_KINDS = ("saddle", "saddle_ode", "linear", "contraction", "expansion")
MAP_KINDS = ("full_shift",)
SUSPENSION_KINDS = ("suspended_shift",)
CONSTRUCTIONS = ("bvp", "sum", "exact_decay", "attractor_size", "discrete_bvp", "shift_metric", "sectional")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"type": "array", "items": _num, "minItems": 1}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "name", "system", "construction"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "system": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(FLOW_KINDS + MAP_KINDS + SUSPENSION_KINDS)},
                "params": {"type": "object"},
            },
        },
        "block": {
            "type": "object",
            "required": ["indicator", "delta"],
            "additionalProperties": False,
            "properties": {
                "indicator": {"type": "string"},
                "delta": _pos,
                "T_max": _pos,
                "eta": _pos,
                "lambda_points": {"type": "array", "items": _vec},
            },
        },
        "construction": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": list(CONSTRUCTIONS)}},
        },
        "verification": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grid": {
                    "type": "object",
                    "required": ["lo", "hi", "n"],
                    "additionalProperties": False,
                    "properties": {"lo": _vec, "hi": _vec, "n": {"type": "integer", "minimum": 1}},
                },
                "drift_points": {"type": "array", "items": _vec},
                "samples": {"type": "integer", "minimum": 1},
                "tolerances": {"type": "object", "additionalProperties": _pos},
            },
        },
        "trace": {
            "type": "object",
            "required": ["start", "t1"],
            "additionalProperties": False,
            "properties": {"start": _vec, "t0": _num, "t1": _num, "step": _pos},
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"grid_csv": {"type": "boolean"}, "trace_csv": {"type": "boolean"}},
        },
    },
}

SUITE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "scenarios"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "scenarios": {"type": "array", "items": {"type": "string"}},
    },
}

SYSTEM_DEFAULTS = {
    "saddle": {},
    "saddle_ode": {"h": 1e-3},
    "linear": {},
    "contraction": {"rate": 1.0, "dim": 1},
    "expansion": {"rate": 1.0, "dim": 1},
    "full_shift": {"lam": dsc.LAMBDA_U},
    "suspended_shift": {"lam": dsc.LAMBDA_U},
}

CONSTRUCTION_DEFAULTS = {
    "bvp": {"f": "1", "a": 1.0, "reference": None},
    "sum": {"a": 1.0},
    "exact_decay": {"a": 1.0, "level": 1.0, "t_range": [0.0, 5.0], "quadratic_bound": None},
    "attractor_size": {"point": None, "depth": 16, "horizon": 50.0, "reference_samples": 100, "times": [0.1, 1.0, 5.0]},
    "discrete_bvp": {"delta": 0.5, "N_max": 40, "width": 12},
    "shift_metric": {"lam": dsc.LAMBDA_U, "width": 12},
    "sectional": {"tau": 0.3, "delta": 0.2, "eps": 0.4, "base": {"s": 0.4, "support": [1, -2, 5]},
                  "companions": 12, "h": 1e-2, "reparam_time": 1.0, "triples": 600},
}

TOLERANCE_DEFAULTS = {
    "bvp": {"residual": 1e-6, "drift": 1e-8, "reference": 1e-6},
    "sum": {"residual": 1e-6, "drift": 1e-8},
    "exact_decay": {"decay": 1e-8, "quadratic": 1e-12},
    "attractor_size": {},
    "discrete_bvp": {"recurrence": 1e-10},
    "shift_metric": {"relation": 1e-12, "roots": 1e-15},
    "sectional": {"residual": 1e-3, "projection": 1e-9, "metric": 1e-9},
}

SAMPLE_DEFAULTS = {"exact_decay": 50, "attractor_size": 10, "discrete_bvp": 100, "shift_metric": 200, "sectional": 4}

REQUIRED_PARAMS = {
    "sum": ("alpha", "omega"),
    "exact_decay": ("V",),
    "linear": ("A",),
}


# loading and validation


def _field_path(err) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        missing = [r for r in err.validator_value if r not in err.instance]
        parts.append(missing[0] if missing else "?")
        return ".".join(parts) + ": required field is missing"
    return (".".join(parts) or "<root>") + f": {err.message}"


def _read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def validate_config(cfg: dict, source: str = "config") -> None:
    errors = sorted(Draft202012Validator(CONFIG_SCHEMA).iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError(f"{source}: " + "; ".join(_field_path(e) for e in errors))
    ctype = cfg["construction"]["type"]
    kind = cfg["system"]["kind"]
    if ctype in ("bvp",) and "block" not in cfg:
        raise ConfigError(f"{source}: block: required field is missing for construction {ctype!r}")
    for key in REQUIRED_PARAMS.get(ctype, ()):
        if key not in cfg["construction"]:
            raise ConfigError(f"{source}: construction.{key}: required field is missing")
    for key in REQUIRED_PARAMS.get(kind, ()):
        if key not in cfg["system"].get("params", {}):
            raise ConfigError(f"{source}: system.params.{key}: required field is missing")
    wants = {"discrete_bvp": MAP_KINDS, "shift_metric": MAP_KINDS, "sectional": SUSPENSION_KINDS}
    allowed = wants.get(ctype, FLOW_KINDS)
    if kind not in allowed:
        raise ConfigError(f"{source}: system.kind: {kind!r} does not fit construction {ctype!r}")
    for key, tol in cfg.get("verification", {}).get("tolerances", {}).items():
        if key not in TOLERANCE_DEFAULTS[ctype]:
            raise ConfigError(f"{source}: verification.tolerances.{key}: unknown tolerance for {ctype!r}")


def resolve(cfg: dict, seed: int | None = None, tolerance_scale: float = 1.0) -> dict:
    """Copy of ``cfg`` with every default filled in."""
    if not tolerance_scale > 0:
        raise ConfigError("--tolerance-scale must be positive")
    out = copy.deepcopy(cfg)
    out.setdefault("description", "")
    out["seed"] = int(seed if seed is not None else cfg.get("seed", 0))
    kind = out["system"]["kind"]
    out["system"]["params"] = {**SYSTEM_DEFAULTS[kind], **out["system"].get("params", {})}
    if "block" in out:
        out["block"] = {"T_max": T_MAX, "eta": 1e-9, "lambda_points": None, **out["block"]}
    ctype = out["construction"]["type"]
    out["construction"] = {**CONSTRUCTION_DEFAULTS[ctype], **out["construction"]}
    ver = out.setdefault("verification", {})
    tols = {**TOLERANCE_DEFAULTS[ctype], **ver.get("tolerances", {})}
    ver["tolerances"] = {k: v * tolerance_scale for k, v in tols.items()}
    ver["tolerance_scale"] = tolerance_scale
    ver.setdefault("samples", SAMPLE_DEFAULTS.get(ctype, 0))
    ver.setdefault("drift_points", [])
    if ctype in ("bvp", "sum", "exact_decay", "attractor_size") and "grid" not in ver:
        dim = _dimension(out)
        ver["grid"] = {"lo": [-0.45] * dim, "hi": [0.45] * dim, "n": 21}
    if "trace" in out:
        out["trace"] = {"t0": 0.0, "step": 0.01, **out["trace"]}
    out["outputs"] = {"grid_csv": False, "trace_csv": "trace" in out, **out.get("outputs", {})}
    return out


def load_scenario(path, seed: int | None = None, tolerance_scale: float = 1.0) -> dict:
    cfg = _read_json(path)
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    validate_config(cfg, str(path))
    return resolve(cfg, seed, tolerance_scale)


# building blocks


def _dimension(cfg) -> int:
    kind, params = cfg["system"]["kind"], cfg["system"].get("params", {})
    if kind in ("saddle", "saddle_ode"):
        return 2
    if kind == "linear":
        return len(params["A"])
    return int(params.get("dim", SYSTEM_DEFAULTS.get(kind, {}).get("dim", 1)))


def build_system(cfg):
    kind, p = cfg["system"]["kind"], cfg["system"]["params"]
    try:
        if kind == "saddle":
            return systems.saddle()
        if kind == "saddle_ode":
            return systems.saddle_ode(p["h"])
        if kind == "linear":
            return systems.linear(p["A"])
        if kind == "contraction":
            return systems.contraction(p["rate"])
        if kind == "expansion":
            return systems.expansion(p["rate"])
        if kind == "full_shift":
            return dsc.full_shift()
        if kind == "suspended_shift":
            return sec.suspended_shift(p["lam"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"system.params: cannot build {kind!r}: {exc}") from None
    raise ConfigError(f"system.kind: unknown kind {kind!r}")


def build_block(cfg) -> Block | None:
    b = cfg.get("block")
    if b is None:
        return None
    ind = compile_expr(b["indicator"], _dimension(cfg), "block.indicator")
    lam = b["lambda_points"]
    return Block(ind, b["delta"], eta=b["eta"], lam=lam, vectorized=True)


def _field(cfg, sys, block) -> ScalarField:
    c = cfg["construction"]
    dim = _dimension(cfg)
    if c["type"] == "bvp":
        f = compile_expr(c["f"], dim, "construction.f")
        return catenary_bvp_field(sys, block, BVPSpec(f, a=c["a"]), cfg["block"]["T_max"])
    if c["type"] == "sum":
        la = ScalarField(compile_expr(c["alpha"], dim, "construction.alpha"), a=c["a"], name="alpha")
        lo = ScalarField(compile_expr(c["omega"], dim, "construction.omega"), a=c["a"], name="omega")
        return catenary_sum_field(la, lo)
    if c["type"] == "exact_decay":
        V = compile_expr(c["V"], dim, "construction.V")
        return ScalarField(lambda z: exact_decay_lyapunov(sys, V, c["level"], c["a"], np.atleast_1d(z)), a=c["a"])
    raise ConfigError(f"construction.type: {c['type']!r} has no scalar field to trace")


def _grid(cfg):
    g = cfg["verification"]["grid"]
    lo, hi, n = g["lo"], g["hi"], g["n"]
    if len(lo) != len(hi) or len(lo) != _dimension(cfg):
        raise ConfigError("verification.grid: lo and hi must match the state dimension")
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return [np.array(p) for p in np.stack([m.ravel() for m in mesh], axis=1)]


def _box_samples(cfg, rng, n):
    g = cfg["verification"]["grid"]
    return rng.uniform(g["lo"], g["hi"], size=(n, len(g["lo"])))


# checks


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool | None = None
    witness: object = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.value <= self.tolerance)

    def to_dict(self):
        return {"name": self.name, "value": _jsonable(self.value), "tolerance": self.tolerance,
                "passed": bool(self.passed), "witness": _jsonable(self.witness)}


def _jsonable(v):
    if isinstance(v, dsc.SymbolicPoint):
        return sorted(v.support)
    if isinstance(v, np.ndarray):
        return [_jsonable(u) for u in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(u) for k, u in v.items()}
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _run_field(cfg, sys, block, tol, details):
    L = _field(cfg, sys, block)
    grid = _grid(cfg)
    drift = [np.asarray(p, dtype=float) for p in cfg["verification"]["drift_points"]]
    rep = verify_catenary(L, sys, grid, drift, tol["residual"], tol["drift"])
    details["catenary_report"] = rep.to_dict()
    checks = [
        Check("catenary_residual", rep.max_residual, tol["residual"],
              witness={"point": rep.residual_witness, "cells": [[i, p, r] for i, p, r in rep.residual_cells]}),
        Check("hyperbolicity_violations", len(rep.hyperbolicity_violations), 0,
              witness=[p for _, p in rep.hyperbolicity_violations[:10]]),
    ]
    if drift:
        checks.append(Check("drift", rep.drift, tol["drift"], witness=rep.drift_witness))
    ref = cfg["construction"].get("reference")
    if ref:
        R = compile_expr(ref, _dimension(cfg), "construction.reference")
        errs = [abs(L(z) - R(z)) for z in grid]
        i = int(np.argmax(errs))
        checks.append(Check("reference", errs[i], tol["reference"], witness=grid[i]))
    if cfg["outputs"]["grid_csv"]:
        path = Path(cfg["_out_dir"]) / f"{cfg['name']}.grid.csv"
        export_grid_csv(path, L, sys, grid)
        details["grid_csv"] = path.name
    return checks


def _run_exact_decay(cfg, sys, rng, tol, details):
    c = cfg["construction"]
    V = compile_expr(c["V"], _dimension(cfg), "construction.V")
    worst, wit = 0.0, None
    qworst, qwit = -math.inf, None
    for x in _box_samples(cfg, rng, cfg["verification"]["samples"]):
        t = float(rng.uniform(*c["t_range"]))
        L0 = exact_decay_lyapunov(sys, V, c["level"], c["a"], x)
        Lt = exact_decay_lyapunov(sys, V, c["level"], c["a"], sys(x, t))
        err = abs(Lt - math.exp(-c["a"] * t) * L0) / max(L0, 1.0)
        if err > worst:
            worst, wit = err, {"x": x, "t": t}
        if c["quadratic_bound"] is not None:
            excess = L0 - c["quadratic_bound"] * float(np.dot(x, x))
            if excess > qworst:
                qworst, qwit = excess, x
    checks = [Check("decay_law", worst, tol["decay"], witness=wit)]
    if c["quadratic_bound"] is not None:
        checks.append(Check("quadratic_bound_excess", max(qworst, 0.0), tol["quadratic"], witness=qwit))
    return checks


def _run_attractor_size(cfg, sys, rng, tol, details):
    c = cfg["construction"]
    dim = _dimension(cfg)
    p = np.zeros(dim) if c["point"] is None else np.asarray(c["point"], dtype=float)
    ref_pts = _box_samples(cfg, rng, c["reference_samples"])
    spec = farthest_point_refs([tuple(q) for q in np.vstack([ref_pts, [p]])], depth=c["depth"])
    bad = []
    n = cfg["verification"]["samples"]
    for x in _box_samples(cfg, rng, n):
        base = attractor_lyapunov(sys, p, spec, x, horizon=c["horizon"])
        for t in c["times"]:
            if not attractor_lyapunov(sys, p, spec, sys(x, t), horizon=c["horizon"]) < base:
                bad.append({"x": x, "t": t})
    details["refs"] = len(spec.refs)
    return [Check("monotonicity_violations", len(bad), 0, witness=bad[:5])]


def random_shift_pair(rng, bound: float, width: int = 12, dist=dsc.shift_metric, strict: bool = True):
    """Random finite-support pair with ``0 < dist < bound`` (``<=`` when not strict)."""
    while True:
        x = dsc.SymbolicPoint({int(n) for n in rng.integers(-width, width + 1, size=rng.integers(0, 8))})
        flips = {int(n) for n in rng.integers(-width, width + 1, size=rng.integers(1, 5))} - {0}
        y = dsc.SymbolicPoint(x.support ^ flips)
        d = dist(x, y)
        if 0 < d and (d < bound if strict else d <= bound):
            return x, y


def _run_shift_metric(cfg, sys, rng, tol, details):
    c = cfg["construction"]
    lam = c["lam"]
    metric = lambda p: dsc.shift_metric(p[0], p[1], lam)  # noqa: E731
    dist = lambda a, b: dsc.shift_metric(a, b, lam)  # noqa: E731
    ps = dsc.pair_system(sys)
    worst, wit = 0.0, None
    for _ in range(cfg["verification"]["samples"]):
        pair = random_shift_pair(rng, 1.0, c["width"], dist)
        r = abs(dsc.second_difference(metric, ps, pair) - metric(pair))
        if r > worst:
            worst, wit = r, pair
    ls, lu = dsc.catenary_roots()
    roots = max(abs(ls * lu - 1), abs(ls + lu - 3))
    details["lambda"] = lam
    return [Check("second_difference_relation", worst, tol["relation"], witness=wit),
            Check("root_identities", roots, tol["roots"])]


def _run_discrete_bvp(cfg, sys, rng, tol, details):
    c = cfg["construction"]
    spec = dsc.DiscreteCatenarySpec(c["delta"], c["N_max"])
    worst, wit, branches = 0.0, None, {}
    for _ in range(cfg["verification"]["samples"]):
        pair = random_shift_pair(rng, c["delta"], c["width"], strict=False)
        res = dsc.discrete_catenary_bvp(sys, spec, pair)
        branches[res.branch] = branches.get(res.branch, 0) + 1
        rr = dsc.recurrence_residuals(res.values)
        r = float(np.max(np.abs(rr))) if len(rr) else 0.0
        if r > worst:
            worst, wit = r, pair
    details["branches"] = dict(sorted(branches.items()))
    return [Check("recurrence_residual", worst, tol["recurrence"], witness=wit)]


def _run_sectional(cfg, sys, rng, tol, details):
    c = cfg["construction"]
    T = sys.period
    dist = sec.suspension_shift_distance(T)
    dpair = sec.suspension_section_pseudometric(T)
    base = c["base"]
    x = (float(base["s"]), dsc.SymbolicPoint(base["support"]))
    sys.validate(x)
    pairs = []
    for _ in range(200):
        flips = {int(rng.choice([-1, 1]) * rng.integers(3, 9))} if rng.random() < 0.8 else set()
        y = (float(np.mod(x[0] + rng.uniform(-0.1, 0.1), T)), dsc.SymbolicPoint(x[1].support ^ flips))
        pairs.append((x, y))
    spec = sec.fit_section_spec(sys, dist, pairs, tau=c["tau"], delta=c["delta"], eps=c["eps"])
    details["section_spec"] = {"tau": spec.tau, "eps": spec.eps, "delta": spec.delta, "a": spec.a,
                               "panels": spec.panels}
    pts, proj_res = [], 0.0
    tries = 0
    while len(pts) < c["companions"]:
        tries += 1
        if tries > 50 * c["companions"]:
            raise ConfigError("construction.base: could not sample distinct section points")
        flips = {int(rng.choice([-1, 1]) * rng.integers(3, 8)) for _ in range(rng.integers(1, 3))}
        pr = sec._project(sys, x, (x[0], dsc.SymbolicPoint(x[1].support ^ flips)), 0.0, spec)
        proj_res = max(proj_res, pr.residual)
        if all(dist(pr.point, q) > 0 for q in pts):
            pts.append(pr.point)
    n = min(cfg["verification"]["samples"], len(pts) // 2)
    cat_worst, cat_wit = 0.0, None
    for i in range(n):
        chk = sec.sectional_catenary_residual(sys, dpair, x, pts[2 * i], pts[2 * i + 1], spec, c["h"])
        proj_res = max(proj_res, chk.max_projection_residual)
        if chk.residual >= cat_worst:
            cat_worst, cat_wit = chk.residual, {"y": pts[2 * i], "z": pts[2 * i + 1]}
    tr = sec.reparametrize(sys, x, pts[0], c["reparam_time"], spec)
    proj_res = max(proj_res, float(np.max(tr.residuals)))
    D = lambda a, b: sec.sectional_metric(dpair, x, a, b)  # noqa: E731
    rep = metric_axioms_check(D, pts, tol=tol["metric"], triples=c["triples"], rng=rng,
                              same=lambda a, b: dist(a, b) == 0)
    details["reparam_steps"] = len(tr.ts) - 1
    return [
        Check("projection_residual", proj_res, tol["projection"]),
        Check("reparam_increasing", 0 if tr.increasing else 1, 0),
        Check("sectional_catenary_residual", cat_worst, tol["residual"], witness=cat_wit),
        Check("metric_axiom_violations", sum(rep.counts.values()), 0,
              witness=[v.__dict__ for v in rep.violations[:5]]),
    ]


_RUNNERS = {
    "exact_decay": _run_exact_decay,
    "attractor_size": _run_attractor_size,
    "shift_metric": _run_shift_metric,
    "discrete_bvp": _run_discrete_bvp,
    "sectional": _run_sectional,
}


@dataclass
class RunReport:
    name: str
    construction: str
    checks: list
    config: dict
    details: dict = field(default_factory=dict)
    error: str | None = None
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.passed else EXIT_FAIL

    def witness(self):
        for c in self.checks:
            if not c.passed:
                return c.to_dict()
        return None

    def to_dict(self) -> dict:
        cfg = {k: v for k, v in self.config.items() if not k.startswith("_")}
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "construction": self.construction,
            "verdict": "pass" if self.passed else "fail",
            "checks": [c.to_dict() for c in self.checks],
            "failed_witness": self.witness(),
            "error": self.error,
            "details": _jsonable(self.details),
            "config": _jsonable(cfg),
            "wall_time": self.wall_time,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def run_config(cfg: dict, out_dir=None) -> RunReport:
    """Execute a resolved config; writes the report when ``out_dir`` is given."""
    start = time.perf_counter()
    cfg = dict(cfg)
    cfg["_out_dir"] = str(out_dir) if out_dir is not None else "."
    ctype = cfg["construction"]["type"]
    rng = np.random.default_rng(cfg["seed"])
    tol = cfg["verification"]["tolerances"]
    details: dict = {}
    report = RunReport(cfg["name"], ctype, [], cfg, details)
    sys = build_system(cfg)
    block = build_block(cfg)
    try:
        if ctype in ("bvp", "sum"):
            report.checks = _run_field(cfg, sys, block, tol, details)
        else:
            report.checks = _RUNNERS[ctype](cfg, sys, rng, tol, details)
    except ConfigError:
        raise
    except CatenaryError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
    report.wall_time = round(time.perf_counter() - start, 6)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        Path(out_dir, f"{cfg['name']}.report.json").write_text(report.to_json())
    return report


def run_scenario(path, out_dir=None, seed: int | None = None, tolerance_scale: float = 1.0) -> RunReport:
    return run_config(load_scenario(path, seed, tolerance_scale), out_dir)


def orbit_export(path, out_dir=None, seed: int | None = None, out_file=None) -> Path:
    """Trace CSV with ``t, x0.., L, Ldot, Lddot, residual, event`` columns.

    ``event`` marks rows where the orbit leaves (``exit``) or re-enters
    (``entry``) the block; ``domain_exit`` closes a truncated trace.
    """
    from .flows import orbit_trace

    cfg = load_scenario(path, seed)
    if "trace" not in cfg:
        raise ConfigError(f"{path}: trace: required field is missing for the trace command")
    sys = build_system(cfg)
    block = build_block(cfg)
    L = _field(cfg, sys, block)
    tr_cfg = cfg["trace"]
    x0 = np.asarray(tr_cfg["start"], dtype=float)
    if len(x0) != _dimension(cfg):
        raise ConfigError("trace.start: length does not match the state dimension")
    tr = orbit_trace(sys, x0, tr_cfg["t0"], tr_cfg["t1"], tr_cfg["step"])
    dim = len(x0)
    out_dir = Path(out_dir or ".")
    os.makedirs(out_dir, exist_ok=True)
    out = Path(out_file) if out_file else out_dir / f"{cfg['name']}.trace.csv"
    a2 = L.a * L.a

    def fmt(v):
        return repr(float(v))

    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *[f"x{i}" for i in range(dim)], "L", "Ldot", "Lddot", "residual", "event"])
        inside_prev = None
        for t, z in zip(tr.times, tr.states):
            try:
                val, ld, ldd = L(z), L.ldot(sys, z), L.lddot(sys, z)
                row = [fmt(val), fmt(ld), fmt(ldd), fmt(abs(ldd - a2 * val))]
            except CatenaryError:
                row = ["nan"] * 4
            event = ""
            if block is not None:
                inside = block.contains(z)
                if inside_prev is not None and inside != inside_prev:
                    event = "entry" if inside else "exit"
                inside_prev = inside
            w.writerow([fmt(t), *[fmt(c) for c in np.ravel(z)], *row, event])
        if tr.exit_time is not None:
            ez = np.ravel(tr.exit_point)
            w.writerow([fmt(tr.exit_time), *[fmt(c) for c in ez], "nan", "nan", "nan", "nan", "domain_exit"])
    return out


@dataclass
class SuiteResult:
    rows: list
    exit_code: int
    warnings: list = field(default_factory=list)

    def table(self) -> str:
        lines = [f"{'scenario':<28} {'code':>4}  {'verdict':<8} detail"]
        for name, code, verdict, detail in self.rows:
            lines.append(f"{name:<28} {code:>4}  {verdict:<8} {detail}")
        return "\n".join(lines)


def verify_suite(path, out_dir=None, seed: int | None = None, tolerance_scale: float = 1.0) -> SuiteResult:
    """Run every scenario listed in a suite file; the exit code is the maximum."""
    path = Path(path)
    try:
        suite = _read_json(path)
    except ConfigError as exc:
        return SuiteResult([(path.name, EXIT_CONFIG, "error", str(exc))], EXIT_CONFIG)
    errs = list(Draft202012Validator(SUITE_SCHEMA).iter_errors(suite))
    if errs:
        return SuiteResult([(path.name, EXIT_CONFIG, "error", _field_path(errs[0]))], EXIT_CONFIG)
    result = SuiteResult([], EXIT_PASS)
    if not suite["scenarios"]:
        result.warnings.append(f"{path}: suite lists no scenarios")
        return result
    for entry in suite["scenarios"]:
        p = path.parent / entry
        try:
            rep = run_scenario(p, out_dir, seed, tolerance_scale)
        except ConfigError as exc:
            result.rows.append((entry, EXIT_CONFIG, "error", str(exc)))
            continue
        wit = rep.witness()
        detail = rep.error or (f"{wit['name']}={wit['value']!r} > {wit['tolerance']!r}" if wit else "")
        result.rows.append((entry, rep.exit_code, "pass" if rep.passed else "fail", detail))
    result.exit_code = max(code for _, code, _, _ in result.rows)
    return result


def bundled_dir() -> Path:
    return Path(str(resources.files("catenary") / "scenarios"))


def bundled(name: str) -> Path:
    p = bundled_dir() / name
    if not p.exists():
        raise ConfigError(f"no bundled scenario named {name!r}")
    return p
