"""Restricted arithmetic expressions for scenario files.

Expressions see the state coordinates as ``x0, x1, ...`` (also ``x, y, z``
for the first three) and a small set of math functions.  Anything else is
rejected before evaluation.
"""

from __future__ import annotations

import ast
import math

import numpy as np

from .errors import ConfigError

# numpy versions so that one expression serves single states and (N, d) batches
FUNCS = {
    "abs": np.abs,
    "min": np.minimum,
    "max": np.maximum,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "hypot": np.hypot,
}
BINARY = ("min", "max", "hypot")
CONSTS = {"pi": math.pi, "e": math.e}
ALIASES = ("x", "y", "z")

_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod, ast.USub, ast.UAdd,
)


def _check(tree, dim: int, where: str):
    names = set(FUNCS) | set(CONSTS) | {f"x{i}" for i in range(dim)} | set(ALIASES[:dim])
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ConfigError(f"{where}: construct {type(node).__name__} is not allowed")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"{where}: only numeric constants are allowed")
        if isinstance(node, ast.Name) and node.id not in names:
            raise ConfigError(f"{where}: unknown name {node.id!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCS or node.keywords:
                raise ConfigError(f"{where}: only plain calls to {sorted(FUNCS)} are allowed")
            want = 2 if node.func.id in BINARY else 1
            if len(node.args) != want:
                raise ConfigError(f"{where}: {node.func.id} takes {want} argument(s)")


def compile_expr(src: str, dim: int, where: str = "expression"):
    """Callable ``f(state)`` for a whitelisted expression.

    A single state gives a float; an ``(N, dim)`` array gives shape ``(N,)``.
    """
    if not isinstance(src, str) or not src.strip():
        raise ConfigError(f"{where}: expected a non-empty expression string")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"{where}: syntax error at column {exc.offset}: {src!r}") from None
    _check(tree, dim, where)
    code = compile(tree, f"<{where}>", "eval")
    env = {"__builtins__": {}, **FUNCS, **CONSTS}

    def f(state):
        arr = np.asarray(state, dtype=float)
        batch = arr.ndim == 2
        cols = list(arr.T) if batch else [float(c) for c in np.atleast_1d(arr)]
        if len(cols) != dim:
            raise ConfigError(f"{where}: state has {len(cols)} coordinates, expected {dim}")
        local = {f"x{i}": c for i, c in enumerate(cols)}
        local.update(zip(ALIASES, cols))
        with np.errstate(all="ignore"):
            val = eval(code, env, local)
        if batch:
            return np.broadcast_to(np.asarray(val, dtype=float), (arr.shape[0],)).copy()
        return float(val)

    f.source = src
    return f
