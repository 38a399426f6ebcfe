"""Parse initial-data strings like ``sqrt(2)/pi*sin(1) + 0.3*cos(2) + const(0.5)``.

Frequencies are integers counted in units of 2*pi, so ``sin(1)`` is
sin(2 pi x). Only sums and scalar multiples of sin, cos and constants are
accepted, which keeps every field band-limited.
"""
from __future__ import annotations

import ast
import math

import numpy as np

from hs2.errors import ConfigError
from hs2.field import PeriodicField, grid

_SCALAR_FUNCS = {"sqrt": math.sqrt}
_SCALAR_NAMES = {"pi": math.pi}


class ExpressionError(ConfigError):
    pass


def _frequency(node, n: int) -> int:
    k = _scalar(node)
    if k != int(k):
        raise ExpressionError(f"frequency must be an integer multiple of 2 pi, got {k}")
    k = int(k)
    if abs(k) >= n // 2:
        raise ExpressionError(f"frequency {k} not below N/2 = {n // 2}")
    return k


def _scalar(node) -> float:
    value = _walk(node, None)
    if isinstance(value, np.ndarray):
        raise ExpressionError("expected a scalar")
    return value


def _walk(node, n):
    if isinstance(node, ast.Expression):
        return _walk(node.body, n)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id in _SCALAR_NAMES:
            return _SCALAR_NAMES[node.id]
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        value = _walk(node.operand, n)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.BinOp):
        a, b = _walk(node.left, n), _walk(node.right, n)
        a_field, b_field = isinstance(a, np.ndarray), isinstance(b, np.ndarray)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            if a_field and b_field:
                raise ExpressionError("products of fields are not allowed")
            return a * b
        if isinstance(node.op, ast.Div):
            if b_field:
                raise ExpressionError("cannot divide by a field")
            return a / b
        if isinstance(node.op, ast.Pow) and not (a_field or b_field):
            return a ** b
        raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        name, args = node.func.id, node.args
        if len(args) != 1:
            raise ExpressionError(f"{name}() takes one argument")
        if name in _SCALAR_FUNCS:
            return _SCALAR_FUNCS[name](_scalar(args[0]))
        if n is None:
            raise ExpressionError(f"{name}() is not a scalar")
        if name == "const":
            return np.full(n, _scalar(args[0]))
        if name in ("sin", "cos"):
            k = _frequency(args[0], n)
            trig = np.sin if name == "sin" else np.cos
            return trig(2.0 * np.pi * k * grid(n))
        raise ExpressionError(f"unknown function {name!r}")
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def parse_field(text: str, n: int) -> PeriodicField:
    """Field on an n-point grid from an expression string."""
    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    value = _walk(tree, n)
    if not isinstance(value, np.ndarray):
        value = np.full(n, value)
    return PeriodicField(value)
