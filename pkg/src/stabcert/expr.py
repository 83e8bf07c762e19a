"""Tiny expression language for problem-spec files.

Grammar: numbers, ``x``, the constants ``pi`` and ``e``, ``+ - * /``,
integer powers (``x**2`` or ``x^2``), and the functions ``sin``, ``ln``,
``exp``.  Expressions are parsed with :mod:`ast` and compiled to closures;
nothing is passed to ``eval``.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from typing import Callable

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}
_FUNCS = {"sin": math.sin, "ln": math.log, "exp": math.exp}
_CONSTS = {"pi": math.pi, "e": math.e}

Fn = Callable[[float], float]


class ExprError(ValueError):
    pass


def _int_exponent(node: ast.AST) -> int | None:
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _int_exponent(node.operand)
        if inner is not None:
            return -inner if isinstance(node.op, ast.USub) else inner
    return None


def _compile(node: ast.AST, src: str) -> Fn:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExprError(f"unsupported literal {node.value!r} in {src!r}")
        c = float(node.value)
        return lambda x: c
    if isinstance(node, ast.Name):
        if node.id == "x":
            return lambda x: x
        if node.id in _CONSTS:
            c = _CONSTS[node.id]
            return lambda x: c
        raise ExprError(f"unknown name {node.id!r} in {src!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, src)
        if isinstance(node.op, ast.USub):
            return lambda x: -inner(x)
        return inner
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            k = _int_exponent(node.right)
            if k is None:
                raise ExprError(f"only integer powers are allowed in {src!r}")
            base = _compile(node.left, src)
            return lambda x: base(x) ** k
        fn = _BINOPS.get(type(node.op))
        if fn is None:
            raise ExprError(f"unsupported operator in {src!r}")
        left, right = _compile(node.left, src), _compile(node.right, src)
        return lambda x: fn(left(x), right(x))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ExprError(f"unsupported function call in {src!r}; allowed: {sorted(_FUNCS)}")
        if len(node.args) != 1 or node.keywords:
            raise ExprError(f"{node.func.id} takes exactly one argument in {src!r}")
        fn1 = _FUNCS[node.func.id]
        arg = _compile(node.args[0], src)
        return lambda x: fn1(arg(x))
    raise ExprError(f"unsupported syntax in {src!r}")


def parse_expr(src: str) -> Fn:
    """Compile ``src`` into a function of ``x``."""
    if not isinstance(src, str) or not src.strip():
        raise ExprError("expression must be a nonempty string")
    try:
        tree = ast.parse(src.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"cannot parse {src!r}: {exc.msg}") from None
    return _compile(tree.body, src)


_UNUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_NUM = r"[+-]?" + _UNUM
_SHIFT = re.compile(rf"^\s*x\s*(?:([+-])\s*({_UNUM}))?\s*$")
_SCALE_LEFT = re.compile(rf"^\s*({_NUM})\s*\*\s*x\s*$")
_SCALE_RIGHT = re.compile(rf"^\s*x\s*\*\s*({_NUM})\s*$")


def parse_affine(src: str) -> tuple[str, float]:
    """Parse a self-map descriptor ``x+c``, ``x-c``, ``k*x`` or ``x*k``.

    Returns ``("shift", c)`` or ``("scale", k)``.
    """
    if not isinstance(src, str):
        raise ExprError("phi must be a string like 'x+1' or '2*x'")
    m = _SHIFT.match(src)
    if m:
        sign, num = m.groups()
        c = float(num) if num else 0.0
        return "shift", -c if sign == "-" else c
    m = _SCALE_LEFT.match(src) or _SCALE_RIGHT.match(src)
    if m:
        return "scale", float(m.group(1))
    raise ExprError(f"phi {src!r} is not of the form 'x+c', 'x-c', 'k*x' or 'x*k'")


def affine_map(kind: str, c: float) -> Fn:
    if kind == "shift":
        return lambda x: x + c
    return lambda x: c * x
