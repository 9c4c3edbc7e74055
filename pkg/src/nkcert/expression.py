"""Restricted arithmetic expressions for user-defined systems.

The dialect has ``+ - * / ^`` (``**`` is accepted too), unary minus,
numeric literals, the functions ``exp log sin cos`` and variables
``x1 .. xn``. Parsing goes through :mod:`ast` with a node whitelist, so no
user text is ever evaluated; the validated tree is rebuilt as a sympy
expression, differentiated symbolically, and compiled with ``lambdify``.
"""

from __future__ import annotations

import ast
import re

import numpy as np
import sympy

from .errors import SpecError

_FUNCTIONS = {"exp": sympy.exp, "log": sympy.log, "sin": sympy.sin, "cos": sympy.cos}
_VARIABLE = re.compile(r"x([1-9][0-9]*)$")


def _to_sympy(node, symbols):
    if isinstance(node, ast.Expression):
        return _to_sympy(node.body, symbols)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return sympy.Float(node.value) if isinstance(node.value, float) \
            else sympy.Integer(node.value)
    if isinstance(node, ast.Name):
        match = _VARIABLE.match(node.id)
        if not match or int(match.group(1)) > len(symbols):
            raise SpecError(f"unknown variable {node.id!r} (expected x1..x{len(symbols)})")
        return symbols[int(match.group(1)) - 1]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        operand = _to_sympy(node.operand, symbols)
        return -operand if isinstance(node.op, ast.USub) else operand
    if isinstance(node, ast.BinOp):
        left = _to_sympy(node.left, symbols)
        right = _to_sympy(node.right, symbols)
        op = node.op
        if isinstance(op, ast.Add):
            return left + right
        if isinstance(op, ast.Sub):
            return left - right
        if isinstance(op, ast.Mult):
            return left * right
        if isinstance(op, ast.Div):
            return left / right
        if isinstance(op, ast.Pow):
            return left ** right
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
            and node.func.id in _FUNCTIONS and len(node.args) == 1 and not node.keywords:
        return _FUNCTIONS[node.func.id](_to_sympy(node.args[0], symbols))
    raise SpecError(f"unsupported construct in expression: {ast.dump(node)[:60]}")


def parse_expression(text: str, n: int) -> sympy.Expr:
    """Parse one component of ``F`` in ``n`` variables."""
    try:
        # '^' must get the precedence of '**', so rewrite it before parsing
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise SpecError(f"cannot parse expression {text!r}: {exc.msg}") from None
    symbols = sympy.symbols(f"x1:{n + 1}")
    return _to_sympy(tree, symbols)


class ExpressionSystem:
    """Callable ``F`` and symbolic Jacobian built from expression strings."""

    def __init__(self, components: list[str]):
        if not components:
            raise SpecError("expression list is empty")
        self.n = len(components)
        self.symbols = sympy.symbols(f"x1:{self.n + 1}")
        self.exprs = [parse_expression(c, self.n) for c in components]
        jac = sympy.Matrix(self.exprs).jacobian(self.symbols)
        self._f = sympy.lambdify(self.symbols, self.exprs, modules="numpy")
        self._j = sympy.lambdify(self.symbols, jac.tolist(), modules="numpy")

    def F(self, x) -> np.ndarray:
        return np.asarray(self._f(*np.asarray(x, dtype=float)), dtype=float).reshape(self.n)

    def jacobian(self, x) -> np.ndarray:
        return np.asarray(self._j(*np.asarray(x, dtype=float)), dtype=float).reshape(self.n, self.n)
