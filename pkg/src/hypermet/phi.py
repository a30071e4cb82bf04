"""Restricted expression grammar for control functions phi(t).

Accepted: the variable ``t``, numeric constants, ``+ - * / **``, unary minus,
and calls to ``exp``, ``log``, ``sqrt`` and ``pow``. Anything else is rejected
at parse time, so no user code is ever executed.
"""

from __future__ import annotations

import ast

import numpy as np

from .metric import InputError

_FUNCS = {"exp": np.exp, "log": np.log, "sqrt": np.sqrt, "pow": np.power}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class PhiExpression:
    """Compiled phi(t); callable on floats and numpy arrays."""

    def __init__(self, source: str):
        self.source = source.strip()
        try:
            tree = ast.parse(self.source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise InputError(f"cannot parse phi expression {source!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            self._check(node.operand)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            pass
        elif isinstance(node, ast.Name) and node.id == "t":
            pass
        elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            if node.keywords:
                raise InputError("keyword arguments are not allowed in phi")
            nargs = 2 if node.func.id == "pow" else 1
            if len(node.args) != nargs:
                raise InputError(f"{node.func.id} takes {nargs} argument(s)")
            for a in node.args:
                self._check(a)
        else:
            raise InputError(f"unsupported element in phi expression: {ast.dump(node)[:60]}")

    def _eval(self, node, t):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, t), self._eval(node.right, t))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, t)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return t
        return _FUNCS[node.func.id](*(self._eval(a, t) for a in node.args))

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            out = self._eval(self._tree, arr)
        out = np.broadcast_to(np.asarray(out, dtype=float), arr.shape)
        return float(out) if out.ndim == 0 else np.array(out)

    def __repr__(self):
        return f"PhiExpression({self.source!r})"


def parse_phi(source: str) -> PhiExpression:
    return PhiExpression(source)
