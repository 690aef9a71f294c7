"""Tiny arithmetic expression language for initial and boundary data.

Grammar: numbers, the variables named at construction (``x`` and/or ``t``),
the constants ``pi`` and ``e``, the operators ``+ - * / ^`` (``^`` and
``**`` both mean power), parentheses, and the functions ``sin``, ``cos``,
``exp``, ``sqrt`` and ``abs``. Anything else is rejected at parse time.
"""
from __future__ import annotations

import ast

import numpy as np

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "sqrt": np.sqrt, "abs": np.abs}
CONSTANTS = {"pi": np.pi, "e": np.e}
_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARY = (ast.UAdd, ast.USub)


class ExpressionError(ValueError):
    pass


def _validate(node, variables, source):
    if isinstance(node, ast.Expression):
        return _validate(node.body, variables, source)
    if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
        _validate(node.left, variables, source)
        _validate(node.right, variables, source)
        return
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, _UNARY):
        _validate(node.operand, variables, source)
        return
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return
    if isinstance(node, ast.Name):
        if node.id in variables or node.id in CONSTANTS:
            return
        raise ExpressionError(f"unknown name {node.id!r} in {source!r}")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            raise ExpressionError(f"unsupported function call in {source!r}")
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes exactly one argument in {source!r}")
        _validate(node.args[0], variables, source)
        return
    raise ExpressionError(f"unsupported syntax {type(node).__name__} in {source!r}")


class Expression:
    """Compiled, picklable expression in the given variables.

    >>> Expression("1 + x^2", ("x",))(np.array([0.0, 2.0]))
    array([1., 5.])
    """

    def __init__(self, source: str, variables=("x",)):
        self.source = str(source).strip()
        self.variables = tuple(variables)
        if not self.source:
            raise ExpressionError("empty expression")
        self._compile()

    def _compile(self):
        text = self.source.replace("^", "**")
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"syntax error in {self.source!r}: {exc.msg}") from None
        _validate(tree, self.variables, self.source)
        self._code = compile(tree, "<expression>", "eval")

    def __getstate__(self):
        return {"source": self.source, "variables": self.variables}

    def __setstate__(self, state):
        self.source = state["source"]
        self.variables = state["variables"]
        self._compile()

    def __call__(self, *args):
        if len(args) != len(self.variables):
            raise TypeError(f"expected {len(self.variables)} arguments")
        env = dict(CONSTANTS)
        env.update(FUNCTIONS)
        env.update({name: np.asarray(a, dtype=float) for name, a in zip(self.variables, args)})
        with np.errstate(all="ignore"):
            value = eval(self._code, {"__builtins__": {}}, env)
        # constants broadcast to the shape of the first argument
        shape = np.broadcast(*[np.asarray(a) for a in args]).shape if args else ()
        return np.broadcast_to(np.asarray(value, dtype=float), shape).copy() if shape \
            else float(value)

    def __repr__(self):
        return f"Expression({self.source!r}, {self.variables!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and (self.source, self.variables) == \
            (other.source, other.variables)

    def __hash__(self):
        return hash((self.source, self.variables))
