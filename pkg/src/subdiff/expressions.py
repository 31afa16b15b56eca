"""Tiny expression compiler for config-defined problems.

Custom coefficient fields, sources and exact solutions cross the CLI
boundary as strings like "(1+1j)*x" or "exp(-x*t)*sin(pi*x)". Only the
function class the bundled examples use is supported: arithmetic,
powers, exp/trig/sqrt/gamma, the constants pi and e, and the declared
variables. Anything else is rejected at compile time.
"""

from __future__ import annotations

import ast
from typing import Callable

import numpy as np
from scipy.special import gamma as _gamma

from .errors import ParameterError

_ALLOWED_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "gamma": _gamma,
    "re": np.real,
    "im": np.imag,
}

_ALLOWED_CONSTS = {
    "pi": np.pi,
    "e": np.e,
}

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
    ast.Constant, ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub,
    ast.UAdd,
)


def compile_expression(text: str, variables: tuple[str, ...]) -> Callable:
    """Compile `text` to a vectorized callable of the named variables."""
    if not isinstance(text, str) or not text.strip():
        raise ParameterError("expression must be a nonempty string")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ParameterError(f"cannot parse expression {text!r}: {exc}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ParameterError(
                f"expression {text!r} uses unsupported syntax: {type(node).__name__}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float, complex)):
            raise ParameterError(f"non-numeric constant in {text!r}: {node.value!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_FUNCS:
                raise ParameterError(f"unsupported function call in {text!r}")
            if node.keywords:
                raise ParameterError("keyword arguments are not supported")
        if isinstance(node, ast.Name):
            name = node.id
            if name not in variables and name not in _ALLOWED_FUNCS \
                    and name not in _ALLOWED_CONSTS:
                raise ParameterError(
                    f"unknown name {name!r} in expression {text!r}; "
                    f"variables here are {variables}")
    code = compile(tree, "<expression>", "eval")
    namespace = {**_ALLOWED_FUNCS, **_ALLOWED_CONSTS}

    def evaluate(*args):
        if len(args) != len(variables):
            raise ParameterError(
                f"expression of {variables} called with {len(args)} arguments")
        local = dict(zip(variables, args))
        return eval(code, {"__builtins__": {}}, {**namespace, **local})

    evaluate.__doc__ = f"compiled expression: {text!r} of {variables}"
    return evaluate
