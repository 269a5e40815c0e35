"""Declarative piecewise-polynomial/power expressions for config files.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = factor { ("*" | "/") factor } ;
    factor  = ["-" | "+"] power ;
    power   = atom [ "**" factor ] ;
    atom    = number | name | call | "(" expr ")" ;
    call    = func "(" expr { "," expr } ")" ;
    name    = "t" | "u" | "v" | "pi" ;
    func    = "sqrt" | "abs" | "step" | "pos" | "min" | "max" ;

``step(x)`` is 1 for x > 0 and 0 otherwise; ``pos(x) = max(x, 0)``.
Expressions are parsed with :mod:`ast` and only the nodes above are accepted.
"""

from __future__ import annotations

import ast
from typing import Callable

import numpy as np

__all__ = ["compile_expr", "ExprError"]


class ExprError(ValueError):
    pass


_FUNCS = {
    "sqrt": np.sqrt,
    "abs": np.abs,
    "step": lambda x: np.where(np.asarray(x) > 0.0, 1.0, 0.0),
    "pos": lambda x: np.maximum(x, 0.0),
    "min": np.minimum,
    "max": np.maximum,
}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _build(node, names):
    if isinstance(node, ast.Expression):
        return _build(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        val = float(node.value)
        return lambda env: val
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return lambda env: np.pi
        if node.id not in names:
            raise ExprError(f"unknown variable {node.id!r}; allowed: {', '.join(names)}")
        key = node.id
        return lambda env: env[key]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        lhs, rhs = _build(node.left, names), _build(node.right, names)
        if isinstance(node.op, ast.Pow):
            # float power so that negative bases with integer exponents stay real
            return lambda env: np.power(np.asarray(lhs(env), dtype=float), rhs(env))
        return lambda env: op(lhs(env), rhs(env))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _build(node.operand, names)
        if isinstance(node.op, ast.USub):
            return lambda env: -inner(env)
        return inner
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords:
        fn = _FUNCS[node.func.id]
        args = [_build(a, names) for a in node.args]
        if node.func.id in ("min", "max"):
            if len(args) < 2:
                raise ExprError(f"{node.func.id} needs at least two arguments")

            def _fold(env, fn=fn, args=args):
                acc = args[0](env)
                for a in args[1:]:
                    acc = fn(acc, a(env))
                return acc

            return _fold
        if len(args) != 1:
            raise ExprError(f"{node.func.id} takes one argument")
        a0 = args[0]
        return lambda env: fn(a0(env))
    raise ExprError(f"unsupported syntax: {ast.dump(node)[:60]}")


def compile_expr(text: str, names=("t", "u", "v")) -> Callable:
    """Compile ``text`` into a numpy-vectorised function of ``names`` (positional)."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"cannot parse {text!r}: {exc.msg}") from None
    body = _build(tree, tuple(names))

    def fn(*args):
        if len(args) != len(names):
            raise TypeError(f"expected {len(names)} arguments")
        env = dict(zip(names, args))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = body(env)
        shape = np.broadcast(*[np.asarray(a) for a in args]).shape if args else ()
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy() if shape else float(out)

    fn.source = text
    return fn
