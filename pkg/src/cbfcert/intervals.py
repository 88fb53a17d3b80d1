"""Minimal scalar interval arithmetic and a sympy-to-interval translator.

Used to produce guaranteed bounds on Hessian entries of the benchmark
dynamics over a box, and to classify simplices against polynomial obstacle
surfaces. Only the operations appearing in those closed forms are supported:
ring operations, integer powers, division by a sign-definite interval, and
sin/cos/exp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import sympy as sp


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __add__(self, other):
        other = _coerce(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        products = (self.lo * other.lo, self.lo * other.hi,
                    self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.lo <= 0.0 <= other.hi:
            raise ZeroDivisionError(
                f"division by interval [{other.lo}, {other.hi}] containing zero"
            )
        return self * Interval(1.0 / other.hi, 1.0 / other.lo)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("interval powers must have integer exponents")
        if k < 0:
            return Interval(1.0, 1.0) / self ** (-k)
        if k == 0:
            return Interval(1.0, 1.0)
        if k % 2 == 1:
            return Interval(self.lo**k, self.hi**k)
        lo_k, hi_k = self.lo**k, self.hi**k
        if self.lo <= 0.0 <= self.hi:
            return Interval(0.0, max(lo_k, hi_k))
        return Interval(min(lo_k, hi_k), max(lo_k, hi_k))

    def exp(self):
        return Interval(math.exp(self.lo), math.exp(self.hi))

    def sin(self):
        return _trig_range(self.lo, self.hi, phase=0.0)

    def cos(self):
        # cos(x) = sin(x + pi/2)
        return _trig_range(self.lo, self.hi, phase=math.pi / 2.0)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack


def _coerce(value) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval(float(value), float(value))


def _trig_range(lo: float, hi: float, phase: float) -> Interval:
    """Range of sin over [lo + phase, hi + phase], extremum-aware."""
    a, b = lo + phase, hi + phase
    if b - a >= 2.0 * math.pi:
        return Interval(-1.0, 1.0)
    vals = [math.sin(a), math.sin(b)]
    # Interior critical points at pi/2 + k*pi.
    k_min = math.ceil((a - math.pi / 2.0) / math.pi)
    k_max = math.floor((b - math.pi / 2.0) / math.pi)
    for k in range(k_min, k_max + 1):
        vals.append(1.0 if k % 2 == 0 else -1.0)
    return Interval(min(vals), max(vals))


def interval_lambdify(expr: sp.Expr, symbols: list[sp.Symbol]):
    """Compile a sympy expression into an interval evaluator.

    Returns a callable taking one :class:`Interval` per symbol and returning
    a sound :class:`Interval` for the expression over the box they span.
    """
    expr = sp.expand(sp.together(expr))
    index = {s: i for i, s in enumerate(symbols)}

    def build(node):
        if node.is_Number:
            value = float(node)
            return lambda box: _coerce(value)
        if node.is_Symbol:
            i = index[node]
            return lambda box: box[i]
        if node is sp.pi:
            return lambda box: _coerce(math.pi)
        if node.is_Add:
            parts = [build(arg) for arg in node.args]
            def run_add(box):
                total = parts[0](box)
                for part in parts[1:]:
                    total = total + part(box)
                return total
            return run_add
        if node.is_Mul:
            parts = [build(arg) for arg in node.args]
            def run_mul(box):
                total = parts[0](box)
                for part in parts[1:]:
                    total = total * part(box)
                return total
            return run_mul
        if node.is_Pow:
            base, expo = node.args
            if not (expo.is_Integer or (expo.is_Rational and expo.q == 1)):
                raise NotImplementedError(f"non-integer power {node}")
            inner = build(base)
            k = int(expo)
            return lambda box: inner(box) ** k
        if isinstance(node, sp.sin):
            inner = build(node.args[0])
            return lambda box: inner(box).sin()
        if isinstance(node, sp.cos):
            inner = build(node.args[0])
            return lambda box: inner(box).cos()
        if isinstance(node, sp.exp):
            inner = build(node.args[0])
            return lambda box: inner(box).exp()
        raise NotImplementedError(f"unsupported operation {type(node).__name__} in {node}")

    evaluator = build(expr)

    def run(box: list[Interval]) -> Interval:
        return evaluator(box)

    return run
