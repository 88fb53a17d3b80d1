"""The six benchmark systems, generated symbolically.

Each system is declared as sympy expressions; evaluators and Jacobians are
lambdified to vectorized numpy, and every Hessian entry is compiled into an
interval evaluator so its range over any box is bounded soundly. The safe
sets that accompany the benchmarks live here too.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import sympy as sp

from .dynamics import DynamicsModel
from .intervals import Interval, interval_lambdify
from .safesets import AxisBox, Disk, PolyHalfspace, SafeSetDef

BUILTIN_NAMES = ("darboux", "barrier2", "barrier3", "barrier4", "control2d", "cartpole")

CARTPOLE_DEFAULTS = {
    "m_c": 1.0,      # cart mass [kg]
    "m_p": 0.1,      # pole mass [kg]
    "length": 0.5,   # pole length [m]
    "gravity": 9.81,
    "mu_p": 0.01,    # pole friction coefficient
}


def _tensor_lambdify(exprs: np.ndarray, xs: list[sp.Symbol]):
    """Vectorized evaluator for an object-array of sympy expressions.

    The returned callable maps points of shape ``(..., n)`` to arrays of
    shape ``(...,) + exprs.shape``, broadcasting constant entries.
    """
    exprs = np.asarray(exprs, dtype=object)
    flat = [sp.lambdify(xs, e, "numpy") for e in exprs.ravel()]

    def run(x):
        x = np.asarray(x, dtype=float)
        cols = [x[..., i] for i in range(len(xs))]
        lead = x.shape[:-1]
        out = np.empty(lead + exprs.shape, dtype=float)
        flat_out = out.reshape(lead + (len(flat),)) if exprs.shape else out[..., None]
        for k, fn in enumerate(flat):
            flat_out[..., k] = fn(*cols)
        return out

    return run


def _hessian_bounds_fn(exprs: np.ndarray, xs: list[sp.Symbol]):
    """Compile interval evaluators for the Hessian entries of each expression.

    ``exprs`` has an arbitrary leading shape; the returned callable maps a
    box ``(lo, hi)`` to interval bound arrays of shape
    ``exprs.shape + (n, n)``.
    """
    exprs = np.asarray(exprs, dtype=object)
    n = len(xs)
    entries = []  # (flat_index, a, b, evaluator) for non-constant-zero entries
    for idx, expr in enumerate(exprs.ravel()):
        hess = sp.hessian(sp.sympify(expr), xs) if xs else sp.zeros(0)
        for a in range(n):
            for b in range(n):
                entry = sp.simplify(hess[a, b])
                if entry == 0:
                    continue
                entries.append((idx, a, b, interval_lambdify(entry, xs)))

    shape = exprs.shape + (n, n)
    flat_size = int(np.prod(exprs.shape, dtype=int)) if exprs.shape else 1

    def run(box_lo, box_hi):
        box = [Interval(float(a), float(b)) for a, b in zip(box_lo, box_hi)]
        lo = np.zeros((flat_size, n, n))
        hi = np.zeros((flat_size, n, n))
        for idx, a, b, fn in entries:
            iv = fn(box)
            lo[idx, a, b] = iv.lo
            hi[idx, a, b] = iv.hi
        return lo.reshape(shape), hi.reshape(shape)

    return run


def _assemble(name: str, f_exprs, g_exprs, xs, u_lo, u_hi) -> DynamicsModel:
    n, m = len(f_exprs), len(u_lo)
    f_arr = np.asarray(f_exprs, dtype=object)
    eval_f = _tensor_lambdify(f_arr, xs)
    jf = np.asarray(sp.Matrix(f_exprs).jacobian(xs), dtype=object)
    jac_f = _tensor_lambdify(jf, xs)
    hess_f = _hessian_bounds_fn(f_arr, xs)

    if m:
        g_arr = np.asarray(g_exprs, dtype=object)      # (n, m)
        eval_g = _tensor_lambdify(g_arr, xs)
        jg = np.empty((n, m, n), dtype=object)
        for p in range(n):
            for j in range(m):
                for k in range(n):
                    jg[p, j, k] = sp.diff(g_arr[p, j], xs[k])
        jac_g = _tensor_lambdify(jg, xs)
        hess_g = _hessian_bounds_fn(g_arr, xs)
    else:
        def eval_g(x):
            x = np.asarray(x, dtype=float)
            return np.zeros(x.shape[:-1] + (n, 0))

        def jac_g(x):
            x = np.asarray(x, dtype=float)
            return np.zeros(x.shape[:-1] + (n, 0, n))

        def hess_g(box_lo, box_hi):
            return np.zeros((n, 0, n, n)), np.zeros((n, 0, n, n))

    return DynamicsModel(
        name=name, state_dim=n, control_dim=m,
        control_lo=np.asarray(u_lo, dtype=float),
        control_hi=np.asarray(u_hi, dtype=float),
        eval_f=eval_f, eval_g=eval_g, jac_f=jac_f, jac_g=jac_g,
        hess_bounds_f=hess_f, hess_bounds_g=hess_g,
    )


def _cartpole_params(params: dict | None) -> tuple[float, ...]:
    merged = dict(CARTPOLE_DEFAULTS)
    if params:
        unknown = set(params) - set(CARTPOLE_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown cart-pole parameters: {sorted(unknown)}")
        merged.update(params)
    for key in ("m_c", "m_p", "length"):
        if merged[key] <= 0:
            raise ValueError(f"cart-pole parameter {key} must be positive")
    return tuple(merged[k] for k in ("m_c", "m_p", "length", "gravity", "mu_p"))


@lru_cache(maxsize=None)
def _cached_model(name: str, param_items: tuple) -> DynamicsModel:
    params = dict(param_items)
    if name == "darboux":
        x1, x2 = sp.symbols("x1 x2")
        f = [x2 + 2 * x1 * x2, -x1 - x2**2 + 2 * x1**2]
        return _assemble(name, f, [], [x1, x2], [], [])
    if name == "barrier2":
        x1, x2 = sp.symbols("x1 x2")
        f = [sp.exp(-x1) + x2 - 1, -sp.sin(x1) ** 2]
        return _assemble(name, f, [], [x1, x2], [], [])
    if name == "barrier3":
        x1, x2 = sp.symbols("x1 x2")
        f = [x2, -x1 - x2 + x1**3 / 3]
        return _assemble(name, f, [], [x1, x2], [], [])
    if name == "barrier4":
        v = params.get("v", 1.0)
        x, y, phi = sp.symbols("x y phi")
        f = [
            v * sp.sin(phi),
            v * sp.cos(phi),
            -sp.sin(phi) + 3 * (x * sp.sin(phi) + y * sp.cos(phi)) / (sp.Rational(1, 2) + x**2 + y**2),
        ]
        return _assemble(name, f, [], [x, y, phi], [], [])
    if name == "control2d":
        x1, x2 = sp.symbols("x1 x2")
        f = [-x1 * x2, -x2**2]
        g = [[1, 0], [0, 1]]
        return _assemble(name, f, g, [x1, x2], [-0.5, -0.5], [0.5, 0.5])
    if name == "cartpole":
        m_c, m_p, length, gravity, mu_p = _cartpole_params(params)
        y, dy, th, dth = sp.symbols("y dy theta dtheta")
        total = m_c + m_p
        denom = length * (sp.Rational(4, 3) - m_p * sp.cos(th) ** 2 / total)
        th_acc = (
            gravity * sp.sin(th)
            + sp.cos(th) * (-m_p * length * dth**2 * sp.sin(th)) / total
            - mu_p * dth / (m_p * length)
        ) / denom
        y_acc = m_p * length * (dth**2 * sp.sin(th) - th_acc * sp.cos(th)) / total
        g_th = -sp.cos(th) / (total * denom)
        g_y = (1 - m_p * length * sp.cos(th) * g_th) / total
        f = [dy, y_acc, dth, th_acc]
        g = [[0], [g_y], [0], [g_th]]
        u_max = params.get("u_max", 10.0)
        return _assemble(name, f, g, [y, dy, th, dth], [-u_max], [u_max])
    raise ValueError(f"unknown system {name!r}; choose from {BUILTIN_NAMES}")


def builtin_system(name: str, params: dict | None = None) -> DynamicsModel:
    """Construct one of the six benchmark systems by name."""
    items = tuple(sorted((params or {}).items()))
    return _cached_model(name, items)


def builtin_safe_set(name: str) -> SafeSetDef:
    """State box and obstacle layout accompanying each benchmark system."""
    if name == "darboux":
        return SafeSetDef(
            [-2.0, -2.0], [2.0, 2.0],
            (PolyHalfspace(((1.0, (1, 0)), (1.0, (0, 2)))),),  # x1 + x2^2 <= 0
        )
    if name == "barrier2":
        return SafeSetDef([-2.0, -2.0], [2.0, 2.0], (Disk([0.7, -0.7], 0.3),))
    if name == "barrier3":
        return SafeSetDef(
            [-3.0, -2.0], [2.5, 1.0],
            (
                Disk([-1.0, -1.0], 0.4),
                AxisBox([0.4, 0.1], [0.6, 0.5]),
                AxisBox([0.4, 0.1], [0.8, 0.3]),
            ),
        )
    if name == "barrier4":
        return SafeSetDef(
            [-2.0, -2.0, -math.pi / 2], [2.0, 2.0, math.pi / 2],
            (Disk([0.0, 0.0], 0.2, dims=(0, 1)),),
        )
    if name == "control2d":
        return SafeSetDef([-3.0, -2.0], [3.0, 2.0], (Disk([1.5, 0.0], 0.3),))
    if name == "cartpole":
        lo = [-2.4, -3.0, -math.pi / 6, -2.0]
        hi = [2.4, 3.0, math.pi / 6, 2.0]
        return SafeSetDef(
            lo, hi,
            (
                AxisBox([-2.4, -3.0, -math.pi / 6, -2.0], [-2.0, 3.0, math.pi / 6, 2.0]),
                AxisBox([2.0, -3.0, -math.pi / 6, -2.0], [2.4, 3.0, math.pi / 6, 2.0]),
            ),
        )
    raise ValueError(f"unknown system {name!r}; choose from {BUILTIN_NAMES}")
