"""Linear relaxations of activation functions and their derivatives.

For an activation sigma and a scalar interval [l, u], these routines produce
two parallel-ish lines bracketing sigma (value relaxation) and two lines
bracketing sigma' (derivative relaxation). All routines are vectorized over
arrays of intervals, which is how the bound propagation consumes them (one
interval per neuron).

Constructions per kind:

* ReLU / leaky ReLU: exact on the affine pieces, chord/flat lines when the
  interval straddles the kink.
* Sigmoid / tanh values: midpoint tangent plus chord on one-sided regions;
  on a sign-crossing interval the endpoint tangent is used whenever it stays
  on the correct side of the far endpoint, otherwise the tangent line
  anchored at the far endpoint (found by bisection) replaces it. Both choices
  keep the relaxation gap non-increasing under interval refinement.
* Derivatives of sigmoid/tanh: both lines share the chord slope of sigma';
  offsets come from the exact extrema of sigma'(y) - slope*y over [l, u],
  whose interior critical points are roots of a cubic in sigma(y) resp.
  tanh(y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Activation

_CUBIC_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class LinearRelaxation:
    """Bounding lines ``lower_slope*y + lower_offset <= target(y) <= upper_slope*y + upper_offset``."""

    lower_slope: np.ndarray
    lower_offset: np.ndarray
    upper_slope: np.ndarray
    upper_offset: np.ndarray

    def lower_at(self, y):
        return self.lower_slope * y + self.lower_offset

    def upper_at(self, y):
        return self.upper_slope * y + self.upper_offset


class NoTangentPointError(ValueError):
    """No cubic root fell inside the activation's valid range."""


def _as_arrays(l, u):
    l = np.atleast_1d(np.asarray(l, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if l.shape != u.shape:
        raise ValueError("interval endpoint arrays must share a shape")
    if np.any(np.isnan(l)) or np.any(np.isnan(u)):
        raise ValueError("interval endpoints must not be NaN")
    if np.any(l > u):
        raise ValueError("interval lower endpoints exceed upper endpoints")
    return l, u


def _restore(shape_like, *arrays):
    if np.isscalar(shape_like) or np.asarray(shape_like).ndim == 0:
        return tuple(float(a[0]) for a in arrays)
    return tuple(a for a in arrays)


def _sigmoid(y):
    out = np.empty_like(np.asarray(y, dtype=float))
    y = np.asarray(y, dtype=float)
    pos = y >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-y[pos]))
    ey = np.exp(y[~pos])
    out[~pos] = ey / (1.0 + ey)
    return out


def _sigmoid_deriv(y):
    s = _sigmoid(y)
    return s * (1.0 - s)


def _tanh_deriv(y):
    return 1.0 - np.tanh(y) ** 2


def _chord_slope(fl, fu, l, u):
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = (fu - fl) / (u - l)
    return slope


def _depressed_cubic_roots(p: float, q: np.ndarray) -> np.ndarray:
    """All real roots of ``s^3 + p s + q = 0`` for fixed ``p < 0``, vectorized.

    Returns shape ``(len(q), 3)`` with NaN where a slot has no real root.
    """
    q = np.asarray(q, dtype=float)
    roots = np.full(q.shape + (3,), np.nan)
    disc = -4.0 * p**3 - 27.0 * q**2
    three = disc >= 0.0
    if np.any(three):
        qp = q[three]
        amp = 2.0 * np.sqrt(-p / 3.0)
        arg = np.clip(3.0 * qp / (2.0 * p) * np.sqrt(-3.0 / p), -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        for k in range(3):
            roots[three, k] = amp * np.cos(theta - 2.0 * np.pi * k / 3.0)
    if np.any(~three):
        qo = q[~three]
        d = np.sqrt(qo**2 / 4.0 + p**3 / 27.0)
        roots[~three, 0] = np.cbrt(-qo / 2.0 + d) + np.cbrt(-qo / 2.0 - d)
    return roots


def _tangent_cubic_roots(kind: str, m_der: np.ndarray) -> np.ndarray:
    """Roots t of the derivative-envelope cubic, in activation output space.

    Sigmoid: ``2t^3 - 3t^2 + t - m = 0`` with ``t = sigmoid(x)``.
    Tanh: ``2t^3 - 2t - m = 0`` with ``t = tanh(x)``.
    Returns shape ``(len(m_der), 3)``, NaN-padded, Newton-polished, and
    residual-filtered.
    """
    m_der = np.atleast_1d(np.asarray(m_der, dtype=float))
    if kind == "sigmoid":
        # Monic shift t = s + 1/2 gives s^3 - s/4 - m/2.
        roots = _depressed_cubic_roots(-0.25, -m_der / 2.0) + 0.5
        coeffs = (2.0, -3.0, 1.0)
    elif kind == "tanh":
        roots = _depressed_cubic_roots(-1.0, -m_der / 2.0)
        coeffs = (2.0, 0.0, -2.0)
    else:
        raise ValueError(f"no tangent cubic for activation {kind!r}")
    a, b, c = coeffs
    d = -m_der[:, None]
    with np.errstate(invalid="ignore"):
        f = a * roots**3 + b * roots**2 + c * roots + d
        fp = 3 * a * roots**2 + 2 * b * roots + c
        step = np.where(np.abs(fp) > 1e-14, f / np.where(fp == 0, 1.0, fp), 0.0)
        roots = roots - step
        residual = a * roots**3 + b * roots**2 + c * roots + d
        roots[np.abs(residual) > _CUBIC_RESIDUAL_TOL] = np.nan
    return roots


def solve_tangent_cubic(kind: str, m_der: float) -> np.ndarray:
    """Pre-activation coordinates where sigma' has tangent slope ``m_der``.

    Maps valid cubic roots through logit (sigmoid) or artanh (tanh) and
    returns them sorted. Raises :class:`NoTangentPointError` when no root
    lies in the open valid range, signalling the caller to fall back to an
    interval-constant relaxation.
    """
    roots = _tangent_cubic_roots(kind, m_der)[0]
    if kind == "sigmoid":
        valid = (roots > 1e-15) & (roots < 1.0 - 1e-15)
        xs = np.log(roots[valid] / (1.0 - roots[valid]))
    else:
        valid = np.abs(roots) < 1.0 - 1e-15
        xs = np.arctanh(roots[valid])
    xs = np.sort(xs[np.isfinite(xs)])
    if xs.size == 0:
        raise NoTangentPointError(
            f"no {kind} tangent point for derivative slope {m_der}"
        )
    return xs


def _mixed_lower(sig, dsig, l, u):
    """Sound lower line for an s-shaped activation on sign-crossing intervals.

    Uses the tangent at ``l`` where it stays below the curve at ``u``;
    otherwise the line through ``(u, sig(u))`` tangent to the convex left
    branch. That contact point lies left of ``l`` and is found by bisection
    on ``phi(x) = sig(x) + sig'(x) (u - x) - sig(u)``, which increases
    monotonically on the left branch.
    """
    fl, fu = sig(l), sig(u)
    dl = dsig(l)
    slope = dl.copy()
    offset = fl - dl * l
    overshoot = slope * u + offset > fu
    if np.any(overshoot):
        uu, fuu = u[overshoot], fu[overshoot]
        hi = l[overshoot].copy()  # phi(hi) > 0 in the overshoot case
        lo = hi - 1.0

        def phi(x):
            return sig(x) + dsig(x) * (uu - x) - fuu

        for _ in range(60):
            pending = phi(lo) >= 0.0
            if not pending.any():
                break
            lo = np.where(pending, hi - 2.0 * (hi - lo), lo)
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            neg = phi(mid) < 0.0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
        contact = 0.5 * (lo + hi)
        dc = dsig(contact)
        slope[overshoot] = dc
        offset[overshoot] = sig(contact) - dc * contact
    return slope, offset


def relax_value(act: Activation, l, u):
    """Sound value relaxation of ``act`` over interval(s) ``[l, u]``.

    Accepts scalars or same-shaped arrays and returns a
    :class:`LinearRelaxation` with matching field shapes. The relaxation is
    exact (coinciding lines) wherever the activation is affine on the
    interval, and a point interval gets the exact tangent line.
    """
    l_arr, u_arr = _as_arrays(l, u)
    kind = act.kind
    if kind == "identity":
        one, zero = np.ones_like(l_arr), np.zeros_like(l_arr)
        return LinearRelaxation(*_restore(l, one, zero, one.copy(), zero.copy()))

    ls = np.zeros_like(l_arr)
    lo = np.zeros_like(l_arr)
    us = np.zeros_like(l_arr)
    uo = np.zeros_like(l_arr)

    if kind in ("relu", "leaky_relu"):
        alpha = act.leaky_slope if kind == "leaky_relu" else 0.0
        active = l_arr >= 0.0
        inactive = ~active & (u_arr <= 0.0)
        unstable = ~active & ~inactive
        ls[active] = us[active] = 1.0
        ls[inactive] = us[inactive] = alpha
        if np.any(unstable):
            lu, uu = l_arr[unstable], u_arr[unstable]
            up_slope = (uu - alpha * lu) / (uu - lu)
            ls[unstable] = alpha
            us[unstable] = up_slope
            uo[unstable] = uu - up_slope * uu
        return LinearRelaxation(*_restore(l, ls, lo, us, uo))

    if kind == "sigmoid":
        sig, dsig = _sigmoid, _sigmoid_deriv
    elif kind == "tanh":
        sig, dsig = np.tanh, _tanh_deriv
    else:  # pragma: no cover - Activation validates kinds
        raise ValueError(f"unknown activation {kind!r}")

    point = l_arr == u_arr
    convex = ~point & (u_arr <= 0.0)
    concave = ~point & ~convex & (l_arr >= 0.0)
    mixed = ~point & ~convex & ~concave

    if np.any(point):
        lp = l_arr[point]
        slope = dsig(lp)
        ls[point] = us[point] = slope
        lo[point] = uo[point] = sig(lp) - slope * lp

    fl, fu = sig(l_arr), sig(u_arr)
    m_act = _chord_slope(fl, fu, l_arr, u_arr)

    if kind == "sigmoid":
        mid = 0.5 * (l_arr + u_arr)
        if np.any(convex):
            lc = l_arr[convex]
            tang = dsig(mid[convex])
            ls[convex] = tang
            lo[convex] = sig(mid[convex]) - tang * mid[convex]
            us[convex] = m_act[convex]
            uo[convex] = fl[convex] - m_act[convex] * lc
        if np.any(concave):
            lc = l_arr[concave]
            ls[concave] = m_act[concave]
            lo[concave] = fl[concave] - m_act[concave] * lc
            tang = dsig(mid[concave])
            us[concave] = tang
            uo[concave] = sig(mid[concave]) - tang * mid[concave]
        if np.any(mixed):
            lm, um = l_arr[mixed], u_arr[mixed]
            slope, offset = _mixed_lower(sig, dsig, lm, um)
            ls[mixed] = slope
            lo[mixed] = offset
            # Upper line by the reflection sigmoid(y) = 1 - sigmoid(-y).
            slope, offset = _mixed_lower(sig, dsig, -um, -lm)
            us[mixed] = slope
            uo[mixed] = 1.0 - offset
    else:  # tanh
        mid = 0.5 * (l_arr + u_arr)
        if np.any(convex):
            uc = u_arr[convex]
            tang = dsig(mid[convex])
            ls[convex] = tang
            lo[convex] = sig(mid[convex]) - tang * mid[convex]
            us[convex] = m_act[convex]
            uo[convex] = fu[convex] - m_act[convex] * uc
        if np.any(concave):
            lc = l_arr[concave]
            ls[concave] = m_act[concave]
            lo[concave] = fl[concave] - m_act[concave] * lc
            tang = dsig(mid[concave])
            us[concave] = tang
            uo[concave] = sig(mid[concave]) - tang * mid[concave]
        if np.any(mixed):
            lm, um = l_arr[mixed], u_arr[mixed]
            slope, offset = _mixed_lower(sig, dsig, lm, um)
            ls[mixed] = slope
            lo[mixed] = offset
            # Upper line by odd symmetry: mirror the lower construction.
            slope, offset = _mixed_lower(sig, dsig, -um, -lm)
            us[mixed] = slope
            uo[mixed] = -offset
    return LinearRelaxation(*_restore(l, ls, lo, us, uo))


def relax_derivative(act: Activation, l, u):
    """Sound relaxation of the activation derivative over ``[l, u]``.

    For sigmoid/tanh both lines share the chord slope of sigma' and the
    offsets are the exact extrema of ``sigma'(y) - slope*y`` over the
    interval (endpoints plus tangent-cubic critical points), making the
    relaxation tight at its contact points for every region shape.
    """
    l_arr, u_arr = _as_arrays(l, u)
    kind = act.kind
    zero = np.zeros_like(l_arr)

    if kind == "identity":
        one = np.ones_like(l_arr)
        return LinearRelaxation(*_restore(l, zero, one, zero.copy(), one.copy()))

    if kind in ("relu", "leaky_relu"):
        alpha = act.leaky_slope if kind == "leaky_relu" else 0.0
        lo = np.zeros_like(l_arr)
        uo = np.zeros_like(l_arr)
        active = l_arr >= 0.0
        inactive = ~active & (u_arr <= 0.0)
        unstable = ~active & ~inactive
        lo[active] = uo[active] = 1.0
        lo[inactive] = uo[inactive] = alpha
        lo[unstable] = alpha
        uo[unstable] = 1.0
        return LinearRelaxation(*_restore(l, zero, lo, zero.copy(), uo))

    if kind == "sigmoid":
        dsig = _sigmoid_deriv

        def second(y):
            s = _sigmoid(y)
            return s * (1.0 - s) * (1.0 - 2.0 * s)

        def to_x(t):
            good = (t > 1e-15) & (t < 1.0 - 1e-15)
            out = np.full_like(t, np.nan)
            out[good] = np.log(t[good] / (1.0 - t[good]))
            return out
    else:
        dsig = _tanh_deriv

        def second(y):
            t = np.tanh(y)
            return -2.0 * t * (1.0 - t**2)

        def to_x(t):
            good = np.abs(t) < 1.0 - 1e-15
            out = np.full_like(t, np.nan)
            out[good] = np.arctanh(t[good])
            return out

    point = l_arr == u_arr
    slope = np.where(point, second(l_arr),
                     _chord_slope(dsig(u_arr), dsig(l_arr), u_arr, l_arr))
    # Candidate abscissae for the extrema of sigma'(y) - slope*y: the two
    # endpoints and any tangent-cubic root strictly inside the interval.
    roots = _tangent_cubic_roots(kind, slope)
    xs = to_x(roots)
    inside = (xs > l_arr[:, None]) & (xs < u_arr[:, None])
    xs[~inside] = np.nan
    cand = np.concatenate([l_arr[:, None], u_arr[:, None], xs], axis=1)
    with np.errstate(invalid="ignore"):
        h = dsig(cand) - slope[:, None] * cand
    lo = np.nanmin(h, axis=1)
    uo = np.nanmax(h, axis=1)
    if np.any(point):
        lo[point] = uo[point] = dsig(l_arr[point]) - slope[point] * l_arr[point]
    return LinearRelaxation(*_restore(l, slope.copy(), lo, slope.copy(), uo))
