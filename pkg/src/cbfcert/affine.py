"""Affine forms, two-sided affine enclosures, and interval matrices.

These are the shared currency of the bound algebra: every network, Jacobian,
and dynamics bound in this package is an affine function of some reference
variable (the state x or a pre-activation vector), bracketed from below and
above. Over a simplex an affine function attains its extrema at the vertices,
which is what makes these enclosures cheap to concretize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def pos_neg_split(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``m`` into its positive and negative parts.

    Returns ``(m_plus, m_minus)`` with ``m_plus = max(m, 0)``,
    ``m_minus = min(m, 0)``, so ``m_plus + m_minus == m`` exactly.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("pos_neg_split requires finite entries")
    return np.maximum(m, 0.0), np.minimum(m, 0.0)


@dataclass(frozen=True)
class AffineForm:
    """A scalar affine function ``x -> coeffs @ x + offset``."""

    coeffs: np.ndarray
    offset: float

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if coeffs.ndim != 1:
            raise ValueError("AffineForm coefficients must be a vector")
        if not (np.all(np.isfinite(coeffs)) and np.isfinite(self.offset)):
            raise ValueError("AffineForm entries must be finite")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        return x @ self.coeffs + self.offset

    def __add__(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(self.coeffs + other.coeffs, self.offset + other.offset)

    def scale(self, a: float) -> "AffineForm":
        return AffineForm(a * self.coeffs, a * self.offset)


def eval_affine_extrema(form: AffineForm, simplex) -> tuple[float, float]:
    """Exact min/max of an affine form over a simplex (attained at vertices)."""
    vertices = np.asarray(getattr(simplex, "vertices", simplex), dtype=float)
    if vertices.ndim != 2 or vertices.shape[1] != form.dim:
        raise ValueError(
            f"dimension mismatch: form has dim {form.dim}, "
            f"simplex vertices have shape {vertices.shape}"
        )
    values = vertices @ form.coeffs + form.offset
    return float(values.min()), float(values.max())


@dataclass(frozen=True)
class IntervalMatrix:
    """Elementwise interval ``[lo, hi]`` around a real matrix or tensor."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape:
            raise ValueError("interval bounds must share a shape")
        if np.any(lo > hi):
            raise ValueError("interval lower bound exceeds upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, values: np.ndarray, slack: float = 0.0) -> bool:
        values = np.asarray(values, dtype=float)
        return bool(
            np.all(values >= self.lo - slack) and np.all(values <= self.hi + slack)
        )


@dataclass(frozen=True)
class AffineEnclosure:
    """Two-sided affine bounds on a (possibly tensor-valued) quantity.

    The enclosed quantity ``Q`` has index shape ``shape`` and is a function of
    a reference variable ``y`` of dimension ``var_dim``; for every index and
    every admissible ``y``::

        lower_coeffs[idx] @ y + lower_offset[idx]
            <= Q[idx](y) <= upper_coeffs[idx] @ y + upper_offset[idx]

    Coefficient arrays have shape ``shape + (var_dim,)`` and offsets have
    shape ``shape``.
    """

    lower_coeffs: np.ndarray
    lower_offset: np.ndarray
    upper_coeffs: np.ndarray
    upper_offset: np.ndarray
    region_id: int | None = None

    def __post_init__(self):
        lc = np.asarray(self.lower_coeffs, dtype=float)
        lo = np.asarray(self.lower_offset, dtype=float)
        uc = np.asarray(self.upper_coeffs, dtype=float)
        uo = np.asarray(self.upper_offset, dtype=float)
        if lc.shape != uc.shape or lo.shape != uo.shape:
            raise ValueError("lower and upper bounds must share index shapes")
        if lc.shape[:-1] != lo.shape:
            raise ValueError("coefficient and offset shapes are inconsistent")
        for name, arr in (("lower_coeffs", lc), ("lower_offset", lo),
                          ("upper_coeffs", uc), ("upper_offset", uo)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        object.__setattr__(self, "lower_coeffs", lc)
        object.__setattr__(self, "lower_offset", lo)
        object.__setattr__(self, "upper_coeffs", uc)
        object.__setattr__(self, "upper_offset", uo)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.lower_offset.shape

    @property
    def var_dim(self) -> int:
        return self.lower_coeffs.shape[-1]

    def _eval(self, coeffs: np.ndarray, offset: np.ndarray, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        squeeze = y.ndim == 1
        values = np.einsum("...d,bd->b...", coeffs, np.atleast_2d(y)) + offset
        return values[0] if squeeze else values

    def lower_at(self, y: np.ndarray) -> np.ndarray:
        """Evaluate all lower forms at ``y`` (shape ``(var_dim,)`` or ``(B, var_dim)``)."""
        return self._eval(self.lower_coeffs, self.lower_offset, y)

    def upper_at(self, y: np.ndarray) -> np.ndarray:
        return self._eval(self.upper_coeffs, self.upper_offset, y)

    def lower_form(self, idx: tuple | int = ()) -> AffineForm:
        if not isinstance(idx, tuple):
            idx = (idx,)
        return AffineForm(self.lower_coeffs[idx], float(self.lower_offset[idx]))

    def upper_form(self, idx: tuple | int = ()) -> AffineForm:
        if not isinstance(idx, tuple):
            idx = (idx,)
        return AffineForm(self.upper_coeffs[idx], float(self.upper_offset[idx]))

    def pad(self, eps: float) -> "AffineEnclosure":
        """Widen both sides by a defensive slack ``eps >= 0``."""
        if eps == 0.0:
            return self
        return AffineEnclosure(
            self.lower_coeffs, self.lower_offset - eps,
            self.upper_coeffs, self.upper_offset + eps, self.region_id,
        )

    def interval_over(self, vertices: np.ndarray) -> IntervalMatrix:
        """Concretize over a simplex by projecting every vertex.

        The lower forms are minimized and the upper forms maximized over the
        vertex set, which is exact for affine functions on a simplex.
        """
        vertices = np.asarray(vertices, dtype=float)
        lows = np.einsum("...d,vd->v...", self.lower_coeffs, vertices) + self.lower_offset
        highs = np.einsum("...d,vd->v...", self.upper_coeffs, vertices) + self.upper_offset
        return IntervalMatrix(lows.min(axis=0), highs.max(axis=0))

    def contains(self, y: np.ndarray, values: np.ndarray, slack: float = 0.0) -> bool:
        """Check ``lower(y) - slack <= values <= upper(y) + slack`` for sampled ``y``."""
        lo = self.lower_at(y)
        hi = self.upper_at(y)
        values = np.asarray(values, dtype=float)
        return bool(np.all(values >= lo - slack) and np.all(values <= hi + slack))


def exact_enclosure(coeffs: np.ndarray, offset: np.ndarray,
                    region_id: int | None = None) -> AffineEnclosure:
    """Enclosure whose lower and upper forms coincide (an exact affine map)."""
    coeffs = np.asarray(coeffs, dtype=float)
    offset = np.asarray(offset, dtype=float)
    return AffineEnclosure(coeffs, offset, coeffs.copy(), offset.copy(), region_id)


def constant_enclosure(values: np.ndarray, var_dim: int,
                       region_id: int | None = None) -> AffineEnclosure:
    """Exact enclosure of a constant, with zero coefficients in ``var_dim`` vars."""
    values = np.asarray(values, dtype=float)
    coeffs = np.zeros(values.shape + (var_dim,))
    return exact_enclosure(coeffs, values, region_id)


def substitute(outer: AffineEnclosure, inner: AffineEnclosure) -> AffineEnclosure:
    """Re-express ``outer`` (affine in y) in the variable of ``inner`` (y affine in x).

    ``inner`` must enclose the vector y, i.e. have shape ``(d,)`` with
    ``d == outer.var_dim``. Coefficients of ``outer`` are sign-split against
    the lower/upper forms of ``inner``, which keeps the result sound.
    """
    if inner.shape != (outer.var_dim,):
        raise ValueError(
            f"cannot substitute: outer expects {outer.var_dim} variables, "
            f"inner encloses shape {inner.shape}"
        )
    olp, oln = pos_neg_split(outer.lower_coeffs)
    oup, oun = pos_neg_split(outer.upper_coeffs)

    lower_coeffs = (np.einsum("...d,dn->...n", olp, inner.lower_coeffs)
                    + np.einsum("...d,dn->...n", oln, inner.upper_coeffs))
    lower_offset = (outer.lower_offset
                    + np.einsum("...d,d->...", olp, inner.lower_offset)
                    + np.einsum("...d,d->...", oln, inner.upper_offset))
    upper_coeffs = (np.einsum("...d,dn->...n", oup, inner.upper_coeffs)
                    + np.einsum("...d,dn->...n", oun, inner.lower_coeffs))
    upper_offset = (outer.upper_offset
                    + np.einsum("...d,d->...", oup, inner.upper_offset)
                    + np.einsum("...d,d->...", oun, inner.lower_offset))
    return AffineEnclosure(lower_coeffs, lower_offset, upper_coeffs, upper_offset,
                           inner.region_id)
