"""Certified first-order Taylor enclosures of control-affine dynamics.

Each dynamics entry is expanded at the simplex barycenter; the Lagrange
remainder is bracketed by combining interval bounds on the Hessian entries
with the exact Bernstein range of each quadratic monomial ``(x-c)_a (x-c)_b``
over the simplex. The result is an affine map plus a remainder rectangle,
i.e. a pair of parallel affine bounds on f (or g) valid on the whole simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .affine import AffineEnclosure, IntervalMatrix
from .mesh import Simplex


@dataclass(frozen=True)
class DynamicsModel:
    """Control-affine system ``x' = f(x) + g(x) u`` with certified derivative data.

    ``hess_bounds_f(box_lo, box_hi)`` returns per-entry interval bounds of
    shape ``(n, n, n)`` (output, row, column) valid over the box;
    ``hess_bounds_g`` analogously with shape ``(n, m, n, n)``.
    """

    name: str
    state_dim: int
    control_dim: int
    control_lo: np.ndarray
    control_hi: np.ndarray
    eval_f: Callable[[np.ndarray], np.ndarray]
    eval_g: Callable[[np.ndarray], np.ndarray]
    jac_f: Callable[[np.ndarray], np.ndarray]
    jac_g: Callable[[np.ndarray], np.ndarray]
    hess_bounds_f: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    hess_bounds_g: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.control_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.control_hi, dtype=float))
        if lo.shape != (self.control_dim,) or hi.shape != (self.control_dim,):
            raise ValueError("control bounds must have one entry per channel")
        if np.any(lo > hi):
            raise ValueError("control lower bounds exceed upper bounds")
        object.__setattr__(self, "control_lo", lo)
        object.__setattr__(self, "control_hi", hi)


@dataclass(frozen=True)
class TaylorEnclosure:
    """Barycentric first-order expansion plus a rigorous remainder rectangle."""

    coeffs: np.ndarray          # shape + (n,)
    offset: np.ndarray          # shape
    remainder_lo: np.ndarray    # shape
    remainder_hi: np.ndarray    # shape
    expansion_point: np.ndarray

    def affine_at(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        vals = np.einsum("...d,bd->b...", self.coeffs, np.atleast_2d(x)) + self.offset
        return vals[0] if single else vals

    def lower_at(self, x: np.ndarray) -> np.ndarray:
        return self.affine_at(x) + self.remainder_lo

    def upper_at(self, x: np.ndarray) -> np.ndarray:
        return self.affine_at(x) + self.remainder_hi

    def as_enclosure(self, region_id: int | None = None) -> AffineEnclosure:
        return AffineEnclosure(
            self.coeffs, self.offset + self.remainder_lo,
            self.coeffs.copy(), self.offset + self.remainder_hi, region_id,
        )

    def interval_over(self, vertices: np.ndarray) -> IntervalMatrix:
        return self.as_enclosure().interval_over(vertices)


def bernstein_remainder(
    vertices: np.ndarray,
    center: np.ndarray,
    hess_lo: np.ndarray,
    hess_hi: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Remainder rectangle from Hessian-entry intervals over a simplex.

    The quadratic monomial ``(x-c)_a (x-c)_b`` is a product of two linear
    forms, so its degree-2 Bernstein coefficients over the simplex are the
    symmetrized products of the forms' vertex values, and their min/max
    encloses the monomial's range exactly. Those ranges are combined with the
    Hessian-entry intervals (``hess_lo``/``hess_hi``, shape ``(..., n, n)``)
    by interval arithmetic and summed; the half factor of the Taylor
    remainder is applied at the end. Returns arrays of the leading shape.
    """
    vertices = np.asarray(vertices, dtype=float)
    center = np.asarray(center, dtype=float)
    hess_lo = np.asarray(hess_lo, dtype=float)
    hess_hi = np.asarray(hess_hi, dtype=float)
    if vertices.ndim != 2 or vertices.shape[0] != vertices.shape[1] + 1:
        raise ValueError("vertices must describe a non-degenerate simplex")
    diffs = vertices - center  # (V, n)
    pair = 0.5 * (np.einsum("ia,jb->abij", diffs, diffs)
                  + np.einsum("ib,ja->abij", diffs, diffs))
    mono_lo = pair.min(axis=(2, 3))  # (n, n)
    mono_hi = pair.max(axis=(2, 3))
    products = np.stack([
        hess_lo * mono_lo, hess_lo * mono_hi, hess_hi * mono_lo, hess_hi * mono_hi,
    ])
    term_lo = products.min(axis=0)
    term_hi = products.max(axis=0)
    return 0.5 * term_lo.sum(axis=(-2, -1)), 0.5 * term_hi.sum(axis=(-2, -1))


def taylor_enclosure(model: DynamicsModel, which: str,
                     simplex: Simplex) -> TaylorEnclosure:
    """Certified enclosure of f or g over a simplex, expanded at its barycenter."""
    if which not in ("f", "g"):
        raise ValueError("which must be 'f' or 'g'")
    c = simplex.barycenter
    box_lo, box_hi = simplex.bounding_box()
    if which == "f":
        value = np.asarray(model.eval_f(c), dtype=float)          # (n,)
        jac = np.asarray(model.jac_f(c), dtype=float)             # (n, n)
        hess_lo, hess_hi = model.hess_bounds_f(box_lo, box_hi)    # (n, n, n)
    else:
        value = np.asarray(model.eval_g(c), dtype=float)          # (n, m)
        jac = np.asarray(model.jac_g(c), dtype=float)             # (n, m, n)
        hess_lo, hess_hi = model.hess_bounds_g(box_lo, box_hi)    # (n, m, n, n)
    offset = value - np.einsum("...d,d->...", jac, c)
    r_lo, r_hi = bernstein_remainder(simplex.vertices, c, hess_lo, hess_hi)
    return TaylorEnclosure(jac, offset, r_lo, r_hi, c)
