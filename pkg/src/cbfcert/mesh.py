"""Simplicial partition of the state box and longest-edge bisection."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .safesets import SafeSetDef


@dataclass(frozen=True)
class Simplex:
    """Convex hull of n+1 affinely independent vertices, with refinement bookkeeping."""

    vertices: np.ndarray  # (n+1, n)
    depth: int = 0
    id: int = 0
    parent_id: int | None = None

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
            raise ValueError(f"simplex in R^n needs (n+1, n) vertices, got {v.shape}")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def volume(self) -> float:
        edges = self.vertices[1:] - self.vertices[0]
        return abs(float(np.linalg.det(edges))) / math.factorial(self.dim)

    @property
    def barycenter(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    @property
    def diameter(self) -> float:
        diffs = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((diffs**2).sum(axis=-1)).max())

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform interior samples via Dirichlet barycentric weights."""
        w = rng.dirichlet(np.ones(self.dim + 1), size=count)
        return w @ self.vertices

    def contains_point(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        """Barycentric membership test."""
        a = np.concatenate([self.vertices.T, np.ones((1, self.dim + 1))])
        b = np.concatenate([np.asarray(x, dtype=float), [1.0]])
        try:
            lam = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            return False
        return bool(np.all(lam >= -tol))


def triangulate_box(lo, hi, grid=None, start_id: int = 0) -> list[Simplex]:
    """Kuhn triangulation of an axis-aligned box into ``cells * n!`` simplices.

    ``grid`` optionally splits the box into per-axis cell counts first; the
    simplices of each cell follow the coordinate-permutation construction, so
    the union tiles the box exactly with pairwise disjoint interiors.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    n = lo.shape[0]
    if hi.shape != lo.shape or np.any(hi <= lo):
        raise ValueError("box must be non-degenerate in every dimension")
    counts = np.ones(n, dtype=int) if grid is None else np.asarray(grid, dtype=int)
    if counts.shape != (n,) or np.any(counts < 1):
        raise ValueError("grid must give a positive cell count per axis")
    steps = (hi - lo) / counts

    simplices = []
    next_id = start_id
    for cell in itertools.product(*(range(c) for c in counts)):
        cell_lo = lo + steps * np.asarray(cell)
        for perm in itertools.permutations(range(n)):
            verts = np.empty((n + 1, n))
            verts[0] = cell_lo
            for k, axis in enumerate(perm):
                verts[k + 1] = verts[k]
                verts[k + 1, axis] += steps[axis]
            simplices.append(Simplex(verts, depth=0, id=next_id))
            next_id += 1
    return simplices


def longest_edge(s: Simplex) -> tuple[int, int]:
    """Vertex-index pair of the longest edge, ties broken lexicographically."""
    best: tuple[int, int] | None = None
    best_len = -1.0
    for i in range(s.dim + 1):
        for j in range(i + 1, s.dim + 1):
            length = float(np.linalg.norm(s.vertices[i] - s.vertices[j]))
            if length > best_len:
                best_len, best = length, (i, j)
    return best


def bisect_longest_edge(s: Simplex, id_a: int, id_b: int) -> tuple[Simplex, Simplex]:
    """Split at the longest-edge midpoint; child volumes sum to the parent's."""
    if s.volume == 0.0:
        raise ValueError(f"cannot bisect degenerate simplex {s.id}")
    i, j = longest_edge(s)
    mid = 0.5 * (s.vertices[i] + s.vertices[j])
    va = s.vertices.copy()
    va[j] = mid
    vb = s.vertices.copy()
    vb[i] = mid
    child_a = Simplex(va, depth=s.depth + 1, id=id_a, parent_id=s.id)
    child_b = Simplex(vb, depth=s.depth + 1, id=id_b, parent_id=s.id)
    return child_a, child_b


def classify_safe(s: Simplex, safe: SafeSetDef) -> str:
    """Conservative safe-set classification of a simplex."""
    return safe.classify_simplex(s.vertices)
