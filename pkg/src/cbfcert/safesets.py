"""Safe-set geometry: state box minus obstacle regions.

Each obstacle supports exact point membership (used to validate
counterexamples) and a conservative simplex classification (used by the
mesh): ``"inside"`` is only reported when the simplex provably lies inside
the obstacle, ``"outside"`` only when it provably misses it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .intervals import Interval

INSIDE = "inside"        # simplex provably inside the safe set
OUTSIDE = "outside"      # simplex provably inside the unsafe region
STRADDLE = "straddle"

SAFE_CLASSES = frozenset((INSIDE, OUTSIDE, STRADDLE))


def _convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull; returns hull vertices in ccw order."""
    pts = np.unique(np.round(points, 15), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.asarray(lower[:-1] + upper[:-1])


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = np.clip(float((p - a) @ ab) / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def _point_hull_distance_2d(p: np.ndarray, points: np.ndarray) -> float:
    """Exact distance from a point to the convex hull of 2-d points."""
    hull = _convex_hull_2d(points)
    if len(hull) == 1:
        return float(np.linalg.norm(p - hull[0]))
    if len(hull) == 2:
        return _point_segment_distance(p, hull[0], hull[1])
    inside = True
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < 0:
            inside = False
            break
    if inside:
        return 0.0
    return min(
        _point_segment_distance(p, hull[i], hull[(i + 1) % len(hull)])
        for i in range(len(hull))
    )


@dataclass(frozen=True)
class Disk:
    """Closed ball obstacle on a subset of coordinates (default: first two)."""

    center: np.ndarray
    radius: float
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        dims = self.dims if self.dims is not None else tuple(range(len(center)))
        if len(dims) != len(center):
            raise ValueError("disk center and projection dims differ in length")
        if self.radius <= 0:
            raise ValueError("disk radius must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "dims", tuple(dims))

    def contains_point(self, x: np.ndarray) -> bool:
        p = np.asarray(x, dtype=float)[list(self.dims)]
        return float(np.linalg.norm(p - self.center)) <= self.radius

    def classify_simplex(self, vertices: np.ndarray) -> str:
        proj = np.asarray(vertices, dtype=float)[:, list(self.dims)]
        far = np.linalg.norm(proj - self.center, axis=1).max()
        if far <= self.radius:
            return INSIDE
        if len(self.dims) == 2:
            near = _point_hull_distance_2d(self.center, proj)
        elif len(self.dims) == 1:
            lo, hi = proj.min(), proj.max()
            c = self.center[0]
            near = 0.0 if lo <= c <= hi else min(abs(c - lo), abs(c - hi))
        else:
            # Bounding-box distance under-approximates the hull distance,
            # which keeps the disjointness test conservative.
            gap = np.maximum(proj.min(axis=0) - self.center,
                             self.center - proj.max(axis=0))
            near = float(np.linalg.norm(np.maximum(gap, 0.0)))
        if near > self.radius:
            return OUTSIDE
        return STRADDLE


@dataclass(frozen=True)
class AxisBox:
    """Axis-aligned box obstacle over the full state dimension."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("malformed box obstacle bounds")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains_point(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def classify_simplex(self, vertices: np.ndarray) -> str:
        v = np.asarray(vertices, dtype=float)
        if np.all(v >= self.lo) and np.all(v <= self.hi):
            return INSIDE
        vmin, vmax = v.min(axis=0), v.max(axis=0)
        if np.any(vmax < self.lo) or np.any(vmin > self.hi):
            return OUTSIDE
        return STRADDLE


@dataclass(frozen=True)
class PolyHalfspace:
    """Obstacle ``p(x) <= 0`` for a polynomial given as monomial terms.

    ``terms`` is a sequence of ``(coefficient, exponents)`` pairs where
    ``exponents`` has one non-negative integer per state dimension. The
    simplex classifier evaluates ``p`` with interval arithmetic over the
    simplex bounding box, which is conservative but exact enough once
    refinement shrinks regions.
    """

    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def __post_init__(self):
        terms = tuple((float(c), tuple(int(e) for e in exps))
                      for c, exps in self.terms)
        if not terms:
            raise ValueError("polynomial obstacle needs at least one term")
        dims = {len(exps) for _, exps in terms}
        if len(dims) != 1:
            raise ValueError("all terms must share the state dimension")
        object.__setattr__(self, "terms", terms)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        total = np.zeros(x.shape[0])
        for coef, exps in self.terms:
            term = np.full(x.shape[0], coef)
            for i, e in enumerate(exps):
                if e:
                    term = term * x[:, i] ** e
            total += term
        return total

    def contains_point(self, x: np.ndarray) -> bool:
        return bool(self.evaluate(x)[0] <= 0.0)

    def _interval_eval(self, lo: np.ndarray, hi: np.ndarray) -> Interval:
        box = [Interval(float(a), float(b)) for a, b in zip(lo, hi)]
        total = Interval(0.0, 0.0)
        for coef, exps in self.terms:
            term = Interval(coef, coef)
            for i, e in enumerate(exps):
                if e:
                    term = term * box[i] ** e
            total = total + term
        return total

    def classify_simplex(self, vertices: np.ndarray) -> str:
        v = np.asarray(vertices, dtype=float)
        rng = self._interval_eval(v.min(axis=0), v.max(axis=0))
        if rng.hi <= 0.0:
            return INSIDE
        if rng.lo > 0.0:
            return OUTSIDE
        return STRADDLE


Obstacle = Disk | AxisBox | PolyHalfspace


@dataclass(frozen=True)
class SafeSetDef:
    """State box minus a union of obstacles."""

    state_lo: np.ndarray
    state_hi: np.ndarray
    obstacles: tuple[Obstacle, ...] = field(default_factory=tuple)

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.state_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.state_hi, dtype=float))
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ValueError("state box must be non-degenerate")
        object.__setattr__(self, "state_lo", lo)
        object.__setattr__(self, "state_hi", hi)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @property
    def dim(self) -> int:
        return self.state_lo.shape[0]

    def in_state_box(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.state_lo) and np.all(x <= self.state_hi))

    def in_unsafe_region(self, x: np.ndarray) -> bool:
        """Exact membership in the unsafe region (within the state box)."""
        return any(obs.contains_point(x) for obs in self.obstacles)

    def is_safe_point(self, x: np.ndarray) -> bool:
        return self.in_state_box(x) and not self.in_unsafe_region(x)

    def classify_simplex(self, vertices: np.ndarray) -> str:
        """Conservative classification of a simplex against the safe set."""
        verdicts = [obs.classify_simplex(vertices) for obs in self.obstacles]
        if any(v == INSIDE for v in verdicts):
            return OUTSIDE  # fully inside some obstacle -> unsafe region
        if all(v == OUTSIDE for v in verdicts):
            return INSIDE   # misses every obstacle -> safe region
        return STRADDLE
