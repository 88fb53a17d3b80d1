"""Affine surrogates of the barrier invariance condition and per-simplex verdicts.

The invariance expression ``grad B . f + sup_u grad B . g u + alpha B`` is
bracketed by affine forms assembled from the network gradient enclosure, the
dynamics Taylor enclosures, and McCormick products. A simplex is certified
when the surrogate proves the barrier formula on it, refuted when a probed
point survives exact re-evaluation, and left inconclusive otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .affine import AffineEnclosure, AffineForm, IntervalMatrix
from .dynamics import DynamicsModel, TaylorEnclosure, taylor_enclosure
from .gradient_bounds import propagate_jacobian_bounds
from .mccormick import mccormick_product
from .mesh import Simplex
from .network import NetworkDef, analytic_gradient, forward
from .safesets import INSIDE, OUTSIDE, STRADDLE, SafeSetDef
from .value_bounds import LayerBounds, propagate_value_bounds

Sense = Literal["lower", "upper"]

CERTIFIED = "certified"
COUNTEREXAMPLE = "counterexample"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConditionSurrogate:
    """Affine bracket of the invariance expression plus the value enclosure."""

    invar_lower: AffineForm | None
    invar_upper: AffineForm | None
    value_enclosure: AffineEnclosure
    alpha: float


@dataclass(frozen=True)
class Decision:
    status: str
    point: np.ndarray | None = None
    evidence: dict | None = None


def _column_enclosure(enc: AffineEnclosure, col: int | None = None) -> AffineEnclosure:
    """View a vector enclosure (n,) or a matrix column as shape (n, 1)."""
    if col is None:
        lc, lo = enc.lower_coeffs[:, None, :], enc.lower_offset[:, None]
        uc, uo = enc.upper_coeffs[:, None, :], enc.upper_offset[:, None]
    else:
        lc, lo = enc.lower_coeffs[:, col, None, :], enc.lower_offset[:, col, None]
        uc, uo = enc.upper_coeffs[:, col, None, :], enc.upper_offset[:, col, None]
    return AffineEnclosure(lc, lo, uc, uo, enc.region_id)


def _column_interval(iv: IntervalMatrix, col: int | None = None) -> IntervalMatrix:
    if col is None:
        return IntervalMatrix(iv.lo[:, None], iv.hi[:, None])
    return IntervalMatrix(iv.lo[:, col, None], iv.hi[:, col, None])


def drift_bound(
    jac_enc: AffineEnclosure,
    jac_iv: IntervalMatrix,
    f_enc: AffineEnclosure,
    f_iv: IntervalMatrix,
    eta: float,
    sense: Sense,
) -> AffineForm:
    """Affine bound on ``grad B . f`` over the region, one sense at a time."""
    product = mccormick_product(jac_enc, jac_iv,
                                _column_enclosure(f_enc), _column_interval(f_iv), eta)
    if sense == "lower":
        return product.lower_form((0, 0))
    return product.upper_form((0, 0))


def _channel_product(jac_enc, jac_iv, g_enc, g_iv, j, eta) -> AffineEnclosure:
    return mccormick_product(jac_enc, jac_iv,
                             _column_enclosure(g_enc, j), _column_interval(g_iv, j), eta)


def control_bound(
    jac_enc: AffineEnclosure,
    jac_iv: IntervalMatrix,
    g_enc: AffineEnclosure,
    g_iv: IntervalMatrix,
    control_lo: np.ndarray,
    control_hi: np.ndarray,
    eta: float,
    sense: Sense,
    simplex: Simplex,
) -> AffineForm:
    """Affine bound on ``sup_u grad B . g(x) u`` over the simplex.

    Per channel the product ``v_j(x) = grad B . g_col_j`` gets McCormick
    bounds; the supremum picks a control endpoint, so each endpoint yields a
    sign-correct affine candidate. For the lower sense the candidate with the
    best worst-case vertex value is kept (each candidate alone under-bounds
    the sup). For the upper sense the chord of the convex map
    ``v -> max(v u_lo, v u_hi)`` over the channel's value interval is applied
    to the affine bounds of v, which dominates the sup pointwise.
    """
    dim = simplex.dim
    total = AffineForm(np.zeros(dim), 0.0)
    for j in range(control_lo.shape[0]):
        v = _channel_product(jac_enc, jac_iv, g_enc, g_iv, j, eta)
        v_low, v_up = v.lower_form((0, 0)), v.upper_form((0, 0))
        u_lo, u_hi = float(control_lo[j]), float(control_hi[j])
        if sense == "lower":
            candidates = []
            for u_star in (u_lo, u_hi):
                form = (v_low if u_star >= 0 else v_up).scale(u_star)
                worst = min(form(vx) for vx in simplex.vertices)
                candidates.append((worst, form))
            total = total + max(candidates, key=lambda c: c[0])[1]
        else:
            iv = v.interval_over(simplex.vertices)
            v_lo, v_hi = float(iv.lo[0, 0]), float(iv.hi[0, 0])
            h_lo = max(v_lo * u_lo, v_lo * u_hi)
            h_hi = max(v_hi * u_lo, v_hi * u_hi)
            if v_hi > v_lo:
                slope = (h_hi - h_lo) / (v_hi - v_lo)
                intercept = h_lo - slope * v_lo
                base = (v_up if slope >= 0 else v_low).scale(slope)
                total = total + AffineForm(base.coeffs, base.offset + intercept)
            else:
                total = total + AffineForm(np.zeros(dim), h_lo)
    return total


def assemble_surrogates(
    value_enclosure: AffineEnclosure,
    drift_lower: AffineForm,
    drift_upper: AffineForm,
    control_lower: AffineForm,
    control_upper: AffineForm,
    alpha: float,
) -> ConditionSurrogate:
    """Sum drift, control, and the alpha-weighted barrier value bounds."""
    if alpha <= 0:
        raise ValueError("alpha must be positive (linear class-K gain)")
    value_low = AffineForm(value_enclosure.lower_coeffs[0],
                           float(value_enclosure.lower_offset[0])).scale(alpha)
    value_up = AffineForm(value_enclosure.upper_coeffs[0],
                          float(value_enclosure.upper_offset[0])).scale(alpha)
    return ConditionSurrogate(
        invar_lower=drift_lower + control_lower + value_low,
        invar_upper=drift_upper + control_upper + value_up,
        value_enclosure=value_enclosure,
        alpha=alpha,
    )


def build_surrogate(
    net: NetworkDef,
    model: DynamicsModel,
    simplex: Simplex,
    eta: float,
    alpha: float,
    epsilon_fp: float = 0.0,
    value_data: tuple[AffineEnclosure, list[LayerBounds]] | None = None,
    with_invariance: bool = True,
) -> ConditionSurrogate:
    """Run the full bound pipeline on one simplex.

    ``value_data`` lets the caller reuse an existing forward pass;
    ``with_invariance=False`` skips the gradient/dynamics work for simplices
    whose verdict can only rest on the barrier sign.
    """
    if value_data is None:
        value_data = propagate_value_bounds(net, simplex)
    value_enc, per_layer = value_data
    value_enc = value_enc.pad(epsilon_fp)
    if not with_invariance:
        return ConditionSurrogate(None, None, value_enc, alpha)

    jac_enc = propagate_jacobian_bounds(net, per_layer, simplex, eta).pad(epsilon_fp)
    jac_iv = jac_enc.interval_over(simplex.vertices)

    tf = taylor_enclosure(model, "f", simplex)
    f_enc = tf.as_enclosure(simplex.id)
    f_iv = f_enc.interval_over(simplex.vertices)
    drift_lo = drift_bound(jac_enc, jac_iv, f_enc, f_iv, eta, "lower")
    drift_hi = drift_bound(jac_enc, jac_iv, f_enc, f_iv, eta, "upper")

    if model.control_dim:
        tg = taylor_enclosure(model, "g", simplex)
        g_enc = tg.as_enclosure(simplex.id)
        g_iv = g_enc.interval_over(simplex.vertices)
        ctrl_lo = control_bound(jac_enc, jac_iv, g_enc, g_iv, model.control_lo,
                                model.control_hi, eta, "lower", simplex)
        ctrl_hi = control_bound(jac_enc, jac_iv, g_enc, g_iv, model.control_lo,
                                model.control_hi, eta, "upper", simplex)
    else:
        zero = AffineForm(np.zeros(simplex.dim), 0.0)
        ctrl_lo = ctrl_hi = zero

    return assemble_surrogates(value_enc, drift_lo, drift_hi, ctrl_lo, ctrl_hi, alpha)


class ExactEvaluator:
    """Exact point evaluations of the barrier formula, for counterexample audits."""

    def __init__(self, net: NetworkDef, model: DynamicsModel, safe: SafeSetDef,
                 alpha: float):
        self.net = net
        self.model = model
        self.safe = safe
        self.alpha = alpha

    def barrier(self, x: np.ndarray) -> float:
        return float(forward(self.net, x)[0])

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return analytic_gradient(self.net, x)

    def invariance_expression(self, x: np.ndarray) -> float:
        """Exact ``grad B . f + sup_u grad B . g u + alpha B`` at a point."""
        grad = self.gradient(x)
        fx = np.asarray(self.model.eval_f(x), dtype=float)
        value = float(grad @ fx)
        if self.model.control_dim:
            w = grad @ np.asarray(self.model.eval_g(x), dtype=float)
            value += float(np.maximum(w * self.model.control_lo,
                                      w * self.model.control_hi).sum())
        return value + self.alpha * self.barrier(x)

    def describe(self, x: np.ndarray) -> dict:
        x = np.asarray(x, dtype=float)
        grad = self.gradient(x)
        record = {
            "point": x.tolist(),
            "barrier": self.barrier(x),
            "gradient": grad.tolist(),
            "f": np.asarray(self.model.eval_f(x)).tolist(),
            "g": np.asarray(self.model.eval_g(x)).tolist(),
            "invariance": self.invariance_expression(x),
            "in_state_box": self.safe.in_state_box(x),
            "in_safe_set": self.safe.is_safe_point(x),
        }
        return record

    def phi_violation(self, x: np.ndarray) -> dict | None:
        """Evidence dict when the barrier formula fails at ``x`` exactly, else None."""
        x = np.asarray(x, dtype=float)
        if not self.safe.in_state_box(x):
            return None
        value = self.barrier(x)
        if self.safe.in_unsafe_region(x):
            if value >= 0.0:
                rec = self.describe(x)
                rec["violation"] = "barrier non-negative on the unsafe region"
                return rec
            return None
        if value >= 0.0:
            expr = self.invariance_expression(x)
            if expr < 0.0:
                rec = self.describe(x)
                rec["violation"] = "invariance condition negative on the zero-superlevel set"
                return rec
        return None


def decide_simplex(
    surrogate: ConditionSurrogate,
    simplex: Simplex,
    safe_class: str,
    exact: ExactEvaluator,
    epsilon_strict: float = 0.0,
) -> Decision:
    """Certify, refute, or defer one simplex.

    Certification uses only vertex evaluations of the affine bounds; refutation
    probes the vertices and the barycenter and accepts a point only after the
    exact formula fails there, so false alarms are impossible by construction.
    """
    verts = simplex.vertices
    value_enc = surrogate.value_enclosure
    upper_max = float(value_enc.upper_at(verts)[:, 0].max())
    if upper_max < -epsilon_strict:
        return Decision(CERTIFIED)

    probes = np.vstack([verts, simplex.barycenter[None, :]])
    lower_vals = value_enc.lower_at(probes)[:, 0]

    if safe_class == OUTSIDE:
        for point, blow in zip(probes, lower_vals):
            if blow >= 0.0:
                evidence = exact.phi_violation(point)
                if evidence is not None:
                    return Decision(COUNTEREXAMPLE, point, evidence)
        return Decision(INCONCLUSIVE)

    if safe_class == STRADDLE:
        return Decision(INCONCLUSIVE)

    # Inside the safe set: the invariance branch may certify as well.
    if surrogate.invar_lower is None:
        raise ValueError("inside-simplex decision requires the invariance surrogate")
    invar_min = min(surrogate.invar_lower(v) for v in verts)
    if invar_min >= epsilon_strict:
        return Decision(CERTIFIED)
    for point, blow in zip(probes, lower_vals):
        if blow >= 0.0 and surrogate.invar_upper(point) < 0.0:
            evidence = exact.phi_violation(point)
            if evidence is not None:
                return Decision(COUNTEREXAMPLE, point, evidence)
    return Decision(INCONCLUSIVE)
